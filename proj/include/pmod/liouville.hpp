#pragma once

// Liouville classes O^p_*, their inclusion lattice, the finite-energy
// harmonic construction from two well-separated hyperbolic sequences, the
// O^p_HBD decision and the exact weighted-line classification.

#include "pmod/ends.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pmod {

enum class LClass
{
    HP,
    HB,
    HBD,
    HD,
    QP,
    QB,
    QBD,
    QD,
    para,
};

inline constexpr std::array<LClass, 9> all_classes = { LClass::HP, LClass::HB, LClass::HBD, LClass::HD, LClass::QP, LClass::QB, LClass::QBD, LClass::QD, LClass::para };

/// "O^p_HP", ..., "O^p_para".
const char* to_string(LClass c);
/// Accepts "O^p_HP" or the bare suffix "HP"; anything else throws InputError.
LClass parse_class(std::string_view name);

enum class Membership
{
    member,
    nonmember,
    unknown,
};

const char* to_string(Membership m);
Membership parse_membership(std::string_view s);

struct LatticeEdge
{
    LClass sub;
    LClass sup;
    bool equality = false; // sub = sup
    std::string name() const;
};

/// The fixed inclusion diagram and its transitive closure.
class ClassLattice
{
  public:
    static const ClassLattice& get();

    const std::vector<LatticeEdge>& edges() const { return edges_; }
    /// a ⊆ b in the closure (reflexive).
    bool contained(LClass a, LClass b) const;
    /// Name of the direct edge relating a ⊆ b, or "a ⊂ b (implied)".
    std::string explain(LClass a, LClass b) const;

  private:
    ClassLattice();
    std::vector<LatticeEdge> edges_;
    std::array<std::array<bool, 9>, 9> closure_{};
};

struct Evidence
{
    std::string id;
    std::string summary;
};

struct ClassReport
{
    std::string subject;
    double p = 2.0;
    std::map<LClass, Membership> membership;
    /// Evidence ids backing each decided class.
    std::map<LClass, std::vector<std::string>> support;
    std::vector<Evidence> evidence;
    std::vector<std::string> violations;
    std::vector<std::string> notes;

    ClassReport();
    Membership at(LClass c) const { return membership.at(c); }
    /// Records a decision with its evidence id; the evidence must exist.
    void decide(LClass c, Membership m, const std::string& evidence_id);
    void add_evidence(std::string id, std::string summary);
    bool consistent() const { return violations.empty(); }
};

/// Every closure pair a ⊆ b with a member and b nonmember, named by edge.
std::vector<std::string> lattice_check(const ClassReport& report);
/// Same check for memberships keyed by class name (unknown names throw).
std::vector<std::string> lattice_check(const std::map<std::string, Membership>& named);

/// Fills unknown entries implied by the lattice (member upward, nonmember
/// downward) and stores the lattice_check result in report.violations.
void finalize(ClassReport& report);

struct ConstructConfig
{
    ClassifyConfig classify;
    /// Absolute slack on the energy bounds.
    double energy_tol = 1e-6;
    /// The fixed ball B(x0, r) on which oscillation and Cauchy differences
    /// are measured.
    double ball_radius = 2.0;
    /// Stabilized when the last sup-norm difference on the ball is below.
    double stab_tol = 0.02;
};

/// u_n = 0 on F_n, 1 on G_n, free on the truncation frontier, for the
/// scheduled n.
struct Construction
{
    std::vector<int> indices;
    std::vector<PotentialField> fields;
    std::vector<double> energies;
    std::vector<double> minima;
    std::vector<double> maxima;
    bool bounded = false; // 0 <= u_n <= 1 up to solver tolerance
    double mod_estimate = 0.0;   // cap(F_1, G_1) on the deepest level
    double limit_estimate = 0.0; // lim cap(F_n, G_n)
    bool energy_upper_ok = false;
    bool energy_lower_ok = false;
    std::vector<double> oscillations; // of u_n on the ball
    std::vector<double> cauchy;       // sup |u_n - u_prev| on the ball
    double delta = 0.0;               // oscillation of the last u_n
    bool stabilized = false;
    /// All of the above hold; otherwise the construction is inconclusive.
    bool valid = false;
    PairReport pair;
    std::vector<std::string> notes;
};

/// Checks well-separation and the pair verdict first; failures throw
/// PreconditionError.
Construction construct_finite_energy_harmonic(const Chain& F, const Chain& G, double p, const ConstructConfig& config = {});
/// Reuses a pair report computed with keep_fields.
Construction construct_from_pair(const Chain& F, const Chain& G, double p, PairReport pair, const ConstructConfig& config = {});

struct DecideConfig
{
    std::string subject = "space";
    ConstructConfig construct;
    /// Ends are built at this depth and added to the candidates.
    int end_depth = 2;
    /// Classify the space when no pair is found.
    bool classify_space = true;
};

struct PairAttempt
{
    std::string f;
    std::string g;
    SeparationStatus separation = SeparationStatus::undetermined;
    Verdict pair_verdict = Verdict::inconclusive;
    std::string skipped; // reason when not evaluated
};

struct Decision
{
    ClassReport report;
    std::vector<PairAttempt> attempts;
    std::optional<Construction> witness;
    std::optional<HyperbolicityVerdict> space;
};

/// Nonmember when a well-separated hyperbolic pair is found among the ends
/// and the candidates, member when the space is parabolic, else unknown.
Decision decide_O_HBD(const ExhaustionPtr& ex, double p, const std::vector<Chain>& candidates, const DecideConfig& config = {});

enum class TailKind
{
    undeclared,
    power,       // w ~ c |x|^exponent
    exponential, // w ~ c exp(exponent |x|)
};

struct Tail
{
    TailKind kind = TailKind::undeclared;
    double exponent = 0.0;
    /// |x| from which the declared form holds.
    double from = 1.0;
};

struct LineWeight
{
    std::function<double(double)> w;
    Tail pos;
    Tail neg;
    std::string description;
};

/// |x|^alpha for x <= -1, 1 elsewhere.
LineWeight example_line_weight(double alpha);
/// (1 + |x|)^alpha.
LineWeight symmetric_line_weight(double alpha);

/// u(x) = ∫_{-inf}^x w^{1/(1-p)} / ∫_R w^{1/(1-p)}; u' ∝ w^{1/(1-p)}.
struct LineWitness
{
    double total = 0.0;
    std::function<double(double)> u;
};

struct LineClassification
{
    ClassReport report;
    bool pos_hyperbolic = false;
    bool neg_hyperbolic = false;
    /// ∫ w^{1/(1-p)} over [-neg.from, pos.from].
    double finite_part = 0.0;
    std::optional<double> pos_tail; // over [pos.from, inf) when finite
    std::optional<double> neg_tail;
    std::optional<LineWitness> witness;
};

/// Whether ∫^inf of w^{1/(1-p)} converges for the declared tail.
bool tail_converges(const Tail& t, double p);

/// Undeclared tails throw InputError.
LineClassification classify_weighted_line(const LineWeight& w, double p);

} // namespace pmod
