#pragma once

// Ends of an exhaustion and the hyperbolic/parabolic classification of
// ends, spaces and user chains from the sequence a_n = cap(B, F_n).

#include "pmod/core.hpp"
#include "pmod/energy.hpp"
#include "pmod/sequence.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pmod {

struct ClassifyConfig
{
    Thresholds thresholds;
    /// Chain indices n to evaluate; empty picks round(2^{k/2}) = 1, 2, 3, 4,
    /// 6, 8, 11, 16, ... up to the chain length, minus trailing indices
    /// whose F_n first appears on the top level without an exact value.
    std::vector<int> schedule;
    /// Relative change between truncations m and 2m at which a_n is accepted.
    double inner_tol = 1e-3;
    /// Base set; defaults to the open ball B(x0, 1).
    std::optional<NodeSet> base;
    SolverOptions solver = { .tol = 1e-9 };
    int threads = 0; // 0: default_threads()
};

/// One value a_n = cap(base, F_n ∩ G_m) on truncation level m.
struct SequencePoint
{
    int n = 0;
    double value = 0.0;
    int level = 0;
    /// Every frontier node of G_m lies in F_n, so each curve leaving G_m
    /// has already met F_n and the truncated value is the full one.
    bool exact = false;
    bool converged = false;
    /// Relative change against the previous truncation (doubling only).
    std::optional<double> change;
};

struct HyperbolicityVerdict
{
    std::string target;
    double p = 2.0;
    Verdict verdict = Verdict::inconclusive;
    std::vector<SequencePoint> points;
    SequenceAnalysis analysis;
    Thresholds thresholds;
    double inner_tol = 0.0;
    bool all_converged = true;
    std::vector<std::string> notes;

    std::vector<double> indices() const;
    std::vector<double> values() const;
};

/// B(x0, 1) in the universe.
NodeSet default_base(const Exhaustion& ex);

std::vector<int> default_schedule(int length);

/// a_n with the truncation policy: the smallest exact level if one exists
/// near the first level meeting F_n, otherwise levels m0, 2 m0, 4 m0, ...
/// until the relative change drops below inner_tol.
SequencePoint chain_value(const Chain& chain, int n, double p, const NodeSet& base, const ClassifyConfig& config);

/// Classifies a chain (end, sequence or the space complement chain).
/// Values from truncations that did not stabilize underestimate a_n; a
/// parabolic verdict resting on them is downgraded to inconclusive.
HyperbolicityVerdict classify(const Chain& target, double p, const ClassifyConfig& config = {});

/// Targets F_n = X \ B(x0, n).
HyperbolicityVerdict classify_space(const ExhaustionPtr& ex, double p, const ClassifyConfig& config = {});

/// classify() after checking nonemptiness, nesting and escape to the
/// chain's full length; violations throw PreconditionError.
HyperbolicityVerdict is_hyperbolic_sequence(const Chain& chain, double p, const ClassifyConfig& config = {});

/// Components of X \ B(x0, R_depth) that reach the outer frontier, each as
/// the chain of components through its smallest frontier node. Distinct
/// components at one depth are never equivalent, so no deduplication is
/// needed beyond that.
std::vector<Chain> build_ends(const ExhaustionPtr& ex, int depth);

enum class SeparationStatus
{
    separated,
    diverging,
    undetermined,
};

const char* to_string(SeparationStatus s);

struct SeparationReport
{
    SeparationStatus status = SeparationStatus::undetermined;
    bool separated = false;
    std::vector<int> levels;
    std::vector<double> estimates; // cap(F_1, G_1) on each level
    std::vector<double> changes;   // relative change per doubling
    /// d log(estimate) / d log(level) over the last doubling.
    double log_slope = 0.0;
    double tol = 0.0;
};

/// cap(F_1 ∩ G_m, G_1 ∩ G_m) over doubling truncation levels; separated
/// when the last two relative changes are below sep_tol.
SeparationReport well_separated(const Chain& F, const Chain& G, double p, double sep_tol = 0.02, const SolverOptions& solver = { .tol = 1e-9 });

struct PairReport
{
    bool conclusive = false;
    Verdict f_verdict = Verdict::inconclusive;
    Verdict g_verdict = Verdict::inconclusive;
    SeparationReport separation;
    /// b_n = cap(F_n, G_n) on the deepest level, and its analysis.
    std::vector<int> indices;
    std::vector<double> pair_values;
    SequenceAnalysis pair_analysis;
    /// Capacity potentials (1 on F_n, 0 on G_n) when requested.
    std::vector<PotentialField> fields;
    std::optional<HyperbolicityVerdict> f_direct;
    std::optional<HyperbolicityVerdict> g_direct;
    /// Direct classification agrees or is inconclusive.
    bool cross_check_consistent = true;
    std::vector<std::string> notes;
};

/// Both chains are hyperbolic when Mod(F_1, G_1) is finite and the pair
/// capacities cap(F_n, G_n) stay above delta_hyp.
PairReport hyperbolic_pair_from_separation(const Chain& F, const Chain& G, double p, const ClassifyConfig& config = {}, bool cross_check = true, bool keep_fields = false);

struct BaseIndependenceReport
{
    HyperbolicityVerdict first;
    HyperbolicityVerdict second;
    bool agree = false;
    /// When one base contains the other: every cap(K_small, F_n) <=
    /// cap(K_large, F_n) up to solver tolerance.
    std::optional<bool> inclusion_monotone;
};

/// Same target with two base sets; indices n where F_n meets either base
/// are skipped, and no index left throws PreconditionError.
BaseIndependenceReport capacity_base_independence(const Chain& chain, const NodeSet& K1, const NodeSet& K2, double p, const ClassifyConfig& config = {});

struct WitnessField
{
    int n;
    double energy;
    PotentialField field;
};

struct ParabolicityWitness
{
    std::vector<WitnessField> witnesses;
    HyperbolicityVerdict verdict;
    /// Smallest energy found; a lower bound for the limit when the space is
    /// hyperbolic.
    double energy_lower_bound = 0.0;
};

/// Capacity potentials u_j for cap(K, X \ B(x0, n_j)): 1 on K, 0 outside
/// the ball. Their energies tend to 0 exactly when the space is parabolic.
ParabolicityWitness parabolicity_witness(const ExhaustionPtr& ex, const NodeSet& K, const std::vector<int>& levels, double p, const ClassifyConfig& config = {});

} // namespace pmod
