#include "pmod/liouville.hpp"

#include "pmod/error.hpp"
#include "pmod/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pmod {

namespace {

constexpr std::size_t idx(LClass c)
{
    return static_cast<std::size_t>(c);
}

bool in_equality_group(LClass c)
{
    return c == LClass::HBD || c == LClass::HD || c == LClass::QBD || c == LClass::QD;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

const char* to_string(LClass c)
{
    switch (c) {
    case LClass::HP:
        return "O^p_HP";
    case LClass::HB:
        return "O^p_HB";
    case LClass::HBD:
        return "O^p_HBD";
    case LClass::HD:
        return "O^p_HD";
    case LClass::QP:
        return "O^p_QP";
    case LClass::QB:
        return "O^p_QB";
    case LClass::QBD:
        return "O^p_QBD";
    case LClass::QD:
        return "O^p_QD";
    case LClass::para:
        return "O^p_para";
    }
    return "?";
}

LClass parse_class(std::string_view name)
{
    std::string_view bare = name.starts_with("O^p_") ? name.substr(4) : name;
    for (LClass c : all_classes)
        if (std::string_view(to_string(c)).substr(4) == bare)
            return c;
    throw InputError("unknown class name '" + std::string(name) + "'");
}

const char* to_string(Membership m)
{
    switch (m) {
    case Membership::member:
        return "member";
    case Membership::nonmember:
        return "nonmember";
    case Membership::unknown:
        return "unknown";
    }
    return "?";
}

Membership parse_membership(std::string_view s)
{
    for (Membership m : { Membership::member, Membership::nonmember, Membership::unknown })
        if (s == to_string(m))
            return m;
    throw InputError("membership must be member, nonmember or unknown, got '" + std::string(s) + "'");
}

std::string LatticeEdge::name() const
{
    return std::string(to_string(sub)) + (equality ? " = " : " ⊂ ") + to_string(sup);
}

ClassLattice::ClassLattice()
{
    using enum LClass;
    edges_ = {
        { HP, HB },
        { HB, HBD },
        { QP, QB },
        { QB, QBD },
        { QP, HP },
        { QB, HB },
        { para, HBD },
        { HBD, HD, true },
        { HD, QBD, true },
        { QBD, QD, true },
    };
    for (LClass c : all_classes)
        closure_[idx(c)][idx(c)] = true;
    for (const auto& e : edges_) {
        closure_[idx(e.sub)][idx(e.sup)] = true;
        if (e.equality)
            closure_[idx(e.sup)][idx(e.sub)] = true;
    }
    for (std::size_t k = 0; k < 9; ++k)
        for (std::size_t i = 0; i < 9; ++i)
            for (std::size_t j = 0; j < 9; ++j)
                if (closure_[i][k] && closure_[k][j])
                    closure_[i][j] = true;
}

const ClassLattice& ClassLattice::get()
{
    static const ClassLattice lattice;
    return lattice;
}

bool ClassLattice::contained(LClass a, LClass b) const
{
    return closure_[idx(a)][idx(b)];
}

std::string ClassLattice::explain(LClass a, LClass b) const
{
    for (const auto& e : edges_)
        if (!e.equality && e.sub == a && e.sup == b)
            return e.name();
    if (in_equality_group(a) && in_equality_group(b))
        return std::string(to_string(a)) + " = " + to_string(b);
    return std::string(to_string(a)) + " ⊂ " + to_string(b) + " (implied)";
}

ClassReport::ClassReport()
{
    for (LClass c : all_classes)
        membership[c] = Membership::unknown;
}

void ClassReport::add_evidence(std::string id, std::string summary)
{
    for (auto& e : evidence)
        if (e.id == id) {
            e.summary = std::move(summary);
            return;
        }
    evidence.push_back({ std::move(id), std::move(summary) });
}

void ClassReport::decide(LClass c, Membership m, const std::string& evidence_id)
{
    bool known = std::any_of(evidence.begin(), evidence.end(), [&](const Evidence& e) { return e.id == evidence_id; });
    if (!known)
        throw std::logic_error("decision cites missing evidence '" + evidence_id + "'");
    membership[c] = m;
    auto& s = support[c];
    if (std::find(s.begin(), s.end(), evidence_id) == s.end())
        s.push_back(evidence_id);
}

std::vector<std::string> lattice_check(const ClassReport& report)
{
    const auto& L = ClassLattice::get();
    std::vector<std::string> out;
    for (LClass a : all_classes)
        for (LClass b : all_classes)
            if (a != b && L.contained(a, b) && report.at(a) == Membership::member && report.at(b) == Membership::nonmember)
                out.push_back(L.explain(a, b) + ": " + to_string(a) + " member but " + to_string(b) + " nonmember");
    return out;
}

std::vector<std::string> lattice_check(const std::map<std::string, Membership>& named)
{
    ClassReport r;
    for (const auto& [name, m] : named)
        r.membership[parse_class(name)] = m;
    return lattice_check(r);
}

void finalize(ClassReport& report)
{
    const auto& L = ClassLattice::get();
    report.violations = lattice_check(report);
    if (!report.violations.empty())
        return; // propagating a contradiction would only spread it
    report.add_evidence("lattice", "implied by the inclusion lattice");
    auto snapshot = report.membership;
    for (LClass a : all_classes) {
        for (LClass b : all_classes) {
            if (a == b || !L.contained(a, b))
                continue;
            if (snapshot[a] == Membership::member && report.at(b) == Membership::unknown)
                report.decide(b, Membership::member, "lattice");
            if (snapshot[b] == Membership::nonmember && report.at(a) == Membership::unknown)
                report.decide(a, Membership::nonmember, "lattice");
        }
    }
    report.violations = lattice_check(report);
}

Construction construct_from_pair(const Chain& F, const Chain& G, double p, PairReport pair, const ConstructConfig& config)
{
    if (F.exhaustion() != G.exhaustion())
        throw InputError("chains live on different exhaustions");
    if (!pair.separation.separated)
        throw PreconditionError("chains '" + F.label() + "' and '" + G.label() + "' are not shown well separated");
    if (!pair.conclusive)
        throw PreconditionError("chains '" + F.label() + "' and '" + G.label() + "' are not shown hyperbolic");
    if (pair.fields.size() != pair.indices.size())
        throw InputError("pair report carries no potentials");

    const Exhaustion& ex = *F.exhaustion();
    Construction out;
    out.indices = pair.indices;
    out.mod_estimate = pair.separation.estimates.back();
    out.limit_estimate = pair.pair_analysis.limit;
    const double bound_tol = 10.0 * config.classify.solver.tol;
    NodeSet ball = ex.base_ball(config.ball_radius);
    if (ball.empty())
        throw InputError("oscillation ball is empty");

    out.bounded = true;
    out.energy_upper_ok = out.energy_lower_ok = true;
    for (std::size_t i = 0; i < pair.fields.size(); ++i) {
        // The pair potential is 1 on F_n and 0 on G_n.
        const PotentialField& v = pair.fields[i];
        std::vector<double> u(v.values().size());
        std::transform(v.values().begin(), v.values().end(), u.begin(), [](double x) { return 1.0 - x; });
        PotentialField field(v.graph_ptr(), std::move(u));
        double e = p_energy(field, p);
        out.energies.push_back(e);
        out.minima.push_back(field.min());
        out.maxima.push_back(field.max());
        out.bounded = out.bounded && field.min() >= -bound_tol && field.max() <= 1.0 + bound_tol;
        out.energy_upper_ok = out.energy_upper_ok && e <= out.mod_estimate + config.energy_tol;
        out.energy_lower_ok = out.energy_lower_ok && e >= out.limit_estimate - config.energy_tol;
        out.oscillations.push_back(field.oscillation(ball));
        if (!out.fields.empty()) {
            double d = 0.0;
            for (NodeId x : ball)
                d = std::max(d, std::abs(field[x] - out.fields.back()[x]));
            out.cauchy.push_back(d);
        }
        out.fields.push_back(std::move(field));
    }
    out.delta = out.oscillations.back();
    out.stabilized = !out.cauchy.empty() && out.cauchy.back() < config.stab_tol;
    out.valid = out.bounded && out.energy_upper_ok && out.energy_lower_ok && out.stabilized && out.delta > 0.0;
    if (!out.stabilized)
        out.notes.push_back("u_n did not stabilize on B(x0, " + fmt(config.ball_radius) + "); construction inconclusive");
    if (!out.bounded)
        out.notes.push_back("some u_n leaves [0, 1]");
    if (!out.energy_upper_ok)
        out.notes.push_back("energy exceeds the Mod(F_1, G_1) estimate");
    if (!out.energy_lower_ok)
        out.notes.push_back("energy falls below the lim cap(F_n, G_n) estimate");
    out.pair = std::move(pair);
    return out;
}

Construction construct_finite_energy_harmonic(const Chain& F, const Chain& G, double p, const ConstructConfig& config)
{
    if (F.exhaustion() != G.exhaustion())
        throw InputError("chains live on different exhaustions");
    return construct_from_pair(F, G, p, hyperbolic_pair_from_separation(F, G, p, config.classify, false, true), config);
}

Decision decide_O_HBD(const ExhaustionPtr& ex, double p, const std::vector<Chain>& candidates, const DecideConfig& config)
{
    check_exponent(p);
    Decision out;
    out.report.subject = config.subject;
    out.report.p = p;

    std::vector<Chain> chains = build_ends(ex, std::min(std::max(config.end_depth, 1), ex->radius_count()));
    for (const Chain& c : candidates) {
        if (c.exhaustion() != ex)
            throw InputError("candidate chain '" + c.label() + "' lives on another exhaustion");
        chains.push_back(c);
    }

    struct Job
    {
        std::size_t i, j;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        for (std::size_t j = i + 1; j < chains.size(); ++j) {
            PairAttempt a{ chains[i].label(), chains[j].label(), SeparationStatus::undetermined, Verdict::inconclusive, {} };
            if (chains[i].at(1).intersects(chains[j].at(1)))
                a.skipped = "F_1 and G_1 overlap";
            else
                jobs.push_back({ i, j });
            out.attempts.push_back(std::move(a));
        }
    }

    int threads = config.construct.classify.threads > 0 ? config.construct.classify.threads : default_threads();
    ClassifyConfig inner = config.construct.classify;
    if (threads > 1 && jobs.size() > 1)
        inner.threads = 1;
    std::vector<std::optional<PairReport>> reports(jobs.size());
    parallel_for(jobs.size(), jobs.size() > 1 ? threads : 1, [&](std::size_t k) {
        reports[k] = hyperbolic_pair_from_separation(chains[jobs[k].i], chains[jobs[k].j], p, inner, false, true);
    });

    std::optional<std::size_t> found;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        auto it = std::find_if(out.attempts.begin(), out.attempts.end(), [&](const PairAttempt& a) { return a.f == chains[jobs[k].i].label() && a.g == chains[jobs[k].j].label(); });
        it->separation = reports[k]->separation.status;
        it->pair_verdict = reports[k]->conclusive ? Verdict::hyperbolic : reports[k]->pair_analysis.verdict;
        if (reports[k]->conclusive && !found)
            found = k;
    }

    if (found) {
        const Chain& F = chains[jobs[*found].i];
        const Chain& G = chains[jobs[*found].j];
        std::string pid = "pair:" + F.label() + "|" + G.label();
        const PairReport& pr = *reports[*found];
        out.report.add_evidence(pid, "Mod(F_1, G_1) ~ " + fmt(pr.separation.estimates.back()) + " stable under truncation doubling; lim cap(F_n, G_n) ~ " + fmt(pr.pair_analysis.limit));
        out.witness = construct_from_pair(F, G, p, std::move(*reports[*found]), config.construct);
        std::string wid = "witness:" + F.label() + "|" + G.label();
        out.report.add_evidence(wid, std::string(out.witness->valid ? "valid" : "inconclusive") + " bounded finite-energy p-harmonic construction, oscillation " + fmt(out.witness->delta) + " on B(x0, " + fmt(config.construct.ball_radius) + "), energy " + fmt(out.witness->energies.back()));
        out.report.decide(LClass::HBD, Membership::nonmember, pid);
        out.report.support[LClass::HBD].push_back(wid);
        if (!out.witness->valid)
            out.report.notes.push_back("the pair criterion holds but the constructed witness failed a check");
    } else {
        out.report.notes.push_back("no well-separated hyperbolic pair among " + std::to_string(chains.size()) + " candidate chains; this proves nothing about membership");
        if (config.classify_space) {
            out.space = classify_space(ex, p, config.construct.classify);
            std::string sid = std::string("space:") + to_string(out.space->verdict);
            out.report.add_evidence(sid, std::string("space verdict ") + to_string(out.space->verdict) + " from cap(B, X \\ B(x0, n))");
            if (out.space->verdict == Verdict::parabolic)
                out.report.decide(LClass::para, Membership::member, sid);
            else if (out.space->verdict == Verdict::hyperbolic)
                out.report.decide(LClass::para, Membership::nonmember, sid);
        }
    }
    finalize(out.report);
    return out;
}

LineWeight example_line_weight(double alpha)
{
    LineWeight w;
    w.w = [alpha](double x) { return x <= -1.0 ? std::pow(-x, alpha) : 1.0; };
    w.pos = { TailKind::power, 0.0, 1.0 };
    w.neg = { TailKind::power, alpha, 1.0 };
    w.description = "|x|^" + fmt(alpha) + " for x <= -1, 1 elsewhere";
    return w;
}

LineWeight symmetric_line_weight(double alpha)
{
    LineWeight w;
    w.w = [alpha](double x) { return std::pow(1.0 + std::abs(x), alpha); };
    w.pos = { TailKind::power, alpha, 1.0 };
    w.neg = { TailKind::power, alpha, 1.0 };
    w.description = "(1+|x|)^" + fmt(alpha);
    return w;
}

bool tail_converges(const Tail& t, double p)
{
    check_exponent(p);
    switch (t.kind) {
    case TailKind::power:
        // ∫^inf x^{a/(1-p)} dx < inf  iff  a/(p-1) > 1.
        return t.exponent > p - 1.0;
    case TailKind::exponential:
        return t.exponent > 0.0;
    case TailKind::undeclared:
        break;
    }
    throw InputError("tail behaviour of the weight is not declared");
}

namespace {

double integrate(const std::function<double(double)>& f, double a, double b)
{
    if (a == b)
        return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12, &err);
}

std::string tail_text(const Tail& t, double p)
{
    std::string form = t.kind == TailKind::power ? "power tail |x|^" + fmt(t.exponent) + ", compared with p-1 = " + fmt(p - 1.0) : "exponential tail exp(" + fmt(t.exponent) + "|x|)";
    return form;
}

} // namespace

LineClassification classify_weighted_line(const LineWeight& w, double p)
{
    check_exponent(p);
    if (!w.w)
        throw InputError("weight function missing");
    for (const Tail* t : { &w.pos, &w.neg }) {
        if (t->kind == TailKind::undeclared)
            throw InputError("tail behaviour of the weight is not declared; refusing to guess convergence numerically");
        if (!(t->from >= 0.0) || !std::isfinite(t->from) || !std::isfinite(t->exponent))
            throw InputError("tail declaration must have finite exponent and from >= 0");
    }
    const double q = 1.0 / (1.0 - p);
    auto dual = [&](double x) {
        double v = w.w(x);
        if (!(v > 0.0) || !std::isfinite(v))
            throw InputError("weight must be positive and finite, fails at x = " + fmt(x));
        return std::pow(v, q);
    };

    LineClassification out;
    out.pos_hyperbolic = tail_converges(w.pos, p);
    out.neg_hyperbolic = tail_converges(w.neg, p);
    out.finite_part = integrate(dual, -w.neg.from, 0.0) + integrate(dual, 0.0, w.pos.from);
    const double inf = std::numeric_limits<double>::infinity();
    if (out.pos_hyperbolic)
        out.pos_tail = integrate(dual, w.pos.from, inf);
    if (out.neg_hyperbolic)
        out.neg_tail = integrate(dual, -inf, -w.neg.from);

    ClassReport& r = out.report;
    r.subject = "weighted line, w = " + (w.description.empty() ? std::string("user weight") : w.description);
    r.p = p;
    r.add_evidence("end:+inf", std::string("end at +inf ") + (out.pos_hyperbolic ? "hyperbolic: integral of w^{1/(1-p)} over (0, inf) finite" : "parabolic: integral of w^{1/(1-p)} over (0, inf) diverges") + " (" + tail_text(w.pos, p) + ")");
    r.add_evidence("end:-inf", std::string("end at -inf ") + (out.neg_hyperbolic ? "hyperbolic: integral of w^{1/(1-p)} over (-inf, 0) finite" : "parabolic: integral of w^{1/(1-p)} over (-inf, 0) diverges") + " (" + tail_text(w.neg, p) + ")");

    const int hyperbolic_ends = int(out.pos_hyperbolic) + int(out.neg_hyperbolic);
    if (hyperbolic_ends == 0) {
        for (LClass c : { LClass::para, LClass::QP, LClass::QD })
            for (const char* id : { "end:+inf", "end:-inf" })
                r.decide(c, Membership::member, id);
    } else if (hyperbolic_ends == 2) {
        double total = *out.neg_tail + out.finite_part + *out.pos_tail;
        LineWitness wit;
        wit.total = total;
        LineWeight copy = w;
        wit.u = [copy, q, total, neg = *out.neg_tail](double x) {
            auto f = [&](double t) { return std::pow(copy.w(t), q); };
            const double inf = std::numeric_limits<double>::infinity();
            double a = -copy.neg.from, b = copy.pos.from;
            double s;
            if (x <= a)
                s = integrate(f, -inf, x);
            else
                s = neg + integrate(f, a, std::min(x, 0.0)) + (x > 0.0 ? integrate(f, 0.0, std::min(x, b)) : 0.0) + (x > b ? integrate(f, b, x) : 0.0);
            return std::clamp(s / total, 0.0, 1.0);
        };
        out.witness = std::move(wit);
        r.add_evidence("witness:line", "u(x) = integral of w^{1/(1-p)} from -inf to x over its total " + fmt(total) + ", bounded with energy total^{1-p}");
        for (const char* id : { "end:+inf", "end:-inf", "witness:line" })
            r.decide(LClass::HBD, Membership::nonmember, id);
        for (const char* id : { "end:+inf", "end:-inf" })
            r.decide(LClass::para, Membership::nonmember, id);
    } else {
        for (const char* id : { "end:+inf", "end:-inf" }) {
            r.decide(LClass::QB, Membership::member, id);
            r.decide(LClass::QD, Membership::member, id);
            r.decide(LClass::HP, Membership::nonmember, id);
            r.decide(LClass::para, Membership::nonmember, id);
        }
    }
    finalize(r);
    return out;
}

} // namespace pmod
