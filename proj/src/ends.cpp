#include "pmod/ends.hpp"

#include "pmod/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pmod {

std::vector<double> HyperbolicityVerdict::indices() const
{
    std::vector<double> out;
    for (const auto& pt : points)
        out.push_back(pt.n);
    return out;
}

std::vector<double> HyperbolicityVerdict::values() const
{
    std::vector<double> out;
    for (const auto& pt : points)
        out.push_back(pt.value);
    return out;
}

const char* to_string(SeparationStatus s)
{
    switch (s) {
    case SeparationStatus::separated:
        return "separated";
    case SeparationStatus::diverging:
        return "diverging";
    case SeparationStatus::undetermined:
        return "undetermined";
    }
    return "?";
}

NodeSet default_base(const Exhaustion& ex)
{
    return ex.base_ball(1.0);
}

std::vector<int> default_schedule(int length)
{
    std::vector<int> out;
    for (int k = 0;; ++k) {
        int n = static_cast<int>(std::lround(std::pow(2.0, 0.5 * k)));
        if (n > length)
            break;
        if (out.empty() || n > out.back())
            out.push_back(n);
    }
    return out;
}

namespace {

struct Evaluation
{
    SequencePoint point;
    std::optional<PotentialField> field;
};

double rel_change(double a, double b)
{
    double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

Evaluation evaluate(const Chain& chain, int n, double p, const NodeSet& base, const ClassifyConfig& config, bool keep_field)
{
    const Exhaustion& ex = *chain.exhaustion();
    NodeSet F = chain.at(n);
    if (F.empty())
        throw PreconditionError("chain '" + chain.label() + "' has an empty set at n = " + std::to_string(n));
    if (F.intersects(base))
        throw PreconditionError("base set meets F_" + std::to_string(n) + " of chain '" + chain.label() + "'");

    const int top = ex.level_count();
    const int m0 = std::max(ex.smallest_level_containing(base), ex.level_of(F.front()));
    Evaluation out;
    out.point.n = n;

    auto solve = [&](int m) {
        GraphPtr g = ex.level(m);
        return capacity(g, base, F.prefix(g->node_count()), p, config.solver);
    };
    auto keep = [&](CapacityResult& r, int m) {
        out.point.value = r.value;
        out.point.level = m;
        if (keep_field)
            out.field.emplace(std::move(r.witness));
    };

    for (int m = m0; m <= top; ++m) {
        if (ex.frontier(m).subset_of(F)) {
            auto r = solve(m);
            keep(r, m);
            out.point.exact = true;
            out.point.converged = r.report.converged;
            return out;
        }
    }

    auto r = solve(m0);
    keep(r, m0);
    for (int m = std::min(2 * m0, top); m > out.point.level; m = std::min(2 * m, top)) {
        double previous = out.point.value;
        auto next = solve(m);
        keep(next, m);
        double c = rel_change(previous, out.point.value);
        out.point.change = c;
        if (c < config.inner_tol) {
            out.point.converged = next.report.converged;
            return out;
        }
    }
    out.point.converged = false;
    return out;
}

std::vector<Evaluation> evaluate_schedule(const Chain& chain, const std::vector<int>& schedule, double p, const NodeSet& base, const ClassifyConfig& config, bool keep_fields)
{
    std::vector<Evaluation> out(schedule.size());
    int threads = config.threads > 0 ? config.threads : default_threads();
    parallel_for(schedule.size(), threads, [&](std::size_t i) { out[i] = evaluate(chain, schedule[i], p, base, config, keep_fields); });
    return out;
}

// a_n can be confirmed: either an exact level exists or there is a level
// above the first one to compare against.
bool checkable(const Chain& chain, int n)
{
    const Exhaustion& ex = *chain.exhaustion();
    NodeSet F = chain.at(n);
    if (F.empty())
        return true; // reported by evaluate()
    int top = ex.level_count();
    return ex.level_of(F.front()) < top || ex.frontier(top).subset_of(F);
}

std::vector<int> resolve_schedule(const Chain& chain, const ClassifyConfig& config)
{
    int length = std::min(chain.length(), chain.exhaustion()->radius_count());
    if (chain.origin() == Chain::Origin::user_supplied)
        length = chain.length();
    std::vector<int> s = config.schedule;
    if (s.empty()) {
        s = default_schedule(length);
        while (s.size() > 1 && !checkable(chain, s.back()))
            s.pop_back();
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < 1 || s[i] > chain.length())
            throw InputError("schedule index " + std::to_string(s[i]) + " outside chain '" + chain.label() + "'");
        if (i > 0 && s[i] <= s[i - 1])
            throw InputError("schedule must be strictly increasing");
    }
    return s;
}

HyperbolicityVerdict assemble(const Chain& target, double p, const ClassifyConfig& config, std::vector<Evaluation> evals)
{
    HyperbolicityVerdict v;
    v.target = target.label();
    v.p = p;
    v.thresholds = config.thresholds;
    v.inner_tol = config.inner_tol;
    for (auto& e : evals) {
        v.all_converged = v.all_converged && e.point.converged;
        v.points.push_back(e.point);
    }
    // Unstabilized values carry truncation error of order inner_tol.
    v.analysis = analyze_sequence(v.indices(), v.values(), p, config.thresholds, v.all_converged ? 1e-6 : std::max(1e-6, config.inner_tol));
    v.verdict = v.analysis.verdict;
    if (!v.all_converged) {
        v.notes.push_back("some a_n did not stabilize across truncations; those values underestimate the untruncated ones");
        if (v.verdict == Verdict::parabolic) {
            v.verdict = Verdict::inconclusive;
            v.notes.push_back("parabolic verdict withdrawn: it rests on underestimates");
        }
    }
    if (target.origin() != Chain::Origin::space)
        v.notes.push_back("escape condition verified only to the available depth");
    return v;
}

} // namespace

SequencePoint chain_value(const Chain& chain, int n, double p, const NodeSet& base, const ClassifyConfig& config)
{
    check_exponent(p);
    return evaluate(chain, n, p, base, config, false).point;
}

HyperbolicityVerdict classify(const Chain& target, double p, const ClassifyConfig& config)
{
    check_exponent(p);
    if (!(config.thresholds.delta_par < config.thresholds.delta_hyp))
        throw InputError("thresholds must satisfy delta_par < delta_hyp");
    const Exhaustion& ex = *target.exhaustion();
    NodeSet base = config.base ? *config.base : default_base(ex);
    if (base.empty())
        throw InputError("base set is empty");
    ex.universe().check_nodes(base);
    auto schedule = resolve_schedule(target, config);
    return assemble(target, p, config, evaluate_schedule(target, schedule, p, base, config, false));
}

HyperbolicityVerdict classify_space(const ExhaustionPtr& ex, double p, const ClassifyConfig& config)
{
    return classify(Chain::space_complement(ex), p, config);
}

HyperbolicityVerdict is_hyperbolic_sequence(const Chain& chain, double p, const ClassifyConfig& config)
{
    ChainCheck check = check_chain(chain, chain.length());
    if (!check.nonempty)
        throw PreconditionError("chain '" + chain.label() + "' has an empty set at n = " + std::to_string(check.first_violation));
    if (!check.nested)
        throw PreconditionError("chain '" + chain.label() + "' is not nested at n = " + std::to_string(check.first_violation));
    if (!check.escapes)
        throw PreconditionError("chain '" + chain.label() + "' does not escape to infinity within the available depth");
    return classify(chain, p, config);
}

std::vector<Chain> build_ends(const ExhaustionPtr& ex, int depth)
{
    if (depth < 1 || depth > ex->radius_count())
        throw InputError("end depth must lie in 1.." + std::to_string(ex->radius_count()));
    const MetricGraph& g = ex->universe();
    NodeSet inner = g.has_node(ex->base()) ? ball(g, ex->base(), ex->radius(depth)) : NodeSet{};
    NodeSet outer = ex->frontier(ex->level_count());
    std::vector<Chain> out;
    for (const NodeSet& comp : complement_components(g, inner)) {
        NodeSet reach = set_intersection(comp, outer);
        if (reach.empty())
            continue;
        NodeId anchor = reach.front();
        // Longest chain whose sets all still contain the anchor.
        int length = depth;
        while (length < ex->radius_count() && ex->distance_from_base(anchor) >= ex->radius(length + 1))
            ++length;
        out.push_back(Chain::end_through(ex, anchor, length, "end_" + std::to_string(out.size() + 1)));
    }
    return out;
}

SeparationReport well_separated(const Chain& F, const Chain& G, double p, double sep_tol, const SolverOptions& solver)
{
    check_exponent(p);
    if (F.exhaustion() != G.exhaustion())
        throw InputError("chains live on different exhaustions");
    const Exhaustion& ex = *F.exhaustion();
    NodeSet f1 = F.at(1), g1 = G.at(1);
    if (f1.empty() || g1.empty())
        throw PreconditionError("first sets of both chains must be nonempty");
    if (f1.intersects(g1))
        throw PreconditionError("first sets of the two chains overlap");

    SeparationReport out;
    out.tol = sep_tol;
    const int top = ex.level_count();
    const int m0 = std::max(ex.level_of(f1.front()), ex.level_of(g1.front()));
    for (int m = m0;; m = std::min(2 * m, top)) {
        GraphPtr g = ex.level(m);
        auto r = capacity(g, f1.prefix(g->node_count()), g1.prefix(g->node_count()), p, solver);
        out.levels.push_back(m);
        out.estimates.push_back(r.value);
        if (out.estimates.size() > 1)
            out.changes.push_back(rel_change(out.estimates[out.estimates.size() - 2], r.value));
        if (m == top)
            break;
    }
    const auto k = out.estimates.size();
    if (k >= 2) {
        double a = out.estimates[k - 2], b = out.estimates[k - 1];
        double la = out.levels[k - 2], lb = out.levels[k - 1];
        if (a > 0.0 && b > 0.0)
            out.log_slope = std::log(b / a) / std::log(lb / la);
    }
    if (out.changes.size() >= 2 && out.changes[out.changes.size() - 1] < sep_tol && out.changes[out.changes.size() - 2] < sep_tol)
        out.status = SeparationStatus::separated;
    else if (!out.changes.empty() && out.changes.back() >= sep_tol && (out.changes.size() < 2 || out.changes.back() >= 0.5 * out.changes[out.changes.size() - 2]))
        out.status = SeparationStatus::diverging;
    out.separated = out.status == SeparationStatus::separated;
    return out;
}

PairReport hyperbolic_pair_from_separation(const Chain& F, const Chain& G, double p, const ClassifyConfig& config, bool cross_check, bool keep_fields)
{
    PairReport out;
    out.separation = well_separated(F, G, p, 0.02, config.solver);
    if (!out.separation.separated) {
        out.notes.push_back(std::string("Mod(F_1, G_1) not shown finite: ") + to_string(out.separation.status));
        return out;
    }
    const Exhaustion& ex = *F.exhaustion();
    const int length = std::min(F.length(), G.length());
    std::vector<int> schedule = config.schedule.empty() ? default_schedule(length) : config.schedule;
    GraphPtr g = ex.level(ex.level_count());
    std::vector<double> values(schedule.size());
    std::vector<std::optional<PotentialField>> fields(schedule.size());
    int threads = config.threads > 0 ? config.threads : default_threads();
    parallel_for(schedule.size(), threads, [&](std::size_t i) {
        NodeSet fn = F.at(schedule[i]), gn = G.at(schedule[i]);
        if (fn.empty() || gn.empty())
            throw PreconditionError("chain sets must be nonempty");
        auto r = capacity(g, fn, gn, p, config.solver);
        values[i] = r.value;
        if (keep_fields)
            fields[i].emplace(std::move(r.witness));
    });
    if (keep_fields)
        for (auto& f : fields)
            out.fields.push_back(std::move(*f));
    out.indices = schedule;
    out.pair_values = values;
    std::vector<double> idx(schedule.begin(), schedule.end());
    out.pair_analysis = analyze_sequence(idx, values, p, config.thresholds);

    // Truncation only removes curves, so the computed b_n underestimate the
    // untruncated ones; a positive limit estimate is therefore conservative.
    if (out.pair_analysis.verdict == Verdict::hyperbolic) {
        out.conclusive = true;
        out.f_verdict = out.g_verdict = Verdict::hyperbolic;
        out.notes.push_back("lim cap(F_n, G_n) estimated at " + std::to_string(out.pair_analysis.limit) + " >= delta_hyp; both chains hyperbolic");
    } else {
        out.notes.push_back("cap(F_n, G_n) not bounded away from zero; no conclusion");
    }
    if (cross_check) {
        out.f_direct = is_hyperbolic_sequence(F, p, config);
        out.g_direct = is_hyperbolic_sequence(G, p, config);
        if (out.conclusive) {
            for (const auto* d : { &*out.f_direct, &*out.g_direct })
                if (d->verdict == Verdict::parabolic)
                    out.cross_check_consistent = false;
        }
        if (!out.cross_check_consistent)
            out.notes.push_back("direct classification contradicts the pair argument");
    }
    return out;
}

BaseIndependenceReport capacity_base_independence(const Chain& chain, const NodeSet& K1, const NodeSet& K2, double p, const ClassifyConfig& config)
{
    if (K1.empty() || K2.empty())
        throw InputError("base sets must be nonempty");
    chain.exhaustion()->universe().check_nodes(K1);
    chain.exhaustion()->universe().check_nodes(K2);
    std::vector<int> schedule;
    for (int n : resolve_schedule(chain, config)) {
        NodeSet F = chain.at(n);
        if (!F.intersects(K1) && !F.intersects(K2))
            schedule.push_back(n);
    }
    if (schedule.empty())
        throw PreconditionError("both base sets must avoid some F_n of chain '" + chain.label() + "'");
    ClassifyConfig c1 = config, c2 = config;
    c1.schedule = c2.schedule = schedule;
    c1.base = K1;
    c2.base = K2;
    BaseIndependenceReport out{ classify(chain, p, c1), classify(chain, p, c2), false, std::nullopt };
    auto zero_class = [](Verdict v) { return v == Verdict::parabolic; };
    out.agree = out.first.verdict != Verdict::inconclusive && out.second.verdict != Verdict::inconclusive && zero_class(out.first.verdict) == zero_class(out.second.verdict);
    const HyperbolicityVerdict* small = nullptr;
    const HyperbolicityVerdict* large = nullptr;
    if (K1.subset_of(K2)) {
        small = &out.first;
        large = &out.second;
    } else if (K2.subset_of(K1)) {
        small = &out.second;
        large = &out.first;
    }
    if (small) {
        bool ok = true;
        for (std::size_t i = 0; i < small->points.size(); ++i) {
            double a = small->points[i].value, b = large->points[i].value;
            if (a > b * (1.0 + 1e-6) + 10.0 * config.solver.tol)
                ok = false;
        }
        out.inclusion_monotone = ok;
    }
    return out;
}

ParabolicityWitness parabolicity_witness(const ExhaustionPtr& ex, const NodeSet& K, const std::vector<int>& levels, double p, const ClassifyConfig& config)
{
    check_exponent(p);
    if (K.empty())
        throw InputError("witness base set is empty");
    ex->universe().check_nodes(K);
    Chain space = Chain::space_complement(ex);
    ClassifyConfig c = config;
    c.base = K;
    c.schedule = levels.empty() ? resolve_schedule(space, config) : levels;
    auto evals = evaluate_schedule(space, c.schedule, p, K, c, true);
    ParabolicityWitness out;
    out.energy_lower_bound = std::numeric_limits<double>::infinity();
    for (auto& e : evals) {
        out.energy_lower_bound = std::min(out.energy_lower_bound, e.point.value);
        out.witnesses.push_back({ e.point.n, e.point.value, std::move(*e.field) });
        e.field.reset();
    }
    out.verdict = assemble(space, p, c, std::move(evals));
    return out;
}

} // namespace pmod
