#include "pmod/energy.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace pmod {

void check_exponent(double p)
{
    if (!(p > 1.0) || !std::isfinite(p))
        throw InputError("exponent p must satisfy 1 < p < inf");
}

// --------------------------------------------------------- PotentialField

PotentialField::PotentialField(GraphPtr graph, std::vector<double> values)
  : graph_(std::move(graph))
  , values_(std::move(values))
{
    if (!graph_)
        throw InputError("potential without a graph");
    if (values_.size() != graph_->node_count())
        throw InputError("potential size does not match the graph");
}

double PotentialField::gradient(EdgeId e) const
{
    const Edge& ed = graph_->edge(e);
    return std::abs(values_[static_cast<std::size_t>(ed.u)] - values_[static_cast<std::size_t>(ed.v)]) / ed.len;
}

std::vector<double> PotentialField::gradients() const
{
    std::vector<double> out(graph_->edge_count());
    for (std::size_t e = 0; e < out.size(); ++e)
        out[e] = gradient(static_cast<EdgeId>(e));
    return out;
}

double PotentialField::min() const
{
    return *std::min_element(values_.begin(), values_.end());
}

double PotentialField::max() const
{
    return *std::max_element(values_.begin(), values_.end());
}

double PotentialField::oscillation(const NodeSet& s) const
{
    if (s.empty())
        return 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (NodeId x : s) {
        lo = std::min(lo, (*this)[x]);
        hi = std::max(hi, (*this)[x]);
    }
    return hi - lo;
}

double p_energy(const MetricGraph& g, std::span<const double> u, double p)
{
    check_exponent(p);
    if (u.size() != g.node_count())
        throw InputError("potential size does not match the graph");
    double total = 0.0;
    for (const Edge& e : g.edges()) {
        double grad = std::abs(u[static_cast<std::size_t>(e.u)] - u[static_cast<std::size_t>(e.v)]) / e.len;
        total += e.mu * std::pow(grad, p);
    }
    return total;
}

double p_energy(const PotentialField& field, double p)
{
    return p_energy(field.graph(), field.values(), p);
}

std::vector<BoundaryValue> condenser_boundary(const NodeSet& E, const NodeSet& F)
{
    std::vector<BoundaryValue> out;
    out.reserve(E.size() + F.size());
    for (NodeId x : E)
        out.push_back({ x, 1.0 });
    for (NodeId x : F)
        out.push_back({ x, 0.0 });
    return out;
}

// ----------------------------------------------------------------- solver

namespace {

// Energy Σ c_e |u_a - u_b|^p with c_e = mu_e / len_e^p.
class EnergyModel
{
  public:
    EnergyModel(const MetricGraph& g, double p)
      : g_(g)
      , p_(p)
      , quadratic_(p == 2.0)
    {
        coef_.reserve(g.edge_count());
        for (const Edge& e : g.edges())
            coef_.push_back(e.mu / std::pow(e.len, p));
    }

    double energy(std::span<const double> u) const
    {
        double total = 0.0;
        const auto& edges = g_.edges();
        for (std::size_t i = 0; i < edges.size(); ++i) {
            double d = std::abs(u[static_cast<std::size_t>(edges[i].u)] - u[static_cast<std::size_t>(edges[i].v)]);
            total += coef_[i] * power(d, p_);
        }
        return total;
    }

    // d/dt of the node's one-dimensional restriction at t.
    double slope(std::span<const double> u, NodeId x, double t) const
    {
        double s = 0.0;
        for (const Incidence& inc : g_.incident(x)) {
            double d = t - u[static_cast<std::size_t>(inc.node)];
            double c = coef_[static_cast<std::size_t>(inc.edge)];
            if (quadratic_)
                s += 2.0 * c * d;
            else if (d != 0.0)
                s += p_ * c * std::copysign(std::pow(std::abs(d), p_ - 1.0), d);
        }
        return s;
    }

    double curvature(std::span<const double> u, NodeId x, double t) const
    {
        double s = 0.0;
        for (const Incidence& inc : g_.incident(x)) {
            double d = std::abs(t - u[static_cast<std::size_t>(inc.node)]);
            double c = coef_[static_cast<std::size_t>(inc.edge)];
            if (quadratic_)
                s += 2.0 * c;
            else if (d == 0.0)
                return p_ < 2.0 ? std::numeric_limits<double>::infinity() : s;
            else
                s += p_ * (p_ - 1.0) * c * std::pow(d, p_ - 2.0);
        }
        return s;
    }

    // Exact minimizer of the node's convex restriction, bracketed by the
    // neighbour values: safeguarded Newton with bisection fallback.
    double minimize_node(std::span<const double> u, NodeId x) const
    {
        auto inc = g_.incident(x);
        if (inc.empty())
            return u[static_cast<std::size_t>(x)];
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const Incidence& i : inc) {
            lo = std::min(lo, u[static_cast<std::size_t>(i.node)]);
            hi = std::max(hi, u[static_cast<std::size_t>(i.node)]);
        }
        if (!(hi > lo))
            return lo;
        double t = std::clamp(u[static_cast<std::size_t>(x)], lo, hi);
        double f = slope(u, x, t);
        if (f == 0.0)
            return t;
        if (quadratic_) {
            double c = curvature(u, x, t);
            return std::clamp(t - f / c, lo, hi);
        }
        double a = lo, b = hi;
        if (f > 0.0)
            b = t;
        else
            a = t;
        double best = t, best_abs = std::abs(f);
        double last_step = b - a;
        for (int it = 0; it < 200; ++it) {
            if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max({ std::abs(a), std::abs(b), 1e-300 }))
                break;
            double curv = curvature(u, x, t);
            double next = std::numeric_limits<double>::quiet_NaN();
            if (std::isfinite(curv) && curv > 0.0)
                next = t - f / curv;
            if (!(next > a && next < b) || std::abs(next - t) > 0.5 * last_step)
                next = 0.5 * (a + b);
            last_step = std::abs(next - t);
            if (next == t)
                break;
            t = next;
            f = slope(u, x, t);
            if (std::abs(f) < best_abs) {
                best_abs = std::abs(f);
                best = t;
            }
            if (f == 0.0)
                break;
            if (f > 0.0)
                b = t;
            else
                a = t;
        }
        return best;
    }

    double hessian_weight(std::size_t e, double d, double delta) const
    {
        double c = coef_[e];
        if (quadratic_)
            return 2.0 * c;
        d = std::abs(d);
        if (p_ < 2.0)
            return p_ * (p_ - 1.0) * c * std::pow(std::max(d, delta), p_ - 2.0);
        return p_ * (p_ - 1.0) * c * std::pow(d * d + delta * delta, 0.5 * (p_ - 2.0));
    }

    const MetricGraph& graph() const { return g_; }
    double p() const { return p_; }

  private:
    static double power(double d, double p)
    {
        if (p == 2.0)
            return d * d;
        return std::pow(d, p);
    }

    const MetricGraph& g_;
    double p_;
    bool quadratic_;
    std::vector<double> coef_;
};

// Smallest |slope| of a node's 1D restriction over the few-ulp rounding
// neighbourhood of its value. For p < 2 the slope varies like |d|^{p-1}, so
// the slope at the stored value alone cannot fall below about eps^{p-1}.
double node_residual(const EnergyModel& model, std::span<const double> u, NodeId x)
{
    const double t = u[static_cast<std::size_t>(x)];
    const double s = model.slope(u, x, t);
    if (s == 0.0)
        return 0.0;
    double span = 0.0;
    for (const Incidence& inc : model.graph().incident(x))
        span = std::max(span, std::abs(u[static_cast<std::size_t>(inc.node)]));
    const double eta = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), span);
    if (s > 0.0)
        return std::max(0.0, model.slope(u, x, t - eta));
    return std::max(0.0, -model.slope(u, x, t + eta));
}

double residual_of(const EnergyModel& model, std::span<const double> u, const std::vector<NodeId>& free_nodes)
{
    double r = 0.0;
    for (NodeId x : free_nodes)
        r = std::max(r, node_residual(model, u, x));
    return r;
}

std::vector<double> interpolate_boundary(const MetricGraph& g, const std::vector<BoundaryValue>& boundary)
{
    std::vector<double> u(g.node_count(), 0.0);
    if (boundary.empty())
        return u;
    std::map<double, std::vector<NodeId>> groups;
    double mean = 0.0;
    for (const auto& b : boundary) {
        groups[b.value].push_back(b.node);
        mean += b.value;
    }
    mean /= static_cast<double>(boundary.size());
    const double inf = std::numeric_limits<double>::infinity();
    if (groups.size() <= 8) {
        // Inverse-distance blend of the value groups.
        std::vector<double> num(g.node_count(), 0.0), den(g.node_count(), 0.0);
        for (const auto& [value, nodes] : groups) {
            auto dist = distances_from(g, NodeSet(nodes));
            for (std::size_t x = 0; x < dist.size(); ++x) {
                if (!(dist[x] < inf))
                    continue;
                double w = dist[x] > 0.0 ? 1.0 / dist[x] : 0.0;
                num[x] += w * value;
                den[x] += w;
            }
        }
        for (std::size_t x = 0; x < u.size(); ++x)
            u[x] = den[x] > 0.0 ? num[x] / den[x] : mean;
    } else {
        // Value of the nearest boundary node.
        std::vector<double> dist(g.node_count(), inf);
        std::vector<double> val(g.node_count(), mean);
        using Item = std::pair<double, NodeId>;
        std::vector<Item> heap;
        for (const auto& b : boundary) {
            dist[static_cast<std::size_t>(b.node)] = 0.0;
            val[static_cast<std::size_t>(b.node)] = b.value;
            heap.push_back({ 0.0, b.node });
        }
        std::make_heap(heap.begin(), heap.end(), std::greater<>());
        while (!heap.empty()) {
            std::pop_heap(heap.begin(), heap.end(), std::greater<>());
            auto [d, x] = heap.back();
            heap.pop_back();
            if (d > dist[static_cast<std::size_t>(x)])
                continue;
            for (const Incidence& inc : g.incident(x)) {
                double nd = d + g.edge(inc.edge).len;
                auto y = static_cast<std::size_t>(inc.node);
                if (nd < dist[y]) {
                    dist[y] = nd;
                    val[y] = val[static_cast<std::size_t>(x)];
                    heap.push_back({ nd, inc.node });
                    std::push_heap(heap.begin(), heap.end(), std::greater<>());
                }
            }
        }
        u = std::move(val);
    }
    for (const auto& b : boundary)
        u[static_cast<std::size_t>(b.node)] = b.value;
    return u;
}

class NewtonAccelerator
{
  public:
    NewtonAccelerator(const EnergyModel& model, const std::vector<char>& fixed, double delta)
      : model_(model)
      , fixed_(fixed)
      , delta_(delta)
    {
        const MetricGraph& g = model.graph();
        index_.assign(g.node_count(), -1);
        for (std::size_t x = 0; x < g.node_count(); ++x) {
            if (!fixed_[x]) {
                index_[x] = static_cast<int>(free_.size());
                free_.push_back(static_cast<NodeId>(x));
            }
        }
        assemble(std::vector<double>(g.node_count(), 0.0));
        solver_.analyzePattern(hessian_);
    }

    // One damped step; returns false when no descent was possible.
    bool step(std::vector<double>& u, double lo, double hi, double& energy, double& moved)
    {
        assemble(u);
        solver_.factorize(hessian_);
        if (solver_.info() != Eigen::Success)
            return false;
        Eigen::VectorXd grad(static_cast<Eigen::Index>(free_.size()));
        for (std::size_t i = 0; i < free_.size(); ++i)
            grad[static_cast<Eigen::Index>(i)] = model_.slope(u, free_[i], u[static_cast<std::size_t>(free_[i])]);
        Eigen::VectorXd dir = -solver_.solve(grad);
        if (solver_.info() != Eigen::Success || !dir.allFinite())
            return false;
        double directional = grad.dot(dir);
        if (!(directional < 0.0))
            return false;
        std::vector<double> trial = u;
        // Near the minimum the energy decrease drops below rounding; the
        // step is then judged by the stationarity residual instead.
        const double resolution = 1e-13 * std::abs(energy);
        const double residual = grad.lpNorm<Eigen::Infinity>();
        double t = 1.0;
        for (int k = 0; k < 60; ++k) {
            for (std::size_t i = 0; i < free_.size(); ++i) {
                auto x = static_cast<std::size_t>(free_[i]);
                trial[x] = std::clamp(u[x] + t * dir[static_cast<Eigen::Index>(i)], lo, hi);
            }
            double e = model_.energy(trial);
            bool accept = e <= energy + 1e-4 * t * directional;
            if (-directional * t < resolution && std::abs(e - energy) <= resolution) {
                double r = 0.0;
                for (NodeId x : free_)
                    r = std::max(r, std::abs(model_.slope(trial, x, trial[static_cast<std::size_t>(x)])));
                accept = r < 0.5 * residual;
            }
            if (accept) {
                moved = 0.0;
                for (NodeId x : free_)
                    moved = std::max(moved, std::abs(trial[static_cast<std::size_t>(x)] - u[static_cast<std::size_t>(x)]));
                u.swap(trial);
                energy = e;
                return true;
            }
            t *= 0.5;
        }
        return false;
    }

  private:
    void assemble(const std::vector<double>& u)
    {
        const MetricGraph& g = model_.graph();
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(4 * g.edge_count() + free_.size());
        std::vector<double> diag(free_.size(), 0.0);
        const auto& edges = g.edges();
        for (std::size_t e = 0; e < edges.size(); ++e) {
            int a = index_[static_cast<std::size_t>(edges[e].u)];
            int b = index_[static_cast<std::size_t>(edges[e].v)];
            if (a < 0 && b < 0)
                continue;
            double w = model_.hessian_weight(e, u[static_cast<std::size_t>(edges[e].u)] - u[static_cast<std::size_t>(edges[e].v)], delta_);
            if (a >= 0)
                diag[static_cast<std::size_t>(a)] += w;
            if (b >= 0)
                diag[static_cast<std::size_t>(b)] += w;
            if (a >= 0 && b >= 0) {
                trips.emplace_back(a, b, -w);
                trips.emplace_back(b, a, -w);
            }
        }
        double top = 0.0;
        for (double d : diag)
            top = std::max(top, d);
        double shift = 1e-13 * (top > 0.0 ? top : 1.0);
        for (std::size_t i = 0; i < diag.size(); ++i)
            trips.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[i] + shift);
        hessian_.resize(static_cast<Eigen::Index>(free_.size()), static_cast<Eigen::Index>(free_.size()));
        hessian_.setFromTriplets(trips.begin(), trips.end());
    }

    const EnergyModel& model_;
    const std::vector<char>& fixed_;
    double delta_;
    std::vector<int> index_;
    std::vector<NodeId> free_;
    Eigen::SparseMatrix<double> hessian_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

} // namespace

double stationarity_residual(const MetricGraph& g, std::span<const double> u, const std::vector<char>& fixed, double p)
{
    check_exponent(p);
    EnergyModel model(g, p);
    double r = 0.0;
    for (std::size_t x = 0; x < g.node_count(); ++x)
        if (!fixed[x])
            r = std::max(r, node_residual(model, u, static_cast<NodeId>(x)));
    return r;
}

Solution solve_p_harmonic(const DirichletProblem& problem, const SolverOptions& options, const std::vector<double>* initial)
{
    if (!problem.graph)
        throw InputError("Dirichlet problem without a graph");
    check_exponent(problem.p);
    if (!(options.tol > 0.0))
        throw InputError("solver tolerance must be positive");
    const MetricGraph& g = *problem.graph;
    if (problem.boundary.empty() && !problem.free_problem)
        throw InputError("empty boundary: request the free problem explicitly (its minimizers are the constants)");
    if (!problem.boundary.empty() && problem.free_problem)
        throw InputError("free problem cannot carry boundary values");

    std::vector<char> fixed(g.node_count(), 0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& b : problem.boundary) {
        g.check_node(b.node);
        if (!std::isfinite(b.value))
            throw InputError("nonfinite boundary value at node " + std::to_string(b.node));
        if (fixed[static_cast<std::size_t>(b.node)])
            throw InputError("node " + std::to_string(b.node) + " has two boundary values");
        fixed[static_cast<std::size_t>(b.node)] = 1;
        lo = std::min(lo, b.value);
        hi = std::max(hi, b.value);
    }

    std::vector<double> u;
    if (initial) {
        if (initial->size() != g.node_count())
            throw InputError("initial field size does not match the graph");
        u = *initial;
        for (const auto& b : problem.boundary)
            u[static_cast<std::size_t>(b.node)] = b.value;
    } else {
        u = interpolate_boundary(g, problem.boundary);
    }
    for (double v : u)
        if (!std::isfinite(v))
            throw InputError("nonfinite initial value");
    if (problem.free_problem) {
        lo = *std::min_element(u.begin(), u.end());
        hi = *std::max_element(u.begin(), u.end());
    }
    for (double& v : u)
        v = std::clamp(v, lo, hi);

    std::vector<NodeId> free_nodes;
    for (std::size_t x = 0; x < g.node_count(); ++x)
        if (!fixed[x])
            free_nodes.push_back(static_cast<NodeId>(x));

    EnergyModel model(g, problem.p);
    SolveReport report;
    double energy = model.energy(u);
    double residual = residual_of(model, u, free_nodes);
    const double energy_floor = 1e-300 + 1e-30 * energy;
    int counter = 0;
    auto record = [&](double e, double r) {
        if (options.record_log)
            report.log.push_back({ counter, e, r });
    };
    record(energy, residual);

    if (free_nodes.empty()) {
        report.converged = true;
        report.energy = energy;
        return { PotentialField(problem.graph, std::move(u)), report };
    }

    const double scale = std::max(hi - lo, 1e-300);
    std::optional<NewtonAccelerator> newton;
    const bool use_newton = options.accelerate;
    // Newton is retried after this many plain sweeps if still unconverged.
    const int sweeps_per_cycle = 40;
    int sweeps_since_newton = sweeps_per_cycle;

    // Besides a small residual we ask for a small last update: for p > 2 the
    // residual alone can certify fields that are still far off in value on
    // nearly flat regions.
    const double step_tol = options.tol * scale;
    // tol^2 is below the rounding noise of the energy sum once tol < 1e-7.
    const double decrease_tol = std::max(options.tol * options.tol, 1e-14);
    double moved = std::numeric_limits<double>::infinity();
    while (true) {
        if (use_newton && sweeps_since_newton >= sweeps_per_cycle && (residual > options.tol || moved > step_tol)) {
            if (!newton)
                newton.emplace(model, fixed, 1e-9 * scale);
            double best = residual;
            int stalled = 0;
            for (int k = 0; k < options.max_newton; ++k) {
                double step = 0.0;
                if (!newton->step(u, lo, hi, energy, step))
                    break;
                ++report.newton_steps;
                ++counter;
                residual = residual_of(model, u, free_nodes);
                record(energy, residual);
                if (residual <= options.tol && step <= step_tol)
                    break;
                // Steps that no longer shrink the residual are left to the sweeps.
                stalled = residual < 0.9 * best ? 0 : stalled + 1;
                best = std::min(best, residual);
                if (stalled >= 5)
                    break;
            }
            sweeps_since_newton = 0;
        }

        double before = energy;
        moved = 0.0;
        for (NodeId x : free_nodes) {
            auto i = static_cast<std::size_t>(x);
            double v = model.minimize_node(u, x);
            moved = std::max(moved, std::abs(v - u[i]));
            u[i] = v;
        }
        ++report.sweeps;
        ++counter;
        ++sweeps_since_newton;
        energy = model.energy(u);
        residual = residual_of(model, u, free_nodes);
        record(energy, residual);
        report.relative_decrease = (before - energy) / std::max(before, energy_floor);
        if (residual <= options.tol && report.relative_decrease <= decrease_tol && moved <= step_tol) {
            report.converged = true;
            break;
        }
        if (report.sweeps >= options.max_sweeps)
            break;
    }
    report.energy = energy;
    report.residual = residual;
    return { PotentialField(problem.graph, std::move(u)), report };
}

CapacityResult capacity(GraphPtr g, const NodeSet& E, const NodeSet& F, double p, const SolverOptions& options)
{
    if (!g)
        throw InputError("capacity without a graph");
    check_exponent(p);
    if (E.empty() || F.empty())
        throw InputError("capacity needs nonempty E and F");
    g->check_nodes(E);
    g->check_nodes(F);
    if (E.intersects(F))
        throw InputError("capacity sets E and F overlap");
    DirichletProblem prob{ g, condenser_boundary(E, F), p, false };
    Solution sol = solve_p_harmonic(prob, options);
    double value = p_energy(sol.field, p);
    return { value, std::move(sol.field), std::move(sol.report) };
}

ExtensionResult harmonic_extension(const Exhaustion& ex,
                                   const std::vector<BoundaryValue>& prescribed,
                                   int level,
                                   double p,
                                   const SolverOptions& options,
                                   double inner_radius)
{
    check_exponent(p);
    std::size_t size = ex.level_size(level);
    for (const auto& b : prescribed) {
        ex.universe().check_node(b.node);
        if (static_cast<std::size_t>(b.node) >= size)
            throw InputError("prescribed node " + std::to_string(b.node) + " lies outside truncation " + std::to_string(level));
    }
    if (prescribed.empty())
        throw InputError("harmonic extension needs prescribed values");
    GraphPtr g = ex.level(level);
    Solution sol = solve_p_harmonic({ g, prescribed, p, false }, options);
    double energy = p_energy(sol.field, p);
    ExtensionResult out{ std::move(sol.field), energy, std::move(sol.report), std::nullopt, std::nullopt, std::nullopt };

    if (level > 1) {
        std::size_t prev_size = ex.level_size(level - 1);
        std::vector<BoundaryValue> restricted;
        for (const auto& b : prescribed)
            if (static_cast<std::size_t>(b.node) < prev_size)
                restricted.push_back(b);
        if (!restricted.empty()) {
            GraphPtr gp = ex.level(level - 1);
            Solution prev = solve_p_harmonic({ gp, restricted, p, false }, options);
            double pe = p_energy(prev.field, p);
            out.previous_energy = pe;
            out.energy_change = energy - pe;
            double sup = 0.0;
            for (NodeId x : ex.base_ball(inner_radius).prefix(prev_size))
                sup = std::max(sup, std::abs(out.field[x] - prev.field[x]));
            out.inner_sup_change = sup;
        }
    }
    return out;
}

} // namespace pmod
