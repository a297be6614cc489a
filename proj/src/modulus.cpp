#include "pmod/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <tuple>

namespace pmod {

double rho_length(const MetricGraph& g, const Density& d, const Path& path)
{
    double s = 0.0;
    for (EdgeId e : path.edges)
        s += d.rho[static_cast<std::size_t>(e)] * g.edge(e).len;
    return s;
}

double density_energy(const MetricGraph& g, const Density& d, double p)
{
    double s = 0.0;
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        if (d.rho[e] > 0.0)
            s += g.edges()[e].mu * std::pow(d.rho[e], p);
    return s;
}

ShortestPath shortest_rho_path(const MetricGraph& g, const Density& d, const NodeSet& E, const NodeSet& F)
{
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = g.node_count();
    std::vector<double> dist(n, inf);
    std::vector<int> hops(n, std::numeric_limits<int>::max());
    using Item = std::tuple<double, int, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (NodeId x : F) {
        dist[static_cast<std::size_t>(x)] = 0.0;
        hops[static_cast<std::size_t>(x)] = 0;
        heap.push({ 0.0, 0, x });
    }
    while (!heap.empty()) {
        auto [dx, hx, x] = heap.top();
        heap.pop();
        auto ix = static_cast<std::size_t>(x);
        if (dx > dist[ix] || (dx == dist[ix] && hx > hops[ix]))
            continue;
        for (const Incidence& inc : g.incident(x)) {
            auto iy = static_cast<std::size_t>(inc.node);
            double nd = dx + d.rho[static_cast<std::size_t>(inc.edge)] * g.edge(inc.edge).len;
            int nh = hx + 1;
            if (nd < dist[iy] || (nd == dist[iy] && nh < hops[iy])) {
                dist[iy] = nd;
                hops[iy] = nh;
                heap.push({ nd, nh, inc.node });
            }
        }
    }

    ShortestPath out{ inf, {} };
    NodeId start = -1;
    for (NodeId x : E) {
        auto ix = static_cast<std::size_t>(x);
        if (dist[ix] < out.length || (dist[ix] == out.length && start >= 0 && hops[ix] < hops[static_cast<std::size_t>(start)])) {
            out.length = dist[ix];
            start = x;
        }
    }
    if (start < 0 || !(out.length < inf))
        return out;

    // Greedy descent: smallest-id neighbour that continues some shortest,
    // fewest-hop path. Hops strictly decrease, so this terminates.
    const double slack = 1e-12 * std::max(out.length, 1e-300);
    NodeId x = start;
    out.path.nodes.push_back(x);
    while (!F.contains(x)) {
        auto ix = static_cast<std::size_t>(x);
        NodeId best = -1;
        EdgeId best_edge = -1;
        for (const Incidence& inc : g.incident(x)) {
            auto iy = static_cast<std::size_t>(inc.node);
            if (hops[iy] != hops[ix] - 1)
                continue;
            double through = dist[iy] + d.rho[static_cast<std::size_t>(inc.edge)] * g.edge(inc.edge).len;
            if (through <= dist[ix] + slack && (best < 0 || inc.node < best)) {
                best = inc.node;
                best_edge = inc.edge;
            }
        }
        if (best < 0) {
            // Rounding left no exact continuation; take the closest one.
            double bd = std::numeric_limits<double>::infinity();
            for (const Incidence& inc : g.incident(x)) {
                auto iy = static_cast<std::size_t>(inc.node);
                if (hops[iy] >= hops[ix])
                    continue;
                double through = dist[iy] + d.rho[static_cast<std::size_t>(inc.edge)] * g.edge(inc.edge).len;
                if (through < bd) {
                    bd = through;
                    best = inc.node;
                    best_edge = inc.edge;
                }
            }
        }
        out.path.edges.push_back(best_edge);
        out.path.nodes.push_back(best);
        x = best;
    }
    return out;
}

namespace {

// Restricted dual over a working set of paths:
//   D(λ) = Σ λ_γ − (p−1) Σ_e mu_e rho_e^p,
//   rho_e = (len_e f_e / (p mu_e))^{1/(p−1)},  f_e = Σ_{γ ∋ e} λ_γ.
class RestrictedDual
{
  public:
    RestrictedDual(const MetricGraph& g, double p)
      : g_(g)
      , p_(p)
      , q_(1.0 / (p - 1.0))
      , flow_(g.edge_count(), 0.0)
    {
        for (const Edge& e : g.edges()) {
            scale_.push_back(std::pow(e.len / (p * e.mu), q_));
            weight_.push_back(e.len * scale_.back());
        }
    }

    // Returns the index of the path, merging duplicates.
    std::size_t add(const Path& path, double lambda)
    {
        auto it = index_.find(path.edges);
        if (it != index_.end()) {
            set_lambda(it->second, lambda_[it->second] + lambda);
            return it->second;
        }
        index_.emplace(path.edges, paths_.size());
        paths_.push_back(path);
        lambda_.push_back(0.0);
        set_lambda(paths_.size() - 1, lambda);
        return paths_.size() - 1;
    }

    bool contains(const Path& path) const { return index_.count(path.edges) > 0; }

    double rho(std::size_t e) const { return flow_[e] > 0.0 ? scale_[e] * std::pow(flow_[e], q_) : 0.0; }

    Density density() const
    {
        Density d;
        d.rho.resize(flow_.size());
        for (std::size_t e = 0; e < flow_.size(); ++e)
            d.rho[e] = rho(e);
        return d;
    }

    double dual_value() const
    {
        double s = 0.0;
        for (double l : lambda_)
            s += l;
        double energy = 0.0;
        for (std::size_t e = 0; e < flow_.size(); ++e) {
            double r = rho(e);
            if (r > 0.0)
                energy += g_.edges()[e].mu * std::pow(r, p_);
        }
        return s - (p_ - 1.0) * energy;
    }

    double path_length(std::size_t k) const
    {
        double s = 0.0;
        for (EdgeId e : paths_[k].edges)
            s += weight_[static_cast<std::size_t>(e)] * std::pow(std::max(flow_[static_cast<std::size_t>(e)], 0.0), q_);
        return s;
    }

    // Largest KKT violation over the working set.
    double violation() const
    {
        double v = 0.0;
        for (std::size_t k = 0; k < paths_.size(); ++k) {
            double l = path_length(k);
            v = std::max(v, lambda_[k] > 0.0 ? std::abs(1.0 - l) : std::max(0.0, 1.0 - l));
        }
        return v;
    }

    // Exact maximization of D in λ_k: the path's rho-length is increasing in
    // λ_k, so solve length = 1 or clamp at 0.
    void update(std::size_t k)
    {
        const auto& edges = paths_[k].edges;
        other_.resize(edges.size());
        for (std::size_t i = 0; i < edges.size(); ++i)
            other_[i] = std::max(0.0, flow_[static_cast<std::size_t>(edges[i])] - lambda_[k]);
        auto len_at = [&](double t, double* deriv) {
            double s = 0.0, ds = 0.0;
            for (std::size_t i = 0; i < edges.size(); ++i) {
                double w = weight_[static_cast<std::size_t>(edges[i])];
                double f = other_[i] + t;
                if (f <= 0.0)
                    continue;
                double fq = std::pow(f, q_);
                s += w * fq;
                ds += w * q_ * fq / f;
            }
            if (deriv)
                *deriv = ds;
            return s;
        };
        if (len_at(0.0, nullptr) >= 1.0) {
            set_lambda(k, 0.0);
            return;
        }
        double lo = 0.0;
        double hi = std::max(lambda_[k], 1e-300);
        while (len_at(hi, nullptr) < 1.0)
            hi *= 2.0;
        double t = std::clamp(lambda_[k], lo, hi);
        for (int it = 0; it < 200; ++it) {
            double deriv = 0.0;
            double r = len_at(t, &deriv) - 1.0;
            if (r == 0.0)
                break;
            if (r > 0.0)
                hi = t;
            else
                lo = t;
            double next = deriv > 0.0 ? t - r / deriv : 0.5 * (lo + hi);
            if (!(next > lo && next < hi))
                next = 0.5 * (lo + hi);
            if (std::abs(next - t) <= 1e-15 * std::max(t, 1e-300) || hi - lo <= 1e-15 * hi) {
                t = next;
                break;
            }
            t = next;
        }
        set_lambda(k, t);
    }

    std::size_t size() const { return paths_.size(); }
    const Path& path(std::size_t k) const { return paths_[k]; }
    double lambda(std::size_t k) const { return lambda_[k]; }

  private:
    void set_lambda(std::size_t k, double value)
    {
        double delta = value - lambda_[k];
        for (EdgeId e : paths_[k].edges) {
            double& f = flow_[static_cast<std::size_t>(e)];
            f += delta;
            if (f < 1e-300 * std::abs(delta))
                f = std::max(f, 0.0);
        }
        lambda_[k] = value;
    }

    const MetricGraph& g_;
    double p_;
    double q_;
    std::vector<double> flow_;
    std::vector<double> scale_;
    std::vector<double> weight_;
    std::vector<Path> paths_;
    std::vector<double> lambda_;
    std::map<std::vector<EdgeId>, std::size_t> index_;
    std::vector<double> other_;
};

// Flux p mu g^{p-1}/len of the capacity potential, split into paths along
// strictly decreasing potential.
void seed_from_capacity(const MetricGraph& g, const NodeSet& E, const NodeSet& F, const PotentialField& u, double p, RestrictedDual& dual)
{
    const std::size_t m = g.edge_count();
    std::vector<double> remaining(m, 0.0);
    double total = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
        const Edge& ed = g.edges()[e];
        double grad = std::abs(u[ed.u] - u[ed.v]) / ed.len;
        remaining[e] = p * ed.mu * std::pow(grad, p - 1.0) / ed.len;
        total += remaining[e];
    }
    const double thresh = 1e-12 * std::max(total, 1e-300);
    auto downhill = [&](NodeId x, const Incidence& inc) {
        return u[inc.node] < u[x] && remaining[static_cast<std::size_t>(inc.edge)] > thresh;
    };
    const std::size_t cap = 20 * m + 100;
    std::size_t added = 0;
    for (NodeId s : E) {
        while (added < cap) {
            Path path;
            path.nodes.push_back(s);
            NodeId x = s;
            bool dead = false;
            while (!F.contains(x)) {
                const Incidence* best = nullptr;
                for (const Incidence& inc : g.incident(x))
                    if (downhill(x, inc) && (!best || remaining[static_cast<std::size_t>(inc.edge)] > remaining[static_cast<std::size_t>(best->edge)]))
                        best = &inc;
                if (!best) {
                    dead = true;
                    break;
                }
                path.edges.push_back(best->edge);
                path.nodes.push_back(best->node);
                x = best->node;
            }
            if (path.edges.empty())
                break;
            double amount = std::numeric_limits<double>::infinity();
            for (EdgeId e : path.edges)
                amount = std::min(amount, remaining[static_cast<std::size_t>(e)]);
            for (EdgeId e : path.edges)
                remaining[static_cast<std::size_t>(e)] -= amount;
            if (!dead) {
                dual.add(path, amount);
                ++added;
            }
        }
    }
}

bool reachable(const MetricGraph& g, const NodeSet& E, const NodeSet& F)
{
    auto dist = distances_from(g, E);
    for (NodeId x : F)
        if (std::isfinite(dist[static_cast<std::size_t>(x)]))
            return true;
    return false;
}

} // namespace

ModulusResult modulus_connect(GraphPtr gp, const NodeSet& E, const NodeSet& F, double p, const ModulusOptions& options)
{
    if (!gp)
        throw InputError("modulus without a graph");
    check_exponent(p);
    if (!(options.tol > 0.0))
        throw InputError("modulus tolerance must be positive");
    const MetricGraph& g = *gp;
    if (E.empty() || F.empty())
        throw InputError("modulus needs nonempty E and F");
    g.check_nodes(E);
    g.check_nodes(F);
    if (E.intersects(F))
        throw InputError("modulus sets E and F overlap");

    ModulusResult out;
    out.density.rho.assign(g.edge_count(), 0.0);
    if (!reachable(g, E, F)) {
        out.converged = true;
        out.shortest_length = std::numeric_limits<double>::infinity();
        return out;
    }

    RestrictedDual dual(g, p);
    if (options.warm_start) {
        SolverOptions so = options.solver;
        so.tol = std::min(so.tol, 1e-10);
        auto cap = capacity(gp, E, F, p, so);
        seed_from_capacity(g, E, F, cap.witness, p, dual);
    }

    double inner_tol = 0.1 * options.tol;
    for (int round = 1; round <= options.max_rounds; ++round) {
        out.rounds = round;
        for (int sweep = 0; sweep < options.max_inner_sweeps && dual.size() > 0; ++sweep) {
            if (dual.violation() <= inner_tol)
                break;
            for (std::size_t k = 0; k < dual.size(); ++k)
                dual.update(k);
        }
        Density rho = dual.density();
        ShortestPath sp = shortest_rho_path(g, rho, E, F);
        double lower = dual.size() > 0 ? dual.dual_value() : 0.0;
        double upper = std::numeric_limits<double>::infinity();
        if (sp.length > 0.0)
            upper = density_energy(g, rho, p) / std::pow(sp.length, p);
        out.shortest_length = sp.length;
        out.lower_bound = std::max(lower, 0.0);
        double gap = std::isfinite(upper) ? (upper - out.lower_bound) / std::max(upper, 1e-300) : 1.0;
        if (std::isfinite(upper)) {
            out.value = upper;
            out.relative_gap = gap;
            out.density = rho;
            for (double& r : out.density.rho)
                r /= sp.length;
        }
        if (sp.length >= 1.0 - options.tol && gap <= options.tol) {
            out.converged = true;
            break;
        }
        if (sp.length < 1.0 - inner_tol && !dual.contains(sp.path))
            dual.add(sp.path, 0.0);
        else if (inner_tol > 1e-15)
            inner_tol *= 0.1;
        else
            break;
    }
    for (std::size_t k = 0; k < dual.size(); ++k) {
        if (dual.lambda(k) > 0.0) {
            out.active_paths.push_back(dual.path(k));
            out.multipliers.push_back(dual.lambda(k));
        }
    }
    return out;
}

ModulusResult modulus_traverse(const Exhaustion& ex, const NodeSet& base, const Chain& chain, int depth, double p, const ModulusOptions& options)
{
    auto check = check_chain(chain, depth);
    if (!check.nested || !check.nonempty)
        throw PreconditionError("chain '" + chain.label() + "' is not nested and nonempty up to depth " + std::to_string(depth));
    return modulus_connect(ex.universe_ptr(), base, chain.at(depth), p, options);
}

DualityReport verify_mod_eq_cap(GraphPtr g, const NodeSet& E, const NodeSet& F, double p, const ModulusOptions& options)
{
    ModulusResult mod = modulus_connect(g, E, F, p, options);
    CapacityResult cap = capacity(g, E, F, p, options.solver);
    Density grad{ cap.witness.gradients() };
    ShortestPath sp = shortest_rho_path(*g, grad, E, F);
    double gap = 0.0;
    for (std::size_t e = 0; e < grad.rho.size(); ++e)
        gap = std::max(gap, std::abs(grad.rho[e] - mod.density.rho[e]));
    double rel = std::abs(mod.value - cap.value) / std::max(cap.value, 1e-300);
    return { mod.value, mod.lower_bound, cap.value, rel, sp.length, sp.length >= 1.0 - options.tol, gap, std::move(mod), std::move(cap) };
}

void write_density_csv(std::ostream& out, const MetricGraph& g, const Density& d)
{
    out << "u,v,rho\n";
    out.precision(17);
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        out << g.edges()[e].u << ',' << g.edges()[e].v << ',' << d.rho[e] << '\n';
}

void write_paths(std::ostream& out, const std::vector<Path>& paths)
{
    for (const Path& path : paths) {
        for (std::size_t i = 0; i < path.nodes.size(); ++i)
            out << (i ? " " : "") << path.nodes[i];
        out << '\n';
    }
}

} // namespace pmod
