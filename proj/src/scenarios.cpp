#include "pmod/scenarios.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

namespace pmod {

double ScenarioSpec::number(const std::string& key, double fallback) const
{
    auto it = numbers.find(key);
    return it == numbers.end() ? fallback : it->second;
}

std::string ScenarioSpec::option(const std::string& key, const std::string& fallback) const
{
    auto it = options.find(key);
    return it == options.end() ? fallback : it->second;
}

const Chain& Scenario::chain(const std::string& name) const
{
    auto it = chains.find(name);
    if (it == chains.end())
        throw InputError("scenario '" + spec.name + "' has no chain named '" + name + "'");
    return it->second;
}

std::vector<std::string> scenario_names()
{
    return { "weighted_line", "weighted_plane_sector", "halfplane_strip", "binary_tree", "grid_zn" };
}

double unit_ball_volume(int n)
{
    return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

namespace {

constexpr std::size_t max_nodes = 4'000'000;

int positive_int(const ScenarioSpec& spec, const std::string& key, double fallback, int lo, int hi)
{
    double v = spec.number(key, fallback);
    if (v != std::floor(v) || v < lo || v > hi)
        throw InputError("scenario parameter '" + key + "' must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

// Steps per unit length; the mesh must divide the unit.
int steps_per_unit(double h)
{
    if (!(h > 0.0) || !std::isfinite(h))
        throw InputError("mesh h must be positive");
    double s = 1.0 / h;
    double r = std::round(s);
    if (r < 1.0 || std::abs(s - r) > 1e-9 * s)
        throw InputError("mesh h must be 1/k for a positive integer k");
    return static_cast<int>(r);
}

using Point = std::array<double, 3>;

struct GridSpace
{
    int dim;
    double h;
    int depth;
    std::function<bool(const Point&)> inside;
    std::function<double(const Point&)> weight;
};

struct GridResult
{
    ExhaustionPtr ex;
    std::vector<Point> points; // by node id
};

GridResult build_grid(const GridSpace& sp)
{
    const int s = steps_per_unit(sp.h);
    const long K = static_cast<long>(sp.depth) * s;
    const long side = 2 * K + 1;
    std::size_t total = 1;
    for (int d = 0; d < sp.dim; ++d) {
        total *= static_cast<std::size_t>(side);
        if (total > max_nodes)
            throw InputError("scenario too large");
    }
    auto point_of = [&](const std::array<long, 3>& k) {
        Point x{ 0.0, 0.0, 0.0 };
        for (int d = 0; d < sp.dim; ++d)
            x[static_cast<std::size_t>(d)] = static_cast<double>(k[static_cast<std::size_t>(d)]) * sp.h;
        return x;
    };
    auto decode = [&](std::size_t flat) {
        std::array<long, 3> k{ 0, 0, 0 };
        for (int d = sp.dim - 1; d >= 0; --d) {
            k[static_cast<std::size_t>(d)] = static_cast<long>(flat % static_cast<std::size_t>(side)) - K;
            flat /= static_cast<std::size_t>(side);
        }
        return k;
    };
    auto encode = [&](const std::array<long, 3>& k) {
        std::size_t flat = 0;
        for (int d = 0; d < sp.dim; ++d)
            flat = flat * static_cast<std::size_t>(side) + static_cast<std::size_t>(k[static_cast<std::size_t>(d)] + K);
        return flat;
    };
    auto shell = [&](const std::array<long, 3>& k) {
        long mx = 0;
        for (int d = 0; d < sp.dim; ++d)
            mx = std::max(mx, std::labs(k[static_cast<std::size_t>(d)]));
        return std::max<long>(1, (mx + s - 1) / s);
    };

    // Flat (row-major) order is lexicographic; a stable sort by shell gives
    // the level ordering.
    std::vector<std::size_t> members;
    for (std::size_t f = 0; f < total; ++f)
        if (sp.inside(point_of(decode(f))))
            members.push_back(f);
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) { return shell(decode(a)) < shell(decode(b)); });

    std::vector<NodeId> id(total, -1);
    for (std::size_t i = 0; i < members.size(); ++i)
        id[members[i]] = static_cast<NodeId>(i);

    std::vector<Point> points(members.size());
    std::vector<double> w(members.size());
    std::vector<double> coords;
    coords.reserve(members.size() * static_cast<std::size_t>(sp.dim));
    for (std::size_t i = 0; i < members.size(); ++i) {
        points[i] = point_of(decode(members[i]));
        w[i] = sp.weight(points[i]);
        if (!(w[i] > 0.0) || !std::isfinite(w[i]))
            throw InputError("scenario weight must be positive and finite");
        for (int d = 0; d < sp.dim; ++d)
            coords.push_back(points[i][static_cast<std::size_t>(d)]);
    }

    const double cell = std::pow(sp.h, sp.dim);
    std::vector<Edge> edges;
    std::vector<NodeId> frontier;
    for (std::size_t i = 0; i < members.size(); ++i) {
        auto k = decode(members[i]);
        bool outer = false;
        for (int d = 0; d < sp.dim; ++d) {
            auto nk = k;
            nk[static_cast<std::size_t>(d)] += 1;
            if (nk[static_cast<std::size_t>(d)] <= K) {
                NodeId j = id[encode(nk)];
                if (j >= 0)
                    edges.push_back({ static_cast<NodeId>(i), j, sp.h, cell * 0.5 * (w[i] + w[static_cast<std::size_t>(j)]) });
            }
            for (long step : { -1L, 1L }) {
                auto out = k;
                out[static_cast<std::size_t>(d)] += step;
                if (std::labs(out[static_cast<std::size_t>(d)]) > K && sp.inside(point_of(out)))
                    outer = true;
            }
        }
        if (outer)
            frontier.push_back(static_cast<NodeId>(i));
    }

    std::vector<std::size_t> sizes(static_cast<std::size_t>(sp.depth), 0);
    for (std::size_t f : members)
        ++sizes[static_cast<std::size_t>(shell(decode(f)) - 1)];
    std::partial_sum(sizes.begin(), sizes.end(), sizes.begin());
    std::vector<double> radii(static_cast<std::size_t>(sp.depth));
    std::iota(radii.begin(), radii.end(), 1.0);

    NodeId origin = id[encode({ 0, 0, 0 })];
    if (origin < 0)
        throw InputError("scenario space does not contain the origin");
    auto g = std::make_shared<const MetricGraph>(members.size(), std::move(edges), std::move(coords), sp.dim);
    auto ex = std::make_shared<const Exhaustion>(g, std::move(sizes), std::move(radii), origin, NodeSet(std::move(frontier)));
    return { ex, std::move(points) };
}

// Chain of universe nodes satisfying pred(point, n).
Chain predicate_chain(const GridResult& grid, int length, std::function<bool(const Point&, int)> pred, std::string label)
{
    auto points = std::make_shared<const std::vector<Point>>(grid.points);
    auto gen = [points, pred](int n) {
        std::vector<NodeId> out;
        for (std::size_t i = 0; i < points->size(); ++i)
            if (pred((*points)[i], n))
                out.push_back(static_cast<NodeId>(i));
        return NodeSet(std::move(out));
    };
    return Chain(grid.ex, length, gen, Chain::Origin::user_supplied, std::move(label));
}

NodeId node_at(const GridResult& grid, const Point& x)
{
    for (std::size_t i = 0; i < grid.points.size(); ++i)
        if (std::abs(grid.points[i][0] - x[0]) < 1e-9 && std::abs(grid.points[i][1] - x[1]) < 1e-9 && std::abs(grid.points[i][2] - x[2]) < 1e-9)
            return static_cast<NodeId>(i);
    throw InputError("scenario has no node at the requested point");
}

Scenario weighted_line(const ScenarioSpec& spec)
{
    double alpha = spec.number("alpha", 2.0);
    double h = spec.number("h", 0.25);
    int depth = positive_int(spec, "depth", 8, 2, 100000);
    std::string form = spec.option("form", "example");
    if (!std::isfinite(alpha))
        throw InputError("alpha must be finite");
    std::function<double(const Point&)> w;
    if (form == "example")
        w = [alpha](const Point& x) { return x[0] <= -1.0 ? std::pow(std::abs(x[0]), alpha) : 1.0; };
    else if (form == "symmetric")
        w = [alpha](const Point& x) { return std::pow(1.0 + std::abs(x[0]), alpha); };
    else
        throw InputError("weighted_line form must be 'example' or 'symmetric'");
    GridResult grid = build_grid({ 1, h, depth, [](const Point&) { return true; }, w });
    Scenario sc{ spec, grid.ex, {}, {} };
    NodeId right = node_at(grid, { static_cast<double>(depth), 0, 0 });
    NodeId left = node_at(grid, { -static_cast<double>(depth), 0, 0 });
    sc.chains.emplace("end_pos", Chain::end_through(grid.ex, right, depth, "end_pos"));
    sc.chains.emplace("end_neg", Chain::end_through(grid.ex, left, depth, "end_neg"));
    sc.description = form == "example" ? "line with weight |x|^alpha for x <= -1 and 1 elsewhere" : "line with weight (1+|x|)^alpha";
    return sc;
}

double sector_weight(const Point& x)
{
    double d = (std::abs(x[1]) - std::abs(x[0])) / std::numbers::sqrt2;
    return std::exp(-std::max(d, 0.0));
}

bool in_sector(const Point& x)
{
    return std::abs(x[1]) <= std::abs(x[0]) + 1e-12;
}

Scenario weighted_plane(const ScenarioSpec& spec)
{
    double h = spec.number("h", 0.5);
    int depth = positive_int(spec, "depth", 32, 2, 4096);
    bool weighted = spec.number("weighted", 1.0) != 0.0;
    auto w = weighted ? std::function<double(const Point&)>(sector_weight) : [](const Point&) { return 1.0; };
    GridResult grid = build_grid({ 2, h, depth, [](const Point&) { return true; }, w });
    Scenario sc{ spec, grid.ex, {}, {} };
    int len = depth / 2;
    sc.chains.emplace("sector_right", predicate_chain(grid, len, [](const Point& x, int n) { return in_sector(x) && x[0] >= 2.0 * n - 1e-12; }, "sector_right"));
    sc.chains.emplace("sector_left", predicate_chain(grid, len, [](const Point& x, int n) { return in_sector(x) && x[0] <= -2.0 * n + 1e-12; }, "sector_left"));
    sc.description = weighted ? "plane with weight exp(-dist(x, {|x2| <= |x1|}))" : "unweighted plane";
    return sc;
}

Scenario halfplane_strip(const ScenarioSpec& spec)
{
    double h = spec.number("h", 0.5);
    int depth = positive_int(spec, "depth", 16, 2, 4096);
    auto inside = [](const Point& x) { return x[1] <= 1e-12 || std::abs(x[0]) <= 1.0 + 1e-12; };
    // Seam nodes (x2 = 0, |x1| <= 1) lie in both pieces; both formulas give 1.
    auto w = [](const Point& x) {
        double below = x[1] <= 1e-12 ? std::exp(-std::max((-x[1] - std::abs(x[0])) / std::numbers::sqrt2, 0.0)) : 0.0;
        double strip = (x[1] >= -1e-12 && std::abs(x[0]) <= 1.0 + 1e-12) ? 1.0 : 0.0;
        return std::max(below, strip);
    };
    GridResult grid = build_grid({ 2, h, depth, inside, w });
    Scenario sc{ spec, grid.ex, {}, {} };
    auto in_A = [](const Point& x) { return (x[1] <= 1e-12 && x[1] >= -std::abs(x[0]) - 1e-12) || (x[1] > 0 && std::abs(x[0]) <= 1.0 + 1e-12); };
    int len = depth / 2;
    sc.chains.emplace("sector_right", predicate_chain(grid, len, [in_A](const Point& x, int n) { return in_A(x) && x[0] >= 2.0 * n - 1e-12; }, "sector_right"));
    sc.chains.emplace("sector_left", predicate_chain(grid, len, [in_A](const Point& x, int n) { return in_A(x) && x[0] <= -2.0 * n + 1e-12; }, "sector_left"));
    NodeId top = node_at(grid, { 0.0, static_cast<double>(depth), 0 });
    sc.chains.emplace("strip", Chain::end_through(grid.ex, top, depth, "strip"));
    sc.description = "lower half-plane with the strip [-1,1] x (0, inf), weight exp(-dist(x, A))";
    return sc;
}

Scenario grid_zn(const ScenarioSpec& spec)
{
    int dim = positive_int(spec, "n", 2, 1, 3);
    double h = spec.number("h", 1.0);
    int depth = positive_int(spec, "depth", dim == 1 ? 64 : (dim == 2 ? 32 : 12), 2, 100000);
    GridResult grid = build_grid({ dim, h, depth, [](const Point&) { return true; }, [](const Point&) { return 1.0; } });
    Scenario sc{ spec, grid.ex, {}, {} };
    if (dim == 1) {
        NodeId right = node_at(grid, { static_cast<double>(depth), 0, 0 });
        NodeId left = node_at(grid, { -static_cast<double>(depth), 0, 0 });
        sc.chains.emplace("end_pos", Chain::end_through(grid.ex, right, depth, "end_pos"));
        sc.chains.emplace("end_neg", Chain::end_through(grid.ex, left, depth, "end_neg"));
    }
    sc.description = "unweighted integer grid in dimension " + std::to_string(dim);
    return sc;
}

Scenario binary_tree(const ScenarioSpec& spec)
{
    int depth = positive_int(spec, "depth", 12, 2, 22);
    if (spec.number("h", 1.0) != 1.0)
        throw InputError("binary_tree supports only unit edges (h = 1)");
    const std::size_t n = (std::size_t{ 1 } << (depth + 1)) - 1;
    auto depth_of = [](std::size_t i) { return static_cast<int>(std::bit_width(i + 1)) - 1; };
    auto on_ray = [](std::size_t i) { return ((i + 1) & i) == 0; }; // i = 2^k - 1
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t a = i;
        while (!on_ray(a))
            a = (a - 1) / 2;
        w[i] = std::ldexp(1.0, -depth_of(a));
    }
    std::vector<Edge> edges;
    for (std::size_t i = 1; i < n; ++i) {
        std::size_t parent = (i - 1) / 2;
        edges.push_back({ static_cast<NodeId>(parent), static_cast<NodeId>(i), 1.0, 0.5 * (w[parent] + w[i]) });
    }
    std::vector<std::size_t> sizes;
    std::vector<double> radii;
    for (int m = 1; m <= depth; ++m) {
        sizes.push_back((std::size_t{ 1 } << (m + 1)) - 1);
        radii.push_back(m);
    }
    std::vector<NodeId> leaves;
    for (std::size_t i = (std::size_t{ 1 } << depth) - 1; i < n; ++i)
        leaves.push_back(static_cast<NodeId>(i));
    auto g = std::make_shared<const MetricGraph>(n, std::move(edges));
    auto ex = std::make_shared<const Exhaustion>(g, std::move(sizes), std::move(radii), 0, NodeSet(std::move(leaves)));
    Scenario sc{ spec, ex, {}, {} };
    sc.chains.emplace("ray", Chain::end_through(ex, static_cast<NodeId>((std::size_t{ 1 } << depth) - 1), depth, "ray"));
    sc.chains.emplace("rightmost", Chain::end_through(ex, static_cast<NodeId>(n - 1), depth, "rightmost"));
    // Descendants of a child of the root at depth >= n: hyperbolic
    // sequences that are not ends.
    for (std::size_t child : { std::size_t{ 1 }, std::size_t{ 2 } }) {
        auto gen = [child, depth_of, n](int k) {
            std::vector<NodeId> out;
            for (std::size_t i = child; i < n; ++i) {
                int d = depth_of(i);
                if (d >= k && ((i + 1) >> (d - 1)) == child + 1)
                    out.push_back(static_cast<NodeId>(i));
            }
            return NodeSet(std::move(out));
        };
        std::string label = child == 1 ? "left_subtree" : "right_subtree";
        sc.chains.emplace(label, Chain(ex, depth, gen, Chain::Origin::user_supplied, label));
    }
    sc.description = "binary tree, weight 2^{-k} where k is the depth at which a vertex leaves the leftmost ray";
    return sc;
}

} // namespace

Scenario build_scenario(const ScenarioSpec& spec)
{
    if (spec.name == "weighted_line")
        return weighted_line(spec);
    if (spec.name == "weighted_plane_sector")
        return weighted_plane(spec);
    if (spec.name == "halfplane_strip")
        return halfplane_strip(spec);
    if (spec.name == "grid_zn")
        return grid_zn(spec);
    if (spec.name == "binary_tree")
        return binary_tree(spec);
    throw InputError("unknown scenario '" + spec.name + "'");
}

BumpEnergy bump_sum_energy(int n, double p, int J, double h)
{
    if (n < 1 || n > 3)
        throw InputError("bump dimension must be 1, 2 or 3");
    if (!(p > n))
        throw InputError("bump-sum energy requires p > n");
    if (J < -1 || J > 12)
        throw InputError("bump count J must lie in [-1, 12]");
    const int s = steps_per_unit(h);
    BumpEnergy out{ 0.0, 0.0, {}, {} };
    const double omega = unit_ball_volume(n);
    for (int j = 0; j <= J; ++j) {
        const double r = std::ldexp(1.0, j);
        // Bumps have disjoint interiors, so each is meshed around its own
        // centre 4^j e_1 (translation does not change its energy).
        const long half = static_cast<long>(std::llround(r * s)) + 1;
        const long side = 2 * half + 1;
        auto value = [&](const std::array<long, 3>& k) {
            double d2 = 0.0;
            for (int d = 0; d < n; ++d) {
                double x = static_cast<double>(k[static_cast<std::size_t>(d)]) * h;
                d2 += x * x;
            }
            return std::max(0.0, 1.0 - std::sqrt(d2) / r);
        };
        double e = 0.0;
        const double cell = std::pow(h, n);
        std::size_t total = 1;
        for (int d = 0; d < n; ++d)
            total *= static_cast<std::size_t>(side);
        if (total > max_nodes)
            throw InputError("bump grid too large; increase h or lower J");
        for (std::size_t f = 0; f < total; ++f) {
            std::array<long, 3> k{ 0, 0, 0 };
            std::size_t rest = f;
            for (int d = n - 1; d >= 0; --d) {
                k[static_cast<std::size_t>(d)] = static_cast<long>(rest % static_cast<std::size_t>(side)) - half;
                rest /= static_cast<std::size_t>(side);
            }
            double u = value(k);
            for (int d = 0; d < n; ++d) {
                if (k[static_cast<std::size_t>(d)] + 1 > half)
                    continue;
                auto nk = k;
                nk[static_cast<std::size_t>(d)] += 1;
                e += cell * std::pow(std::abs(value(nk) - u) / h, p);
            }
        }
        out.per_bump.push_back(e);
        out.per_bump_analytic.push_back(std::pow(2.0, j * (n - p)) * omega);
        out.discrete += e;
        out.analytic += out.per_bump_analytic.back();
    }
    return out;
}

} // namespace pmod
