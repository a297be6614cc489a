#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct E
{
    int u, v;
    double len, mu;
};

// Floyd-Warshall all-pairs distances.
inline std::vector<std::vector<double>> all_pairs(int n, const std::vector<E>& edges)
{
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> d(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), inf));
    for (int i = 0; i < n; ++i)
        d[i][i] = 0.0;
    for (const auto& e : edges) {
        d[e.u][e.v] = std::min(d[e.u][e.v], e.len);
        d[e.v][e.u] = std::min(d[e.v][e.u], e.len);
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

// Components of the graph with `removed` deleted, by repeated flood fill.
inline std::vector<std::set<int>> flood_components(int n, const std::vector<E>& edges, const std::set<int>& removed)
{
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& e : edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<int> label(static_cast<std::size_t>(n), -1);
    std::vector<std::set<int>> out;
    for (int s = 0; s < n; ++s) {
        if (removed.count(s) || label[s] >= 0)
            continue;
        std::set<int> comp;
        std::vector<int> stack{ s };
        label[s] = static_cast<int>(out.size());
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            comp.insert(x);
            for (int y : adj[x])
                if (!removed.count(y) && label[y] < 0) {
                    label[y] = label[s];
                    stack.push_back(y);
                }
        }
        out.push_back(comp);
    }
    return out;
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c]))
                piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k)
                a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k)
            s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

// p = 2 Dirichlet problem as a dense linear system (weighted graph Laplacian).
inline std::vector<double> harmonic_p2(int n, const std::vector<E>& edges, const std::map<int, double>& boundary)
{
    std::vector<int> idx(static_cast<std::size_t>(n), -1);
    int m = 0;
    for (int i = 0; i < n; ++i)
        if (!boundary.count(i))
            idx[i] = m++;
    std::vector<std::vector<double>> a(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m), 0.0));
    std::vector<double> rhs(static_cast<std::size_t>(m), 0.0);
    for (const auto& e : edges) {
        double w = e.mu / (e.len * e.len);
        for (auto [x, y] : { std::pair{ e.u, e.v }, std::pair{ e.v, e.u } }) {
            if (idx[x] < 0)
                continue;
            a[idx[x]][idx[x]] += w;
            if (idx[y] >= 0)
                a[idx[x]][idx[y]] -= w;
            else
                rhs[idx[x]] += w * boundary.at(y);
        }
    }
    auto sol = gauss_solve(a, rhs);
    std::vector<double> u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        u[i] = idx[i] < 0 ? boundary.at(i) : sol[idx[i]];
    return u;
}

inline double energy(const std::vector<E>& edges, const std::vector<double>& u, double p)
{
    double s = 0.0;
    for (const auto& e : edges)
        s += e.mu * std::pow(std::abs(u[e.u] - u[e.v]) / e.len, p);
    return s;
}

// Capacity of a series chain of edges: (Σ (len^p / mu)^{1/(p-1)})^{1-p}.
inline double series_capacity(const std::vector<std::pair<double, double>>& len_mu, double p)
{
    double s = 0.0;
    for (auto [len, mu] : len_mu)
        s += std::pow(std::pow(len, p) / mu, 1.0 / (p - 1.0));
    return std::pow(s, 1.0 - p);
}

// Brute-force 1D minimization by dense grid then golden refinement.
inline double argmin_1d(const std::function<double(double)>& f, double lo, double hi)
{
    int best = 0;
    const int n = 2000;
    double bv = f(lo);
    for (int i = 1; i <= n; ++i) {
        double v = f(lo + (hi - lo) * i / n);
        if (v < bv) {
            bv = v;
            best = i;
        }
    }
    double a = lo + (hi - lo) * std::max(0, best - 1) / n;
    double b = lo + (hi - lo) * std::min(n, best + 1) / n;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
        double c = b - r * (b - a), d = a + r * (b - a);
        if (f(c) < f(d))
            b = d;
        else
            a = c;
    }
    return 0.5 * (a + b);
}

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n)
{
    if (n % 2)
        ++n;
    double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// All simple paths from any node of `from` to any node of `to` (small graphs).
inline std::vector<std::vector<int>> simple_paths(int n, const std::vector<E>& edges, const std::set<int>& from, const std::set<int>& to)
{
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
    for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
        adj[edges[i].u].push_back({ edges[i].v, i });
        adj[edges[i].v].push_back({ edges[i].u, i });
    }
    std::vector<std::vector<int>> out;
    std::vector<int> path;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::function<void(int)> go = [&](int x) {
        if (to.count(x)) {
            out.push_back(path);
            return;
        }
        for (auto [y, e] : adj[x]) {
            if (seen[y] || from.count(y))
                continue;
            seen[y] = 1;
            path.push_back(e);
            go(y);
            path.pop_back();
            seen[y] = 0;
        }
    };
    for (int s : from) {
        seen[s] = 1;
        go(s);
        seen[s] = 0;
    }
    return out;
}

} // namespace oracle
