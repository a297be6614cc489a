#pragma once

#include "oracles.hpp"
#include "pmod/core.hpp"

#include <memory>
#include <vector>

namespace testing_support {

inline std::vector<pmod::Edge> to_edges(const std::vector<oracle::E>& es)
{
    std::vector<pmod::Edge> out;
    for (const auto& e : es)
        out.push_back({ e.u, e.v, e.len, e.mu });
    return out;
}

inline pmod::GraphPtr make_graph(int n, const std::vector<oracle::E>& es)
{
    return std::make_shared<const pmod::MetricGraph>(static_cast<std::size_t>(n), to_edges(es));
}

inline std::vector<oracle::E> path_edges(int k, double len = 1.0, double mu = 1.0)
{
    std::vector<oracle::E> es;
    for (int i = 0; i < k; ++i)
        es.push_back({ i, i + 1, len, mu });
    return es;
}

// w x h unit grid, node id = y*w + x.
inline std::vector<oracle::E> grid_edges(int w, int h)
{
    std::vector<oracle::E> es;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int id = y * w + x;
            if (x + 1 < w)
                es.push_back({ id, id + 1, 1.0, 1.0 });
            if (y + 1 < h)
                es.push_back({ id, id + w, 1.0, 1.0 });
        }
    return es;
}

// Line graph on -m..m stored in level order 0, -1, 1, -2, 2, ...; levels
// are [-k, k] for k = 1..m.
struct Line
{
    pmod::ExhaustionPtr ex;
    int m;
    static pmod::NodeId id(int x) { return x == 0 ? 0 : (x > 0 ? 2 * x : -2 * x - 1); }
};

inline Line make_line(int m)
{
    std::vector<pmod::Edge> es;
    for (int x = -m; x < m; ++x)
        es.push_back({ Line::id(x), Line::id(x + 1), 1.0, 1.0 });
    auto g = std::make_shared<const pmod::MetricGraph>(static_cast<std::size_t>(2 * m + 1), es);
    std::vector<std::size_t> sizes;
    std::vector<double> radii;
    for (int k = 1; k <= m; ++k) {
        sizes.push_back(static_cast<std::size_t>(2 * k + 1));
        radii.push_back(k);
    }
    auto ex = std::make_shared<const pmod::Exhaustion>(g, sizes, radii, 0, pmod::NodeSet{ Line::id(-m), Line::id(m) });
    return { ex, m };
}

} // namespace testing_support
