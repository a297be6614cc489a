#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"
#include "oracles.hpp"
#include "pmod/core.hpp"

#include <cmath>
#include <set>

using namespace pmod;
using namespace testing_support;

TEST_CASE("graph validation")
{
    CHECK_THROWS_AS(MetricGraph(2, { { 0, 0, 1.0, 1.0 } }), InputError);
    CHECK_THROWS_AS(MetricGraph(2, { { 0, 1, 0.0, 1.0 } }), InputError);
    CHECK_THROWS_AS(MetricGraph(2, { { 0, 1, 1.0, -1.0 } }), InputError);
    CHECK_THROWS_AS(MetricGraph(2, { { 0, 1, 1.0, 1.0 }, { 1, 0, 2.0, 1.0 } }), InputError);
    CHECK_THROWS_AS(MetricGraph(3, { { 0, 1, 1.0, 1.0 } }), InputError);
    CHECK_THROWS_AS(MetricGraph(2, { { 0, 2, 1.0, 1.0 } }), InputError);
    CHECK_NOTHROW(MetricGraph(3, { { 0, 1, 1.0, 1.0 } }, {}, 0, false));
}

TEST_CASE("graph_distance")
{
    auto g = make_graph(3, path_edges(2));
    CHECK(graph_distance(*g, 0, 2) == doctest::Approx(2.0));
    CHECK(graph_distance(*g, 1, 1) == 0.0);
    CHECK_THROWS_AS(graph_distance(*g, 0, 7), InputError);

    std::vector<oracle::E> tri{ { 0, 1, 1.0, 1.0 }, { 1, 2, 1.0, 1.0 }, { 2, 0, 5.0, 1.0 } };
    auto t = make_graph(3, tri);
    auto d = oracle::all_pairs(3, tri);
    CHECK(graph_distance(*t, 0, 2) == doctest::Approx(d[0][2]));
    CHECK(graph_distance(*t, 2, 0) == doctest::Approx(2.0));
}

TEST_CASE("graph_distance is a metric on a grid")
{
    auto es = grid_edges(4, 3);
    es[3].len = 2.5;
    es[7].len = 0.25;
    auto g = make_graph(12, es);
    auto d = oracle::all_pairs(12, es);
    for (int a = 0; a < 12; ++a)
        for (int b = 0; b < 12; ++b) {
            CHECK(graph_distance(*g, a, b) == doctest::Approx(d[a][b]));
            CHECK(graph_distance(*g, a, b) == doctest::Approx(graph_distance(*g, b, a)));
            for (int c = 0; c < 12; c += 5)
                CHECK(graph_distance(*g, a, b) <= graph_distance(*g, a, c) + graph_distance(*g, c, b) + 1e-12);
        }
}

TEST_CASE("ball")
{
    auto g = make_graph(3, path_edges(2));
    CHECK(ball(*g, 0, 1.5) == NodeSet{ 0, 1 });
    CHECK(ball(*g, 0, 1.0) == NodeSet{ 0 });
    CHECK_THROWS_AS(ball(*g, 0, 0.0), InputError);
    CHECK_THROWS_AS(ball(*g, 0, -1.0), InputError);

    auto grid = make_graph(25, grid_edges(5, 5));
    CHECK(ball(*grid, 12, 1.1) == NodeSet{ 7, 11, 12, 13, 17 });

    for (double r1 : { 0.5, 1.0, 2.2, 3.0 })
        for (double r2 : { 1.0, 2.5, 4.0 })
            if (r1 <= r2)
                CHECK(ball(*grid, 6, r1).subset_of(ball(*grid, 6, r2)));
}

TEST_CASE("complement_components")
{
    auto g = make_graph(3, path_edges(2));
    auto cs = complement_components(*g, NodeSet{ 1 });
    REQUIRE(cs.size() == 2);
    CHECK(cs[0] == NodeSet{ 0 });
    CHECK(cs[1] == NodeSet{ 2 });

    auto all = complement_components(*g, NodeSet{});
    REQUIRE(all.size() == 1);
    CHECK(all[0] == g->all_nodes());
    CHECK_THROWS_AS(complement_components(*g, NodeSet{ 0, 1, 2 }), InputError);
}

TEST_CASE("complement_components matches flood fill and partitions")
{
    auto es = grid_edges(6, 4);
    auto g = make_graph(24, es);
    std::vector<NodeId> column;
    for (int y = 0; y < 4; ++y)
        column.push_back(y * 6 + 2);
    NodeSet s(column);
    auto cs = complement_components(*g, s);
    auto ref = oracle::flood_components(24, es, std::set<int>(column.begin(), column.end()));
    REQUIRE(cs.size() == 2);
    REQUIRE(ref.size() == cs.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        CHECK(std::set<int>(cs[i].begin(), cs[i].end()) == ref[i]);
        CHECK_FALSE(cs[i].intersects(s));
        for (std::size_t j = i + 1; j < cs.size(); ++j)
            CHECK_FALSE(cs[i].intersects(cs[j]));
        total += cs[i].size();
    }
    CHECK(total + s.size() == 24);

    // Irregular removal.
    NodeSet r{ 1, 7, 8, 14, 20 };
    auto cr = complement_components(*g, r);
    auto rr = oracle::flood_components(24, es, std::set<int>(r.begin(), r.end()));
    REQUIRE(cr.size() == rr.size());
    for (std::size_t i = 0; i < cr.size(); ++i)
        CHECK(std::set<int>(cr[i].begin(), cr[i].end()) == rr[i]);
}

TEST_CASE("exhaustion levels are induced prefixes")
{
    auto line = make_line(6);
    const Exhaustion& ex = *line.ex;
    CHECK(ex.level_count() == 6);
    for (int m = 1; m < ex.level_count(); ++m) {
        auto gm = ex.level(m);
        auto gn = ex.level(m + 1);
        CHECK(gm->node_count() == static_cast<std::size_t>(2 * m + 1));
        for (const Edge& e : gn->edges()) {
            if (static_cast<std::size_t>(e.u) < gm->node_count() && static_cast<std::size_t>(e.v) < gm->node_count()) {
                auto f = gm->find_edge(e.u, e.v);
                REQUIRE(f);
                CHECK(gm->edge(*f).len == e.len);
                CHECK(gm->edge(*f).mu == e.mu);
            }
        }
        CHECK(ex.frontier(m) == NodeSet{ Line::id(-m), Line::id(m) });
    }
    CHECK(ex.frontier(6) == NodeSet{ Line::id(-6), Line::id(6) });
    CHECK(ex.level_of(Line::id(-3)) == 3);
    CHECK(ex.smallest_level_containing(NodeSet{ Line::id(2), Line::id(-4) }) == 4);
    CHECK(ex.base_ball(2.0) == NodeSet{ Line::id(-1), Line::id(0), Line::id(1) });
    CHECK_THROWS_AS(ex.level(0), InputError);
    CHECK_THROWS_AS(ex.level(7), InputError);
}

TEST_CASE("exhaustion validation")
{
    auto g = make_graph(3, path_edges(2));
    CHECK_THROWS_AS(Exhaustion(g, { 2, 1, 3 }, { 1, 2, 3 }, 0, {}), InputError);
    CHECK_THROWS_AS(Exhaustion(g, { 1, 2 }, { 1, 2 }, 0, {}), InputError);
    CHECK_THROWS_AS(Exhaustion(g, { 1, 3 }, { 2, 1 }, 0, {}), InputError);
    CHECK_THROWS_AS(Exhaustion(g, { 1, 3 }, { 1, 2 }, 2, {}), InputError);
}

TEST_CASE("chains on the line")
{
    auto line = make_line(8);
    auto pos = Chain::end_through(line.ex, Line::id(8), 7, "pos");
    auto neg = Chain::end_through(line.ex, Line::id(-8), 7, "neg");

    // F_n = {x >= n}.
    std::vector<NodeId> expect;
    for (int x = 3; x <= 8; ++x)
        expect.push_back(Line::id(x));
    CHECK(pos.at(3) == NodeSet(expect));
    CHECK(pos.at(3, 5) == NodeSet{ Line::id(3), Line::id(4), Line::id(5) });

    CHECK(chains_equivalent(pos, pos, 7).equivalent);
    CHECK(chains_equivalent(pos.shifted(1), pos, 6).equivalent);
    auto mixed = chains_equivalent(pos, neg, 7);
    CHECK_FALSE(mixed.equivalent);
    CHECK(mixed.first_failing_k == 1);

    auto check = check_chain(pos, 7);
    CHECK(check.nonempty);
    CHECK(check.nested);
    CHECK(check.escapes);
    CHECK(check.distance_to_base[0] == doctest::Approx(1.0));
    CHECK(check.distance_to_base[6] == doctest::Approx(7.0));
}

TEST_CASE("end chains for shifted radius schedules are equivalent")
{
    // Same universe, radii R_n = n and R'_n = n + 1.
    auto line = make_line(9);
    const Exhaustion& ex = *line.ex;
    std::vector<double> shifted_radii;
    for (int k = 1; k <= 9; ++k)
        shifted_radii.push_back(k + 1);
    std::vector<std::size_t> sizes;
    for (int k = 1; k <= 9; ++k)
        sizes.push_back(ex.level_size(k));
    auto ex2 = std::make_shared<const Exhaustion>(ex.universe_ptr(), sizes, shifted_radii, 0, ex.frontier(9));
    auto a = Chain::end_through(ex2, Line::id(9), 8, "a");
    // Materialize the R_n chain on ex2 so both share one exhaustion.
    std::vector<NodeSet> sets;
    auto b0 = Chain::end_through(line.ex, Line::id(9), 8, "b");
    for (int n = 1; n <= 8; ++n)
        sets.push_back(b0.at(n));
    auto b = Chain::from_sets(ex2, sets, Chain::Origin::end_derived, "b");
    CHECK(chains_equivalent(a, b, 7).equivalent);
}

TEST_CASE("chain checks flag violations")
{
    auto line = make_line(5);
    auto bad = Chain::from_sets(line.ex, { NodeSet{ Line::id(3) }, NodeSet{ Line::id(2), Line::id(3) } }, Chain::Origin::user_supplied, "bad");
    auto c = check_chain(bad, 2);
    CHECK_FALSE(c.nested);
    CHECK(c.first_violation == 2);

    auto empty = Chain::from_sets(line.ex, { NodeSet{ Line::id(3) }, NodeSet{} }, Chain::Origin::user_supplied, "empty");
    CHECK_FALSE(check_chain(empty, 2).nonempty);

    auto stuck = Chain::from_sets(line.ex, { NodeSet{ Line::id(3) }, NodeSet{ Line::id(3) } }, Chain::Origin::user_supplied, "stuck");
    CHECK_FALSE(check_chain(stuck, 2).escapes);

    auto other = make_line(5);
    auto x = Chain::end_through(line.ex, Line::id(5), 3, "x");
    auto y = Chain::end_through(other.ex, Line::id(5), 3, "y");
    CHECK_THROWS_AS(chains_equivalent(x, y, 3), InputError);
}

TEST_CASE("space complement chain")
{
    auto line = make_line(4);
    auto s = Chain::space_complement(line.ex);
    CHECK(s.length() == 4);
    CHECK(s.at(4) == NodeSet{ Line::id(-4), Line::id(4) });
    CHECK(s.at(1).size() == 8);
}

TEST_CASE("induced subgraph relabels")
{
    auto g = make_graph(5, path_edges(4));
    auto sub = g->induced_subgraph(NodeSet{ 0, 1, 3, 4 });
    CHECK(sub.graph->node_count() == 4);
    CHECK(sub.graph->edge_count() == 2);
    CHECK_FALSE(sub.graph->is_connected());
    CHECK(sub.to_parent[2] == 3);
    CHECK(sub.from_parent[2] == -1);
}
