#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pmod/ends.hpp"
#include "pmod/error.hpp"
#include "pmod/scenarios.hpp"

#include <cmath>

using namespace pmod;

namespace {

Scenario line(int depth)
{
    return build_scenario({ "grid_zn", { { "n", 1 }, { "depth", double(depth) } }, {} });
}

} // namespace

TEST_CASE("end counts")
{
    CHECK(build_ends(line(8).exhaustion, 3).size() == 2);
    CHECK(build_ends(build_scenario({ "grid_zn", { { "n", 2 }, { "depth", 6 } }, {} }).exhaustion, 3).size() == 1);
    auto tree = build_scenario({ "binary_tree", { { "depth", 6 } }, {} });
    for (int d : { 1, 2, 3 }) {
        auto ends = build_ends(tree.exhaustion, d);
        CHECK(ends.size() == (std::size_t{ 1 } << d));
        for (const Chain& e : ends)
            CHECK(e.origin() == Chain::Origin::end_derived);
    }
}

TEST_CASE("ends of the line are the two half-lines")
{
    auto sc = line(16);
    auto ends = build_ends(sc.exhaustion, 4);
    REQUIRE(ends.size() == 2);
    const MetricGraph& g = sc.exhaustion->universe();
    for (const Chain& e : ends) {
        NodeSet f = e.at(4);
        double sign = g.position(*f.begin())[0] > 0 ? 1.0 : -1.0;
        for (NodeId x : f)
            CHECK(sign * g.position(x)[0] >= 4.0);
        CHECK(f.size() == 13);
    }
}

TEST_CASE("each end of Z^1 has a_n = n^{1-p}")
{
    auto sc = line(64);
    for (double p : { 1.5, 2.0, 3.0 }) {
        for (const char* name : { "end_pos", "end_neg" }) {
            auto v = classify(sc.chain(name), p);
            CHECK(v.verdict == Verdict::parabolic);
            CHECK(v.all_converged);
            for (const SequencePoint& pt : v.points)
                CHECK(std::abs(pt.value - std::pow(pt.n, 1.0 - p)) <= 1e-6 * std::pow(pt.n, 1.0 - p));
        }
        auto s = classify_space(sc.exhaustion, p);
        CHECK(s.verdict == Verdict::parabolic);
        for (const SequencePoint& pt : s.points)
            CHECK(pt.value == doctest::Approx(2.0 * std::pow(pt.n, 1.0 - p)).epsilon(1e-6));
    }
}

TEST_CASE("default schedule")
{
    CHECK(default_schedule(40) == std::vector<int>{ 1, 2, 3, 4, 6, 8, 11, 16, 23, 32 });
    CHECK(default_schedule(1) == std::vector<int>{ 1 });
}

TEST_CASE("binary tree: parabolic ends")
{
    auto sc = build_scenario({ "binary_tree", { { "depth", 8 } }, {} });
    auto v = classify(sc.chain("ray"), 2.0);
    CHECK(v.verdict == Verdict::parabolic);
    bool noted = false;
    for (const auto& n : v.notes)
        noted = noted || n.find("available depth") != std::string::npos;
    CHECK(noted);
}

TEST_CASE("chain preconditions")
{
    auto sc = line(8);
    auto ex = sc.exhaustion;
    const MetricGraph& g = ex->universe();
    auto right_of = [&](double a) {
        std::vector<NodeId> out;
        for (std::size_t i = 0; i < g.node_count(); ++i)
            if (g.position(static_cast<NodeId>(i))[0] >= a)
                out.push_back(static_cast<NodeId>(i));
        return NodeSet(out);
    };
    auto bad = Chain::from_sets(ex, { right_of(2), right_of(1), right_of(3) }, Chain::Origin::user_supplied, "bad");
    CHECK_THROWS_AS(is_hyperbolic_sequence(bad, 2.0), PreconditionError);
    auto empty = Chain::from_sets(ex, { right_of(2), right_of(100) }, Chain::Origin::user_supplied, "empty");
    CHECK_THROWS_AS(is_hyperbolic_sequence(empty, 2.0), PreconditionError);

    std::vector<NodeSet> good;
    for (int n = 1; n <= 8; ++n)
        good.push_back(right_of(n));
    auto ok = Chain::from_sets(ex, good, Chain::Origin::user_supplied, "ok");
    auto v = is_hyperbolic_sequence(ok, 2.0);
    CHECK(v.verdict == Verdict::parabolic);
    // F_8 = {8} first appears on the top level and cannot be confirmed there.
    CHECK(v.points.back().n == 6);
}

TEST_CASE("Z^1 ends are well separated but not hyperbolic")
{
    auto sc = line(32);
    auto rep = well_separated(sc.chain("end_pos"), sc.chain("end_neg"), 2.0);
    CHECK(rep.status == SeparationStatus::separated);
    CHECK(rep.separated);
    REQUIRE_FALSE(rep.estimates.empty());
    // F_1 = {x >= 1}, G_1 = {x <= -1}: two unit edges in series.
    CHECK(rep.estimates.back() == doctest::Approx(0.5).epsilon(1e-6));

    auto pair = hyperbolic_pair_from_separation(sc.chain("end_pos"), sc.chain("end_neg"), 2.0, {}, false);
    CHECK(pair.f_verdict != Verdict::hyperbolic);
    CHECK(pair.g_verdict != Verdict::hyperbolic);
    for (std::size_t i = 0; i < pair.indices.size(); ++i)
        CHECK(pair.pair_values[i] == doctest::Approx(1.0 / (2.0 * pair.indices[i])).epsilon(1e-6));
}

TEST_CASE("capacity base independence")
{
    auto sc = line(32);
    auto ex = sc.exhaustion;
    NodeSet small{ ex->base() };
    NodeSet large = ex->base_ball(2.5);
    auto rep = capacity_base_independence(sc.chain("end_pos"), small, large, 2.0);
    CHECK(rep.agree);
    REQUIRE(rep.inclusion_monotone);
    CHECK(*rep.inclusion_monotone);
    // F_1 and F_2 meet the larger base and are skipped.
    for (const SequencePoint& pt : rep.second.points)
        CHECK(pt.n >= 3);
    CHECK_THROWS_AS(capacity_base_independence(sc.chain("end_pos"), small, ex->base_ball(40.0), 2.0), PreconditionError);
}

TEST_CASE("parabolicity witness on Z^1")
{
    auto sc = line(32);
    NodeSet K{ sc.exhaustion->base() };
    auto w = parabolicity_witness(sc.exhaustion, K, { 2, 4, 8, 16, 32 }, 2.0);
    REQUIRE(w.witnesses.size() == 5);
    for (const WitnessField& f : w.witnesses) {
        CHECK(f.energy == doctest::Approx(2.0 / f.n).epsilon(1e-6));
        CHECK(f.field[sc.exhaustion->base()] == 1.0);
    }
    CHECK(w.energy_lower_bound == doctest::Approx(1.0 / 16.0).epsilon(1e-6));
}
