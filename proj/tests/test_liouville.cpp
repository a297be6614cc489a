#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "pmod/error.hpp"
#include "pmod/liouville.hpp"
#include "pmod/scenarios.hpp"

#include <cmath>

using namespace pmod;
using M = Membership;

namespace {

ClassReport report_with(std::initializer_list<std::pair<LClass, Membership>> entries)
{
    ClassReport r;
    for (auto [c, m] : entries)
        r.membership[c] = m;
    return r;
}

bool all_unknown_except(const ClassReport& r, std::initializer_list<LClass> decided)
{
    for (LClass c : all_classes) {
        bool listed = std::find(decided.begin(), decided.end(), c) != decided.end();
        if (!listed && r.at(c) != M::unknown)
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("class names")
{
    CHECK(std::string(to_string(LClass::HBD)) == "O^p_HBD");
    CHECK(parse_class("O^p_para") == LClass::para);
    CHECK(parse_class("QBD") == LClass::QBD);
    CHECK_THROWS_AS(parse_class("O^p_XY"), InputError);
    CHECK_THROWS_AS(lattice_check({ { "O^p_nope", M::member } }), InputError);
    CHECK(parse_membership("nonmember") == M::nonmember);
}

TEST_CASE("lattice closure")
{
    const auto& L = ClassLattice::get();
    CHECK(L.contained(LClass::QP, LClass::HBD));
    CHECK(L.contained(LClass::para, LClass::QD));
    CHECK(L.contained(LClass::QD, LClass::HBD));
    CHECK(L.contained(LClass::QP, LClass::HB));
    CHECK_FALSE(L.contained(LClass::HB, LClass::HP));
    CHECK_FALSE(L.contained(LClass::para, LClass::HB));
    CHECK_FALSE(L.contained(LClass::HP, LClass::QP));
    CHECK_FALSE(L.contained(LClass::HBD, LClass::para));
}

TEST_CASE("lattice check examples")
{
    auto v = lattice_check(report_with({ { LClass::para, M::member }, { LClass::HBD, M::nonmember } }));
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("O^p_para ⊂ O^p_HBD") != std::string::npos);

    CHECK(lattice_check(ClassReport{}).empty());

    auto eq = lattice_check({ { "O^p_HD", M::nonmember }, { "O^p_QD", M::member } });
    REQUIRE(eq.size() == 1);
    CHECK(eq[0].find("O^p_QD = O^p_HD") != std::string::npos);

    // Member below a nonmember two steps up.
    auto far = lattice_check(report_with({ { LClass::QP, M::member }, { LClass::HB, M::nonmember } }));
    CHECK(far.size() == 1);
}

TEST_CASE("finalize propagates along the lattice")
{
    ClassReport r;
    r.add_evidence("e", "test");
    r.decide(LClass::para, M::member, "e");
    finalize(r);
    CHECK(r.consistent());
    for (LClass c : { LClass::HBD, LClass::HD, LClass::QBD, LClass::QD })
        CHECK(r.at(c) == M::member);
    CHECK(r.at(LClass::HP) == M::unknown);
    CHECK(r.at(LClass::QP) == M::unknown);

    ClassReport s;
    s.add_evidence("e", "test");
    s.decide(LClass::QD, M::nonmember, "e");
    finalize(s);
    for (LClass c : all_classes)
        CHECK(s.at(c) == M::nonmember);

    ClassReport bad = report_with({ { LClass::para, M::member }, { LClass::HBD, M::nonmember } });
    finalize(bad);
    CHECK_FALSE(bad.consistent());
    CHECK_THROWS(r.decide(LClass::HP, M::member, "missing"));
}

TEST_CASE("weighted line: one hyperbolic end")
{
    auto c = classify_weighted_line(example_line_weight(2.0), 1.5);
    CHECK(c.neg_hyperbolic);
    CHECK_FALSE(c.pos_hyperbolic);
    CHECK(c.finite_part == doctest::Approx(2.0).epsilon(1e-10));
    REQUIRE(c.neg_tail);
    CHECK(*c.neg_tail == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
    CHECK_FALSE(c.pos_tail);
    const ClassReport& r = c.report;
    CHECK(r.at(LClass::QB) == M::member);
    CHECK(r.at(LClass::QD) == M::member);
    CHECK(r.at(LClass::HP) == M::nonmember);
    CHECK(r.at(LClass::QP) == M::nonmember);
    CHECK(r.at(LClass::para) == M::nonmember);
    CHECK(r.at(LClass::HB) == M::member);
    CHECK(r.at(LClass::HBD) == M::member);
    CHECK(r.consistent());
    CHECK_FALSE(c.witness);
}

TEST_CASE("weighted line: both ends parabolic")
{
    auto c = classify_weighted_line(example_line_weight(2.0), 3.5);
    CHECK_FALSE(c.neg_hyperbolic);
    CHECK_FALSE(c.pos_hyperbolic);
    for (LClass k : all_classes)
        CHECK(c.report.at(k) == M::member);
    CHECK(c.report.consistent());
}

TEST_CASE("weighted line: both ends hyperbolic with witness")
{
    const double p = 1.5;
    auto c = classify_weighted_line(symmetric_line_weight(2.0), p);
    CHECK(c.pos_hyperbolic);
    CHECK(c.neg_hyperbolic);
    CHECK(c.report.at(LClass::HBD) == M::nonmember);
    CHECK(c.report.at(LClass::QP) == M::nonmember);
    CHECK(c.report.at(LClass::para) == M::nonmember);
    CHECK(c.report.consistent());
    REQUIRE(c.witness);
    // w^{1/(1-p)} = (1+|x|)^{-4}: total mass 2/3 and u in closed form.
    CHECK(c.witness->total == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    auto exact = [](double x) { return x >= 0 ? 1.0 - 0.5 * std::pow(1.0 + x, -3.0) : 0.5 * std::pow(1.0 - x, -3.0); };
    for (double x : { -7.0, -2.0, -0.3, 0.0, 0.4, 1.0, 3.0, 12.0 })
        CHECK(c.witness->u(x) == doctest::Approx(exact(x)).epsilon(1e-8));
}

TEST_CASE("verdict flips exactly at p = 1 + alpha")
{
    for (double alpha : { 0.5, 1.0, 2.0 }) {
        for (double p : { 1.0 + alpha - 0.2, 1.0 + alpha - 1e-9 })
            CHECK(classify_weighted_line(example_line_weight(alpha), p).neg_hyperbolic);
        for (double p : { 1.0 + alpha, 1.0 + alpha + 1e-9, 1.0 + alpha + 0.2 })
            CHECK_FALSE(classify_weighted_line(example_line_weight(alpha), p).neg_hyperbolic);
    }
}

TEST_CASE("scaling the weight changes no verdict")
{
    for (double p : { 1.5, 2.5, 3.5 }) {
        auto base = classify_weighted_line(example_line_weight(2.0), p);
        LineWeight scaled = example_line_weight(2.0);
        auto w = scaled.w;
        scaled.w = [w](double x) { return 7.5 * w(x); };
        auto s = classify_weighted_line(scaled, p);
        CHECK(s.pos_hyperbolic == base.pos_hyperbolic);
        CHECK(s.neg_hyperbolic == base.neg_hyperbolic);
        CHECK(s.report.membership == base.report.membership);
        CHECK(s.finite_part == doctest::Approx(base.finite_part * std::pow(7.5, 1.0 / (1.0 - p))));
    }
}

TEST_CASE("undeclared tails are refused")
{
    LineWeight w{ [](double) { return 1.0; }, {}, { TailKind::power, 0.0, 1.0 }, "flat" };
    CHECK_THROWS_AS(classify_weighted_line(w, 2.0), InputError);
    LineWeight neg{ [](double x) { return x; }, { TailKind::power, 0.0, 1.0 }, { TailKind::power, 0.0, 1.0 }, "bad" };
    CHECK_THROWS_AS(classify_weighted_line(neg, 2.0), InputError);
    CHECK(tail_converges({ TailKind::exponential, 0.1, 0.0 }, 2.0));
    CHECK_FALSE(tail_converges({ TailKind::exponential, 0.0, 0.0 }, 2.0));
}

TEST_CASE("construction on the symmetric weighted line approaches the 1D profile")
{
    const double p = 1.5;
    Scenario sc = build_scenario({ "weighted_line", { { "alpha", 2.0 }, { "h", 0.125 }, { "depth", 16 } }, { { "form", "symmetric" } } });
    auto con = construct_finite_energy_harmonic(sc.chain("end_neg"), sc.chain("end_pos"), p);
    CHECK(con.valid);
    CHECK(con.bounded);
    CHECK(con.stabilized);
    CHECK(con.energy_upper_ok);
    CHECK(con.energy_lower_ok);
    CHECK(con.delta > 0.1);
    // Energies are nonincreasing in n.
    for (std::size_t i = 1; i < con.energies.size(); ++i)
        CHECK(con.energies[i] <= con.energies[i - 1] + 1e-9);

    auto exact = [](double x) { return x >= 0 ? 1.0 - 0.5 * std::pow(1.0 + x, -3.0) : 0.5 * std::pow(1.0 - x, -3.0); };
    const PotentialField& u = con.fields.back();
    const MetricGraph& g = u.graph();
    double worst = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        double x = g.position(static_cast<NodeId>(i))[0];
        if (std::abs(x) <= 3.0)
            worst = std::max(worst, std::abs(u[static_cast<NodeId>(i)] - exact(x)));
    }
    CHECK(worst < 0.02);
    // Energy tends to (2/3)^{1-p}, the energy of the limit profile.
    CHECK(con.energies.back() == doctest::Approx(std::pow(2.0 / 3.0, 1.0 - p)).epsilon(0.03));
}

TEST_CASE("construction refused on Z^1")
{
    Scenario sc = build_scenario({ "grid_zn", { { "n", 1 }, { "depth", 32 } }, {} });
    CHECK_THROWS_AS(construct_finite_energy_harmonic(sc.chain("end_neg"), sc.chain("end_pos"), 2.0), PreconditionError);
}

TEST_CASE("O_HBD decisions")
{
    SUBCASE("Z^1 is a member through parabolicity")
    {
        Scenario sc = build_scenario({ "grid_zn", { { "n", 1 }, { "depth", 32 } }, {} });
        auto d = decide_O_HBD(sc.exhaustion, 2.0, {});
        CHECK(d.report.at(LClass::HBD) == M::member);
        CHECK(d.report.at(LClass::para) == M::member);
        CHECK(d.report.consistent());
        CHECK_FALSE(d.witness);
        REQUIRE(d.space);
        CHECK(d.space->verdict == Verdict::parabolic);
        CHECK(all_unknown_except(d.report, { LClass::HBD, LClass::HD, LClass::QBD, LClass::QD, LClass::para }));
    }
    SUBCASE("weighted tree is a nonmember through its two subtrees")
    {
        Scenario sc = build_scenario({ "binary_tree", { { "depth", 10 } }, {} });
        auto d = decide_O_HBD(sc.exhaustion, 2.0, { sc.chain("left_subtree"), sc.chain("right_subtree") });
        CHECK(d.report.at(LClass::HBD) == M::nonmember);
        CHECK(d.report.at(LClass::para) == M::nonmember);
        CHECK(d.report.consistent());
        REQUIRE(d.witness);
        CHECK(d.witness->valid);
        CHECK(d.witness->delta > 0.1);
    }
    SUBCASE("one-ended hyperbolic grid stays unknown")
    {
        Scenario sc = build_scenario({ "grid_zn", { { "n", 3 }, { "depth", 6 } }, {} });
        ClassifyConfig cheap;
        cheap.schedule = { 1, 2, 3 };
        DecideConfig cfg;
        cfg.construct.classify = cheap;
        auto d = decide_O_HBD(sc.exhaustion, 2.0, {}, cfg);
        CHECK(d.report.at(LClass::HBD) == M::unknown);
        CHECK(d.report.consistent());
        CHECK_FALSE(d.report.notes.empty());
    }
}
