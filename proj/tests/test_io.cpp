#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"
#include "pmod/error.hpp"
#include "pmod/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace pmod;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    fs::path d = fs::temp_directory_path() / ("pmod_test_io_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

} // namespace

TEST_CASE("graph round trip keeps every digit")
{
    std::vector<Edge> edges{ { 0, 1, 0.1, 1.0 / 3.0 }, { 1, 2, std::sqrt(2.0), 7.25 }, { 0, 2, 1e-7, 3.0e5 } };
    std::vector<double> coords{ 0.0, 0.5, 1.0 / 7.0, -2.0, std::acos(-1.0), 1e-9 };
    MetricGraph g(3, edges, coords, 2);
    auto j = io::graph_to_json(g);
    auto back = io::graph_from_json(io::json::parse(j.dump()));
    REQUIRE(back->node_count() == 3);
    REQUIRE(back->edge_count() == 3);
    CHECK(back->dimension() == 2);
    for (std::size_t e = 0; e < 3; ++e) {
        CHECK(back->edges()[e].u == edges[e].u);
        CHECK(back->edges()[e].v == edges[e].v);
        CHECK(back->edges()[e].len == edges[e].len);
        CHECK(back->edges()[e].mu == edges[e].mu);
    }
    CHECK(back->coords() == coords);
}

TEST_CASE("malformed graphs are rejected")
{
    auto bad = [](const char* text) { return io::graph_from_json(io::json::parse(text)); };
    CHECK_THROWS_AS(bad(R"({"nodes": [{"id": 0}, {"id": 2}], "edges": []})"), InputError);
    CHECK_THROWS_AS(bad(R"({"nodes": [{"id": 0}, {"id": 1}], "edges": [{"u": 0, "v": 1, "len": -1, "mu": 1}]})"), InputError);
    CHECK_THROWS_AS(bad(R"({"nodes": [{"id": 0}, {"id": 1}], "edges": [{"u": 0, "v": 1, "mu": 1}]})"), InputError);
    CHECK_THROWS_AS(bad(R"({"nodes": [{"id": 0, "pos": [0]}, {"id": 1}], "edges": [{"u": 0, "v": 1, "len": 1, "mu": 1}]})"), InputError);
    CHECK_THROWS_AS(bad(R"({"nodes": 3})"), InputError);

    auto d = scratch_dir("malformed");
    put(d / "broken.json", "{ not json");
    CHECK_THROWS_AS(io::read_json(d / "broken.json"), InputError);
    CHECK_THROWS_AS(io::read_json(d / "missing.json"), InputError);
}

TEST_CASE("node sets, boundaries and scenario specs")
{
    CHECK(io::nodeset_from_json(io::json::parse("[3, 1, 3, 2]")) == NodeSet{ 1, 2, 3 });
    CHECK_THROWS_AS(io::nodeset_from_json(io::json::parse(R"({"a": 1})")), InputError);

    auto b = io::boundary_from_json(io::json::parse(R"([{"node": 0, "value": 1.5}, {"node": 4, "value": -2}])"));
    REQUIRE(b.size() == 2);
    CHECK(b[1].node == 4);
    CHECK(b[1].value == -2.0);

    auto spec = io::scenario_from_json(io::json::parse(R"({"name": "grid_zn", "params": {"n": 2, "depth": 5, "mode": "x"}})"));
    CHECK(spec.name == "grid_zn");
    CHECK(spec.numbers.at("depth") == 5.0);
    CHECK(spec.options.at("mode") == "x");
    auto again = io::scenario_from_json(io::scenario_to_json(spec));
    CHECK(again.numbers == spec.numbers);
    CHECK(again.options == spec.options);
}

TEST_CASE("exhaustion files round trip and are validated")
{
    auto d = scratch_dir("exhaustion");
    auto sc = build_scenario({ "grid_zn", { { "n", 2 }, { "depth", 4 } }, {} });
    io::write_exhaustion(d / "grid.json", *sc.exhaustion);
    auto loaded = io::read_exhaustion(d / "grid.json");
    const Exhaustion& a = *sc.exhaustion;
    const Exhaustion& b = *loaded.ex;
    REQUIRE(b.level_count() == a.level_count());
    for (int m = 1; m <= a.level_count(); ++m)
        CHECK(b.level_size(m) == a.level_size(m));
    CHECK(b.radii() == a.radii());
    CHECK(b.base() == a.base());
    CHECK(b.outer_frontier() == a.outer_frontier());
    CHECK(b.universe().edge_count() == a.universe().edge_count());

    // A scenario reference builds the scenario itself.
    put(d / "ref.json", R"({"scenario": {"name": "grid_zn", "params": {"n": 1, "depth": 6}}})");
    auto ref = io::read_exhaustion(d / "ref.json");
    CHECK(ref.scenario.has_value());
    CHECK(ref.ex->universe().node_count() == 13);

    // Level 2 is not an extension of level 1: the edge 0-1 changes length.
    put(d / "g1.json", R"({"nodes": [{"id": 0}, {"id": 1}], "edges": [{"u": 0, "v": 1, "len": 1, "mu": 1}]})");
    put(d / "g2.json", R"({"nodes": [{"id": 0}, {"id": 1}, {"id": 2}], "edges": [{"u": 0, "v": 1, "len": 2, "mu": 1}, {"u": 1, "v": 2, "len": 1, "mu": 1}]})");
    put(d / "bad.json", R"({"graphs": ["g1.json", "g2.json"], "radii": [1], "base": 0, "outer_frontier": [2]})");
    CHECK_THROWS_AS(io::read_exhaustion(d / "bad.json"), InputError);
    put(d / "shrink.json", R"({"graphs": ["g2.json", "g1.json"], "radii": [1], "base": 0, "outer_frontier": [1]})");
    CHECK_THROWS_AS(io::read_exhaustion(d / "shrink.json"), InputError);
}

TEST_CASE("chains from files")
{
    auto sc = build_scenario({ "grid_zn", { { "n", 1 }, { "depth", 8 } }, {} });
    auto c = io::chain_from_json(io::json::parse(R"({"label": "tail", "sets": [[5, 6, 7], [6, 7]]})"), sc.exhaustion, "x");
    CHECK(c.label() == "tail");
    CHECK(c.length() == 2);
    CHECK(c.at(2).size() == 2);
    auto bare = io::chain_from_json(io::json::parse("[[1, 2], [2]]"), sc.exhaustion, "fallback");
    CHECK(bare.label() == "fallback");
    CHECK_THROWS_AS(io::chain_from_json(io::json::parse("[]"), sc.exhaustion, "x"), InputError);
}

TEST_CASE("reports: timestamp first, otherwise deterministic")
{
    auto d = scratch_dir("report");
    io::json rep = { { "command", "test" }, { "value", 0.1 }, { "inf", INFINITY }, { "nan", NAN } };
    io::write_report(d / "a.json", rep, false);
    io::write_report(d / "b.json", rep, false);
    CHECK(slurp(d / "a.json") == slurp(d / "b.json"));
    CHECK(slurp(d / "a.json").find("timestamp") == std::string::npos);

    io::write_report(d / "c.json", rep, true);
    auto parsed = io::read_json(d / "c.json");
    CHECK(parsed.begin().key() == "timestamp");
    auto s = parsed["timestamp"].get<std::string>();
    CHECK(s.size() == 20);
    CHECK(s.back() == 'Z');
    CHECK(parsed["inf"] == "inf");
    CHECK(parsed["nan"] == "nan");
    CHECK(parsed["value"].get<double>() == 0.1);
}

TEST_CASE("csv carries 17 significant digits")
{
    auto d = scratch_dir("csv");
    double x = 1.0 / 3.0;
    io::write_csv(d / "x.csv", { "a", "b" }, { { x, 2.0 } });
    std::ifstream in(d / "x.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "a,b");
    CHECK(std::stod(row.substr(0, row.find(','))) == x);
}

TEST_CASE("decay plot")
{
    std::string svg = io::decay_svg("t", { { "s", { 1, 2, 4, 8 }, { 1, 0.5, 0.25, 0.0 } } });
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("class report table lists every class")
{
    ClassReport r;
    r.subject = "x";
    r.p = 2.0;
    r.add_evidence("e", "because");
    r.decide(LClass::para, Membership::member, "e");
    std::string t = io::class_report_table(r);
    for (LClass c : all_classes)
        CHECK(t.find(to_string(c)) != std::string::npos);
    CHECK(t.find("member") != std::string::npos);
}
