#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pmod/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result
{
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = pmod::cli::run(args, out, err);
    return { code, out.str(), err.str() };
}

fs::path scratch_dir(const std::string& name)
{
    fs::path d = fs::temp_directory_path() / ("pmod_test_cli_" + name);
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

// Path 0-1-2-3-4-5 with unit edges.
fs::path write_path_graph(const fs::path& d)
{
    std::ofstream f(d / "path.json");
    f << R"({"nodes": [{"id":0},{"id":1},{"id":2},{"id":3},{"id":4},{"id":5}], "edges": [)"
      << R"({"u":0,"v":1,"len":1,"mu":1},{"u":1,"v":2,"len":1,"mu":1},{"u":2,"v":3,"len":1,"mu":1},)"
      << R"({"u":3,"v":4,"len":1,"mu":1},{"u":4,"v":5,"len":1,"mu":1}]})";
    return d / "path.json";
}

} // namespace

TEST_CASE("capacity of a five-edge path")
{
    auto d = scratch_dir("capacity");
    auto g = write_path_graph(d);
    auto r = run({ "capacity", "--graph", g.string(), "--E", "0", "--F", "5", "--p", "2", "--out", d.string() });
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(fs::exists(d / "capacity.json"));
    CHECK(fs::exists(d / "capacity_potential.csv"));

    // p = 3: each edge carries (1/5)^3, five of them.
    r = run({ "capacity", "--graph", g.string(), "--E", "0", "--F", "5", "--p", "3", "--out", d.string() });
    CHECK(std::stod(r.out) == doctest::Approx(5.0 / 125.0).epsilon(1e-6));
}

TEST_CASE("modulus and duality on the path")
{
    auto d = scratch_dir("modulus");
    auto g = write_path_graph(d);
    auto r = run({ "modulus", "--graph", g.string(), "--E", "0", "--F", "5", "--out", d.string() });
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(0.2).epsilon(1e-5));
    r = run({ "verify-duality", "--graph", g.string(), "--E", "0", "--F", "5", "--strict", "--out", d.string() });
    CHECK(r.code == 0);
    CHECK(r.out.find("relgap") != std::string::npos);
}

TEST_CASE("line classification text")
{
    auto d = scratch_dir("line");
    auto r = run({ "line-classify", "--alpha", "2", "--p", "2", "--out", d.string() });
    CHECK(r.code == 0);
    CHECK(r.out == "end −∞: hyperbolic; end +∞: parabolic; classes: (O^p_QB ∩ O^p_QD) ∖ O^p_HP\n");
    r = run({ "line-classify", "--alpha", "1", "--p", "2", "--out", d.string() });
    CHECK(r.out.find("end −∞: parabolic; end +∞: parabolic") == 0);
}

TEST_CASE("exit codes")
{
    auto d = scratch_dir("exit");
    auto g = write_path_graph(d);
    CHECK(run({}).code == 1);
    CHECK(run({ "no-such-command" }).code == 1);
    CHECK(run({ "capacity", "--graph", g.string(), "--E", "0", "--F", "5", "--p", "0.5", "--out", d.string() }).code == 1);
    CHECK(run({ "capacity", "--graph", g.string(), "--E", "0", "--F", "9", "--out", d.string() }).code == 1);
    CHECK(run({ "capacity", "--graph", (d / "missing.json").string(), "--E", "0", "--F", "5", "--out", d.string() }).code == 1);
    CHECK(run({ "scenario", "--name", "nonexistent", "--out", d.string() }).code == 1);
    CHECK(run({ "capacity", "--help" }).code == 0);

    // Z^3 at depth 4 cannot be resolved: inconclusive, 2 only under --strict.
    std::vector<std::string> args{ "classify-space", "--scenario", "grid_zn", "--param", "n=3", "--param", "depth=4", "--p", "2", "--out", d.string() };
    auto loose = run(args);
    CHECK(loose.code == 0);
    CHECK(loose.out.find("inconclusive") != std::string::npos);
    args.push_back("--strict");
    CHECK(run(args).code == 2);
}

TEST_CASE("ends and decide on the line")
{
    auto d = scratch_dir("ends");
    auto r = run({ "ends", "--scenario", "grid_zn", "--param", "n=1", "--param", "depth=64", "--p", "2", "--strict", "--out", d.string() });
    CHECK(r.code == 0);
    CHECK(r.out.find("2 end(s)") != std::string::npos);
    CHECK(fs::exists(d / "ends_an.csv"));
    CHECK(fs::exists(d / "ends_an.svg"));

    r = run({ "decide", "--scenario", "grid_zn", "--param", "n=1", "--param", "depth=64", "--p", "2", "--out", d.string() });
    CHECK(r.code == 0);
    CHECK(r.out.find("O^p_HBD") != std::string::npos);
    CHECK(fs::exists(d / "decide.json"));
}

TEST_CASE("reports are byte-identical without timestamps")
{
    auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
    for (const auto& d : { a, b }) {
        auto r = run({ "sequence", "--scenario", "binary_tree", "--param", "depth=8", "--chain", "left_subtree", "--p", "2", "--no-timestamp", "--out", d.string() });
        REQUIRE(r.code == 0);
    }
    for (const char* f : { "sequence.json", "sequence_an.csv", "sequence_an.svg" })
        CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / "sequence.json").find("timestamp") == std::string::npos);
}

TEST_CASE("scenario dump")
{
    auto d = scratch_dir("scenario");
    auto r = run({ "scenario", "--name", "binary_tree", "--param", "depth=4", "--out", d.string() });
    CHECK(r.code == 0);
    CHECK(r.out.find("31 nodes") != std::string::npos);
    CHECK(fs::exists(d / "scenario_graph.json"));
    // The dumped exhaustion reference loads back.
    r = run({ "classify-space", "--exhaustion", (d / "scenario_exhaustion.json").string(), "--p", "2", "--out", d.string() });
    CHECK(r.code == 0);
}
