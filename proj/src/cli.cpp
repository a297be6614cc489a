#include "pmod/cli.hpp"

#include "pmod/error.hpp"
#include "pmod/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace pmod::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

struct Options
{
    // inputs
    std::string graph, exhaustion, scenario, boundary, E, F, G, chain;
    std::vector<std::string> params;
    std::vector<std::string> candidates;
    // numbers
    double p = 2.0;
    double tol = 1e-9;
    double modulus_tol = 1e-6;
    double inner_tol = 1e-3;
    double sep_tol = 0.02;
    double delta_hyp = Thresholds{}.delta_hyp;
    double delta_par = Thresholds{}.delta_par;
    double slope_hyp = Thresholds{}.slope_hyp;
    double slope_par = Thresholds{}.slope_par;
    double alpha = 2.0;
    double h = 0.05;
    double ball_radius = ConstructConfig{}.ball_radius;
    int depth = 2;
    int dim = 1;
    int J = 3;
    int threads = 0;
    std::string schedule;
    std::string form = "example";
    std::string name;
    // output
    std::string out_dir = "pmod_out";
    bool no_timestamp = false;
    bool strict = false;
    bool quiet = false;
    bool log = false;
    bool cross_check = false;
};

std::vector<int> parse_int_list(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size())
            throw InputError("expected a comma-separated list of integers, got '" + s + "'");
        out.push_back(v);
    }
    return out;
}

class Runner
{
  public:
    Runner(const Options& o, std::ostream& out)
        : o_(o), out_(out), dir_(o.out_dir)
    {
    }

    int capacity_cmd();
    int modulus_cmd();
    int harmonic_cmd();
    int duality_cmd();
    int ends_cmd();
    int space_cmd();
    int sequence_cmd();
    int separated_cmd();
    int construct_cmd();
    int decide_cmd();
    int line_cmd();
    int scenario_cmd();
    int bump_cmd();

  private:
    const Options& o_;
    std::ostream& out_;
    fs::path dir_;
    GraphPtr graph_;
    io::LoadedExhaustion loaded_;

    bool stamp() const { return !o_.no_timestamp; }
    int verdict_exit(bool conclusive) const { return (!conclusive && o_.strict) ? ExitCode::inconclusive : ExitCode::ok; }

    void say(const std::string& line)
    {
        if (!o_.quiet)
            out_ << line << '\n';
    }

    SolverOptions solver() const
    {
        SolverOptions s;
        s.tol = o_.tol;
        s.record_log = o_.log;
        return s;
    }

    Thresholds thresholds() const
    {
        Thresholds t;
        t.delta_hyp = o_.delta_hyp;
        t.delta_par = o_.delta_par;
        t.slope_hyp = o_.slope_hyp;
        t.slope_par = o_.slope_par;
        return t;
    }

    ClassifyConfig classify_config() const
    {
        ClassifyConfig c;
        c.thresholds = thresholds();
        c.inner_tol = o_.inner_tol;
        c.solver = solver();
        c.threads = o_.threads;
        if (!o_.schedule.empty())
            c.schedule = parse_int_list(o_.schedule);
        return c;
    }

    json settings() const
    {
        return { { "p", o_.p }, { "solver", io::solver_to_json(solver()) }, { "thresholds", io::thresholds_to_json(thresholds()) }, { "inner_tol", o_.inner_tol } };
    }

    const MetricGraph& graph()
    {
        if (!graph_) {
            if (o_.graph.empty())
                throw InputError("--graph is required");
            graph_ = io::read_graph(o_.graph);
        }
        return *graph_;
    }

    ExhaustionPtr exhaustion()
    {
        if (!loaded_.ex) {
            if (!o_.exhaustion.empty() && !o_.scenario.empty())
                throw InputError("give either --exhaustion or --scenario, not both");
            if (!o_.exhaustion.empty()) {
                loaded_ = io::read_exhaustion(o_.exhaustion);
            } else if (!o_.scenario.empty()) {
                Scenario sc = build_scenario(scenario_spec(o_.scenario));
                loaded_.ex = sc.exhaustion;
                loaded_.scenario = std::move(sc);
            } else {
                throw InputError("--exhaustion or --scenario is required");
            }
        }
        return loaded_.ex;
    }

    ScenarioSpec scenario_spec(const std::string& name) const
    {
        ScenarioSpec spec;
        spec.name = name;
        for (const auto& kv : o_.params) {
            auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0)
                throw InputError("--param expects key=value, got '" + kv + "'");
            std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
            double d = 0.0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), d);
            if (ec == std::errc{} && ptr == value.data() + value.size())
                spec.numbers[key] = d;
            else
                spec.options[key] = value;
        }
        return spec;
    }

    // File path, "left"/"right" (extreme first coordinate, else extreme id),
    // or a comma-separated id list.
    NodeSet nodeset(const std::string& spec, const MetricGraph& g, const char* flag)
    {
        if (spec.empty())
            throw InputError(std::string(flag) + " is required");
        NodeSet s;
        if (fs::exists(spec)) {
            s = io::nodeset_from_json(io::read_json(spec));
        } else if (spec == "left" || spec == "right") {
            bool left = spec == "left";
            std::vector<NodeId> ids;
            if (g.dimension() == 0) {
                ids.push_back(left ? 0 : static_cast<NodeId>(g.node_count() - 1));
            } else {
                double best = left ? INFINITY : -INFINITY;
                for (std::size_t i = 0; i < g.node_count(); ++i)
                    best = left ? std::min(best, g.position(static_cast<NodeId>(i))[0]) : std::max(best, g.position(static_cast<NodeId>(i))[0]);
                for (std::size_t i = 0; i < g.node_count(); ++i)
                    if (g.position(static_cast<NodeId>(i))[0] == best)
                        ids.push_back(static_cast<NodeId>(i));
            }
            s = NodeSet(std::move(ids));
        } else {
            auto ids = parse_int_list(spec);
            s = NodeSet(std::vector<NodeId>(ids.begin(), ids.end()));
        }
        g.check_nodes(s);
        if (s.empty())
            throw InputError(std::string(flag) + " selects no nodes");
        return s;
    }

    // Chain file, scenario chain name, or end_k from build_ends at --depth.
    Chain chain(const std::string& spec, const char* flag)
    {
        if (spec.empty())
            throw InputError(std::string(flag) + " is required");
        ExhaustionPtr ex = exhaustion();
        if (fs::exists(spec))
            return io::chain_from_json(io::read_json(spec), ex, fs::path(spec).stem().string());
        if (loaded_.scenario && loaded_.scenario->chains.count(spec))
            return loaded_.scenario->chain(spec);
        if (spec.rfind("end_", 0) == 0) {
            for (const Chain& c : build_ends(ex, std::min(o_.depth, ex->radius_count())))
                if (c.label() == spec)
                    return c;
        }
        std::string known;
        if (loaded_.scenario)
            for (const auto& [k, v] : loaded_.scenario->chains)
                known += " " + k;
        throw InputError(std::string(flag) + ": no chain file or chain named '" + spec + "'" + (known.empty() ? "" : "; scenario chains:" + known));
    }

    void write_verdict_series(const std::string& stem, const std::vector<const HyperbolicityVerdict*>& verdicts)
    {
        std::vector<std::vector<double>> rows;
        std::vector<io::Series> series;
        for (std::size_t k = 0; k < verdicts.size(); ++k) {
            io::Series s{ verdicts[k]->target, {}, {} };
            for (const auto& pt : verdicts[k]->points) {
                rows.push_back({ double(k), double(pt.n), pt.value, double(pt.level), pt.exact ? 1.0 : 0.0, pt.converged ? 1.0 : 0.0 });
                s.x.push_back(pt.n);
                s.y.push_back(pt.value);
            }
            series.push_back(std::move(s));
        }
        io::write_csv(dir_ / (stem + "_an.csv"), { "target", "n", "a_n", "level", "exact", "converged" }, rows);
        io::write_text(dir_ / (stem + "_an.svg"), io::decay_svg("a_n = cap(B, F_n), p = " + std::to_string(o_.p), series));
    }

    void write_field(const std::string& name, const PotentialField& f)
    {
        const MetricGraph& g = f.graph();
        std::vector<std::string> header{ "node" };
        for (int k = 0; k < g.dimension(); ++k)
            header.push_back("x" + std::to_string(k + 1));
        header.push_back("u");
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            std::vector<double> row{ double(i) };
            for (double c : g.position(static_cast<NodeId>(i)))
                row.push_back(c);
            row.push_back(f[static_cast<NodeId>(i)]);
            rows.push_back(std::move(row));
        }
        io::write_csv(dir_ / name, header, rows);
    }

    std::string verdict_line(const HyperbolicityVerdict& v) const
    {
        std::ostringstream os;
        os << v.target << ": " << to_string(v.verdict);
        if (v.verdict == Verdict::hyperbolic)
            os << " (lim a_n ~ " << v.analysis.limit << ")";
        if (v.analysis.growth_exponent)
            os << ", growth exponent " << *v.analysis.growth_exponent;
        return os.str();
    }
};

int Runner::capacity_cmd()
{
    const MetricGraph& g = graph();
    NodeSet E = nodeset(o_.E, g, "--E"), F = nodeset(o_.F, g, "--F");
    auto r = capacity(graph_, E, F, o_.p, solver());
    io::write_report(dir_ / "capacity.json", { { "command", "capacity" }, { "settings", settings() }, { "capacity", io::json(r.value) }, { "solve", io::solve_report_to_json(r.report) } }, stamp());
    write_field("capacity_potential.csv", r.witness);
    std::ostringstream os;
    os.precision(12);
    os << r.value;
    say(os.str());
    return ExitCode::ok;
}

int Runner::modulus_cmd()
{
    const MetricGraph& g = graph();
    NodeSet E = nodeset(o_.E, g, "--E"), F = nodeset(o_.F, g, "--F");
    ModulusOptions mo;
    mo.tol = o_.modulus_tol;
    mo.solver = solver();
    auto r = modulus_connect(graph_, E, F, o_.p, mo);
    io::write_report(dir_ / "modulus.json",
                     { { "command", "modulus" }, { "settings", settings() }, { "modulus_tol", o_.modulus_tol }, { "modulus", r.value }, { "lower_bound", r.lower_bound }, { "relative_gap", r.relative_gap }, { "converged", r.converged }, { "rounds", r.rounds }, { "active_paths", r.active_paths.size() } },
                     stamp());
    {
        std::ofstream d(dir_ / "modulus_density.csv");
        write_density_csv(d, g, r.density);
        std::ofstream p(dir_ / "modulus_paths.txt");
        write_paths(p, r.active_paths);
    }
    std::ostringstream os;
    os.precision(12);
    os << r.value;
    say(os.str());
    return verdict_exit(r.converged);
}

int Runner::harmonic_cmd()
{
    graph();
    if (o_.boundary.empty())
        throw InputError("--boundary is required");
    DirichletProblem prob{ graph_, io::boundary_from_json(io::read_json(o_.boundary)), o_.p, false };
    auto s = solve_p_harmonic(prob, solver());
    io::write_report(dir_ / "harmonic.json", { { "command", "harmonic" }, { "settings", settings() }, { "energy", s.report.energy }, { "min", s.field.min() }, { "max", s.field.max() }, { "solve", io::solve_report_to_json(s.report) } }, stamp());
    write_field("harmonic_potential.csv", s.field);
    if (o_.log) {
        std::vector<std::vector<double>> rows;
        for (const auto& it : s.report.log)
            rows.push_back({ double(it.sweep), it.energy, it.residual });
        io::write_csv(dir_ / "harmonic_iterations.csv", { "sweep", "energy", "residual" }, rows);
    }
    std::ostringstream os;
    os.precision(12);
    os << "energy " << s.report.energy << (s.report.converged ? "" : " (not converged)");
    say(os.str());
    return verdict_exit(s.report.converged);
}

int Runner::duality_cmd()
{
    const MetricGraph& g = graph();
    NodeSet E = nodeset(o_.E, g, "--E"), F = nodeset(o_.F, g, "--F");
    ModulusOptions mo;
    mo.tol = o_.modulus_tol;
    mo.solver = solver();
    auto r = verify_mod_eq_cap(graph_, E, F, o_.p, mo);
    const double agree_tol = 1e-3;
    bool agree = r.relative_gap <= agree_tol;
    io::write_report(dir_ / "duality.json",
                     { { "command", "verify-duality" },
                       { "settings", settings() },
                       { "modulus_tol", o_.modulus_tol },
                       { "modulus", r.modulus },
                       { "modulus_lower_bound", r.modulus_lower },
                       { "capacity", r.capacity },
                       { "relative_gap", r.relative_gap },
                       { "agree_tol", agree_tol },
                       { "agree", agree },
                       { "gradient_path_length", r.gradient_path_length },
                       { "gradient_admissible", r.gradient_admissible },
                       { "density_gradient_gap", r.density_gradient_gap } },
                     stamp());
    std::ostringstream os;
    os.precision(10);
    os << "Mod = " << r.modulus << ", cap = " << r.capacity << ", relgap = " << r.relative_gap;
    say(os.str());
    return verdict_exit(agree);
}

int Runner::ends_cmd()
{
    ExhaustionPtr ex = exhaustion();
    auto ends = build_ends(ex, o_.depth);
    auto cfg = classify_config();
    json list = json::array();
    std::vector<HyperbolicityVerdict> verdicts;
    bool conclusive = true;
    for (const Chain& e : ends) {
        verdicts.push_back(classify(e, o_.p, cfg));
        conclusive = conclusive && verdicts.back().verdict != Verdict::inconclusive;
        list.push_back(io::verdict_to_json(verdicts.back()));
        say(verdict_line(verdicts.back()));
    }
    say(std::to_string(ends.size()) + " end(s) at depth " + std::to_string(o_.depth));
    io::write_report(dir_ / "ends.json", { { "command", "ends" }, { "settings", settings() }, { "end_depth", o_.depth }, { "end_count", ends.size() }, { "ends", std::move(list) } }, stamp());
    std::vector<const HyperbolicityVerdict*> ptrs;
    for (const auto& v : verdicts)
        ptrs.push_back(&v);
    write_verdict_series("ends", ptrs);
    return verdict_exit(conclusive);
}

int Runner::space_cmd()
{
    auto v = classify_space(exhaustion(), o_.p, classify_config());
    io::write_report(dir_ / "classify_space.json", { { "command", "classify-space" }, { "settings", settings() }, { "result", io::verdict_to_json(v) } }, stamp());
    write_verdict_series("classify_space", { &v });
    say(verdict_line(v));
    return verdict_exit(v.verdict != Verdict::inconclusive);
}

int Runner::sequence_cmd()
{
    Chain c = chain(o_.chain, "--chain");
    auto v = is_hyperbolic_sequence(c, o_.p, classify_config());
    io::write_report(dir_ / "sequence.json", { { "command", "sequence" }, { "settings", settings() }, { "result", io::verdict_to_json(v) } }, stamp());
    write_verdict_series("sequence", { &v });
    say(verdict_line(v));
    return verdict_exit(v.verdict != Verdict::inconclusive);
}

int Runner::separated_cmd()
{
    Chain F = chain(o_.F, "--F"), G = chain(o_.G, "--G");
    auto r = well_separated(F, G, o_.p, o_.sep_tol, solver());
    io::write_report(dir_ / "separated.json", { { "command", "separated" }, { "settings", settings() }, { "F", F.label() }, { "G", G.label() }, { "result", io::separation_to_json(r) } }, stamp());
    std::ostringstream os;
    os << F.label() << " / " << G.label() << ": " << to_string(r.status);
    if (!r.estimates.empty())
        os << ", Mod(F_1, G_1) ~ " << r.estimates.back();
    say(os.str());
    return verdict_exit(r.status != SeparationStatus::undetermined);
}

int Runner::construct_cmd()
{
    Chain F = chain(o_.F, "--F"), G = chain(o_.G, "--G");
    ConstructConfig cfg;
    cfg.classify = classify_config();
    cfg.ball_radius = o_.ball_radius;
    auto c = construct_finite_energy_harmonic(F, G, o_.p, cfg);
    io::write_report(dir_ / "construct.json", { { "command", "construct" }, { "settings", settings() }, { "F", F.label() }, { "G", G.label() }, { "ball_radius", o_.ball_radius }, { "result", io::construction_to_json(c) } }, stamp());
    write_field("construct_field.csv", c.fields.back());
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < c.indices.size(); ++i)
        rows.push_back({ double(c.indices[i]), c.energies[i], c.oscillations[i] });
    io::write_csv(dir_ / "construct_energies.csv", { "n", "energy", "oscillation" }, rows);
    std::ostringstream os;
    os << "construction " << (c.valid ? "valid" : "inconclusive") << ": energy " << c.energies.back() << " in [" << c.limit_estimate << ", " << c.mod_estimate << "], oscillation " << c.delta << " on B(x0, " << o_.ball_radius << ")";
    say(os.str());
    return verdict_exit(c.valid);
}

int Runner::decide_cmd()
{
    ExhaustionPtr ex = exhaustion();
    std::vector<Chain> cands;
    for (const auto& s : o_.candidates)
        cands.push_back(chain(s, "--candidates"));
    DecideConfig cfg;
    cfg.construct.classify = classify_config();
    cfg.construct.ball_radius = o_.ball_radius;
    cfg.end_depth = o_.depth;
    cfg.subject = !o_.scenario.empty() ? o_.scenario : (!o_.exhaustion.empty() ? fs::path(o_.exhaustion).stem().string() : "space");
    auto d = decide_O_HBD(ex, o_.p, cands, cfg);
    json attempts = json::array();
    for (const auto& a : d.attempts)
        attempts.push_back({ { "F", a.f }, { "G", a.g }, { "separation", to_string(a.separation) }, { "pair_verdict", to_string(a.pair_verdict) }, { "skipped", a.skipped } });
    json rep = { { "command", "decide" }, { "settings", settings() }, { "report", io::class_report_to_json(d.report) }, { "attempts", std::move(attempts) } };
    if (d.witness)
        rep["witness"] = io::construction_to_json(*d.witness);
    if (d.space)
        rep["space"] = io::verdict_to_json(*d.space);
    io::write_report(dir_ / "decide.json", std::move(rep), stamp());
    if (!o_.quiet)
        out_ << io::class_report_table(d.report);
    return verdict_exit(d.report.at(LClass::HBD) != Membership::unknown);
}

int Runner::line_cmd()
{
    LineWeight w;
    if (o_.form == "example")
        w = example_line_weight(o_.alpha);
    else if (o_.form == "symmetric")
        w = symmetric_line_weight(o_.alpha);
    else
        throw InputError("--form must be 'example' or 'symmetric'");
    auto c = classify_weighted_line(w, o_.p);
    io::write_report(dir_ / "line_classify.json", { { "command", "line-classify" }, { "p", o_.p }, { "alpha", o_.alpha }, { "form", o_.form }, { "result", io::line_classification_to_json(c) } }, stamp());
    std::string classes;
    if (c.pos_hyperbolic && c.neg_hyperbolic)
        classes = "not in O^p_HBD (nonconstant bounded finite-energy p-harmonic function)";
    else if (c.pos_hyperbolic || c.neg_hyperbolic)
        classes = "(O^p_QB ∩ O^p_QD) ∖ O^p_HP";
    else
        classes = "O^p_para, O^p_QP ∩ O^p_QD";
    say(std::string("end −∞: ") + (c.neg_hyperbolic ? "hyperbolic" : "parabolic") + "; end +∞: " + (c.pos_hyperbolic ? "hyperbolic" : "parabolic") + "; classes: " + classes);
    return ExitCode::ok;
}

int Runner::scenario_cmd()
{
    if (o_.name.empty())
        throw InputError("--name is required");
    Scenario sc = build_scenario(scenario_spec(o_.name));
    const Exhaustion& ex = *sc.exhaustion;
    json chains = json::array();
    for (const auto& [k, c] : sc.chains)
        chains.push_back({ { "name", k }, { "length", c.length() }, { "F_1_size", c.at(1).size() } });
    json levels = json::array();
    for (int m = 1; m <= ex.level_count(); ++m)
        levels.push_back(ex.level_size(m));
    io::write_report(dir_ / "scenario.json",
                     { { "command", "scenario" }, { "scenario", io::scenario_to_json(sc.spec) }, { "description", sc.description }, { "nodes", ex.universe().node_count() }, { "edges", ex.universe().edge_count() }, { "level_sizes", std::move(levels) }, { "radii", ex.radii() }, { "chains", std::move(chains) } },
                     stamp());
    io::write_text(dir_ / "scenario_graph.json", io::graph_to_json(ex.universe()).dump() + "\n");
    io::write_text(dir_ / "scenario_exhaustion.json", json{ { "scenario", io::scenario_to_json(sc.spec) } }.dump(2) + "\n");
    say(sc.description);
    say(std::to_string(ex.universe().node_count()) + " nodes, " + std::to_string(ex.universe().edge_count()) + " edges, " + std::to_string(ex.level_count()) + " levels");
    for (const auto& [k, c] : sc.chains)
        say("chain " + k + " (length " + std::to_string(c.length()) + ")");
    return ExitCode::ok;
}

int Runner::bump_cmd()
{
    auto b = bump_sum_energy(o_.dim, o_.p, o_.J, o_.h);
    json per = json::array();
    for (std::size_t j = 0; j < b.per_bump.size(); ++j)
        per.push_back({ { "j", j }, { "discrete", b.per_bump[j] }, { "analytic", b.per_bump_analytic[j] } });
    double rel = b.analytic > 0 ? std::abs(b.discrete - b.analytic) / b.analytic : 0.0;
    io::write_report(dir_ / "bump_energy.json",
                     { { "command", "bump-energy" }, { "n", o_.dim }, { "p", o_.p }, { "J", o_.J }, { "h", o_.h }, { "discrete", b.discrete }, { "analytic", b.analytic }, { "relative_error", rel }, { "ratio_expected", std::pow(2.0, o_.dim - o_.p) }, { "per_bump", std::move(per) } },
                     stamp());
    std::ostringstream os;
    os.precision(10);
    os << "discrete " << b.discrete << ", analytic " << b.analytic << ", relative error " << rel;
    say(os.str());
    return ExitCode::ok;
}

void add_common(CLI::App* sub, Options& o)
{
    sub->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
    sub->add_flag("--no-timestamp", o.no_timestamp, "Omit the timestamp line from reports");
    sub->add_flag("--strict", o.strict, "Exit 2 when a required verdict is inconclusive");
    sub->add_flag("--quiet", o.quiet, "Print nothing on success");
}

void add_p(CLI::App* sub, Options& o)
{
    sub->add_option("--p", o.p, "Exponent p > 1")->capture_default_str();
}

void add_solver(CLI::App* sub, Options& o)
{
    sub->add_option("--tol", o.tol, "Solver tolerance")->capture_default_str();
    sub->add_option("--threads", o.threads, "Worker threads (default: PMOD_THREADS or 1)");
}

void add_graph_pair(CLI::App* sub, Options& o)
{
    sub->add_option("--graph", o.graph, "Graph file")->required();
    sub->add_option("--E", o.E, "Node set: file, left, right or id list")->required();
    sub->add_option("--F", o.F, "Node set: file, left, right or id list")->required();
}

void add_exhaustion(CLI::App* sub, Options& o)
{
    sub->add_option("--exhaustion", o.exhaustion, "Exhaustion file");
    sub->add_option("--scenario", o.scenario, "Scenario name instead of an exhaustion file");
    sub->add_option("--param", o.params, "Scenario parameter key=value (repeatable)");
    sub->add_option("--depth", o.depth, "Depth at which ends are built")->capture_default_str();
}

void add_classify(CLI::App* sub, Options& o)
{
    sub->add_option("--schedule", o.schedule, "Chain indices n, comma separated");
    sub->add_option("--inner-tol", o.inner_tol, "Truncation stabilization tolerance")->capture_default_str();
    sub->add_option("--delta-hyp", o.delta_hyp)->capture_default_str();
    sub->add_option("--delta-par", o.delta_par)->capture_default_str();
    sub->add_option("--slope-hyp", o.slope_hyp)->capture_default_str();
    sub->add_option("--slope-par", o.slope_par)->capture_default_str();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{ "p-modulus, capacity and Liouville-class computations on weighted graphs" };
    app.name("pmod");
    app.require_subcommand(1);

    std::map<std::string, std::function<int(Runner&)>> commands;
    auto sub = [&](const char* name, const char* help, int (Runner::*fn)()) {
        auto* s = app.add_subcommand(name, help);
        add_common(s, o);
        commands[name] = [fn](Runner& r) { return (r.*fn)(); };
        return s;
    };

    auto* s = sub("capacity", "Dirichlet capacity cap_p(E, F) on a graph", &Runner::capacity_cmd);
    add_graph_pair(s, o), add_p(s, o), add_solver(s, o);
    s = sub("modulus", "p-modulus of curves joining E and F", &Runner::modulus_cmd);
    add_graph_pair(s, o), add_p(s, o), add_solver(s, o);
    s->add_option("--modulus-tol", o.modulus_tol, "Relative duality-gap tolerance")->capture_default_str();
    s = sub("harmonic", "Dirichlet p-harmonic solve", &Runner::harmonic_cmd);
    s->add_option("--graph", o.graph, "Graph file")->required();
    s->add_option("--boundary", o.boundary, "Boundary file [{node, value}]")->required();
    s->add_flag("--log", o.log, "Write the iteration log");
    add_p(s, o), add_solver(s, o);
    s = sub("verify-duality", "Compare Mod_p and cap_p on one instance", &Runner::duality_cmd);
    add_graph_pair(s, o), add_p(s, o), add_solver(s, o);
    s->add_option("--modulus-tol", o.modulus_tol, "Relative duality-gap tolerance")->capture_default_str();
    s = sub("ends", "Build the ends at --depth and classify each", &Runner::ends_cmd);
    add_exhaustion(s, o), add_p(s, o), add_solver(s, o), add_classify(s, o);
    s = sub("classify-space", "Hyperbolic or parabolic verdict for the space", &Runner::space_cmd);
    add_exhaustion(s, o), add_p(s, o), add_solver(s, o), add_classify(s, o);
    s = sub("sequence", "Verdict for a user chain", &Runner::sequence_cmd);
    add_exhaustion(s, o), add_p(s, o), add_solver(s, o), add_classify(s, o);
    s->add_option("--chain", o.chain, "Chain file or scenario chain name")->required();
    s = sub("separated", "Well-separation test for two chains", &Runner::separated_cmd);
    add_exhaustion(s, o), add_p(s, o), add_solver(s, o);
    s->add_option("--F", o.F, "First chain")->required();
    s->add_option("--G", o.G, "Second chain")->required();
    s->add_option("--sep-tol", o.sep_tol, "Relative change tolerance")->capture_default_str();
    s = sub("construct", "Bounded finite-energy p-harmonic function from two chains", &Runner::construct_cmd);
    add_exhaustion(s, o), add_p(s, o), add_solver(s, o), add_classify(s, o);
    s->add_option("--F", o.F, "Chain where u -> 0")->required();
    s->add_option("--G", o.G, "Chain where u -> 1")->required();
    s->add_option("--ball-radius", o.ball_radius, "Ball for oscillation and stabilization")->capture_default_str();
    s = sub("decide", "Liouville class report (O^p_HBD decision)", &Runner::decide_cmd);
    add_exhaustion(s, o), add_p(s, o), add_solver(s, o), add_classify(s, o);
    s->add_option("--candidates", o.candidates, "Extra candidate chains")->delimiter(',');
    s->add_option("--ball-radius", o.ball_radius, "Ball for oscillation and stabilization")->capture_default_str();
    s = sub("line-classify", "Exact classification of a weighted line with power tails", &Runner::line_cmd);
    add_p(s, o);
    s->add_option("--alpha", o.alpha, "Tail exponent")->capture_default_str();
    s->add_option("--form", o.form, "example: |x|^alpha for x <= -1; symmetric: (1+|x|)^alpha")->capture_default_str();
    s = sub("scenario", "Build a scenario and dump it", &Runner::scenario_cmd);
    s->add_option("--name", o.name, "Scenario name")->required();
    s->add_option("--param", o.params, "Parameter key=value (repeatable)");
    s = sub("bump-energy", "Energy of the bump sum against its closed form", &Runner::bump_cmd);
    s->add_option("--n", o.dim, "Dimension")->capture_default_str();
    add_p(s, o);
    s->add_option("--J", o.J, "Last bump index")->capture_default_str();
    s->add_option("--mesh", o.h, "Mesh size h")->capture_default_str();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? ExitCode::ok : ExitCode::input_error;
    }

    try {
        if (!(o.p > 1.0) || !std::isfinite(o.p))
            throw InputError("p must be a finite number > 1");
        Runner r(o, out);
        for (auto* parsed : app.get_subcommands())
            return commands.at(parsed->get_name())(r);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::input_error;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::input_error;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::input_error;
    }
    return ExitCode::input_error;
}

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace pmod::cli
