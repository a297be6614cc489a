#include "pmod/io.hpp"

#include "pmod/error.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace pmod::io {

namespace {

// JSON has no infinities; they travel as strings.
json num(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

void sanitize(json& j)
{
    if (j.is_number_float())
        j = num(j.get<double>());
    else if (j.is_structured())
        for (auto& v : j)
            sanitize(v);
}

json opt(const std::optional<double>& v)
{
    return v ? num(*v) : json(nullptr);
}

template <class T>
T get(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
        throw InputError(where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InputError(where + ": field '" + key + "' has the wrong type");
    }
}

NodeId node_id(const json& v, const std::string& where)
{
    if (!v.is_number_integer())
        throw InputError(where + ": node ids must be integers");
    return v.get<NodeId>();
}

std::string timestamp_now()
{
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ofstream open_out(const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write " + path.string());
    return out;
}

} // namespace

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path.string() + ": malformed document: " + e.what());
    }
}

GraphPtr graph_from_json(const json& j)
{
    const std::string where = "graph";
    auto nodes = get<json>(j, "nodes", where);
    auto edges = get<json>(j, "edges", where);
    if (!nodes.is_array() || !edges.is_array())
        throw InputError("graph: nodes and edges must be arrays");
    const std::size_t n = nodes.size();
    std::vector<char> seen(n, 0);
    std::vector<double> coords;
    int dim = -1;
    for (const auto& node : nodes) {
        NodeId id = node_id(node.is_object() && node.contains("id") ? node["id"] : node, where);
        if (id < 0 || static_cast<std::size_t>(id) >= n || seen[static_cast<std::size_t>(id)])
            throw InputError("graph: node ids must be exactly 0.." + std::to_string(n - 1));
        seen[static_cast<std::size_t>(id)] = 1;
        int d = node.is_object() && node.contains("pos") ? static_cast<int>(node["pos"].size()) : 0;
        if (dim < 0)
            dim = d;
        else if (d != dim)
            throw InputError("graph: positions must be given for all nodes or none, with one dimension");
    }
    dim = std::max(dim, 0);
    if (dim > 0) {
        coords.assign(n * static_cast<std::size_t>(dim), 0.0);
        for (const auto& node : nodes) {
            auto id = static_cast<std::size_t>(node["id"].get<NodeId>());
            for (int k = 0; k < dim; ++k)
                coords[id * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] = node["pos"][static_cast<std::size_t>(k)].get<double>();
        }
    }
    std::vector<Edge> es;
    es.reserve(edges.size());
    for (const auto& e : edges)
        es.push_back({ node_id(get<json>(e, "u", "edge"), where), node_id(get<json>(e, "v", "edge"), where), get<double>(e, "len", "edge"), get<double>(e, "mu", "edge") });
    return std::make_shared<const MetricGraph>(n, std::move(es), std::move(coords), dim);
}

json graph_to_json(const MetricGraph& g)
{
    json nodes = json::array();
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        json node = { { "id", i } };
        if (g.dimension() > 0) {
            auto pos = g.position(static_cast<NodeId>(i));
            node["pos"] = std::vector<double>(pos.begin(), pos.end());
        }
        nodes.push_back(std::move(node));
    }
    json edges = json::array();
    for (const Edge& e : g.edges())
        edges.push_back({ { "u", e.u }, { "v", e.v }, { "len", e.len }, { "mu", e.mu } });
    return { { "nodes", std::move(nodes) }, { "edges", std::move(edges) } };
}

GraphPtr read_graph(const fs::path& path)
{
    return graph_from_json(read_json(path));
}

NodeSet nodeset_from_json(const json& j)
{
    if (!j.is_array())
        throw InputError("node set must be an array of node ids");
    std::vector<NodeId> ids;
    for (const auto& v : j)
        ids.push_back(node_id(v, "node set"));
    return NodeSet(std::move(ids));
}

std::vector<BoundaryValue> boundary_from_json(const json& j)
{
    if (!j.is_array())
        throw InputError("boundary must be an array of {node, value}");
    std::vector<BoundaryValue> out;
    for (const auto& b : j)
        out.push_back({ node_id(get<json>(b, "node", "boundary"), "boundary"), get<double>(b, "value", "boundary") });
    return out;
}

ScenarioSpec scenario_from_json(const json& j)
{
    ScenarioSpec spec;
    spec.name = get<std::string>(j, "name", "scenario");
    if (j.contains("params")) {
        if (!j["params"].is_object())
            throw InputError("scenario: params must be an object");
        for (const auto& [k, v] : j["params"].items()) {
            if (v.is_number())
                spec.numbers[k] = v.get<double>();
            else if (v.is_string())
                spec.options[k] = v.get<std::string>();
            else
                throw InputError("scenario: parameter '" + k + "' must be a number or a string");
        }
    }
    return spec;
}

json scenario_to_json(const ScenarioSpec& spec)
{
    json params = json::object();
    for (const auto& [k, v] : spec.numbers)
        params[k] = v;
    for (const auto& [k, v] : spec.options)
        params[k] = v;
    return { { "name", spec.name }, { "params", std::move(params) } };
}

LoadedExhaustion exhaustion_from_json(const json& j, const fs::path& dir)
{
    if (j.is_object() && j.contains("scenario")) {
        Scenario sc = build_scenario(scenario_from_json(j["scenario"]));
        ExhaustionPtr ex = sc.exhaustion;
        return { ex, std::move(sc) };
    }
    auto paths = get<std::vector<std::string>>(j, "graphs", "exhaustion");
    auto radii = get<std::vector<double>>(j, "radii", "exhaustion");
    NodeId base = j.contains("base") ? node_id(j["base"], "exhaustion") : 0;
    NodeSet outer = j.contains("outer_frontier") ? nodeset_from_json(j["outer_frontier"]) : NodeSet{};
    if (paths.empty())
        throw InputError("exhaustion: at least one level graph is required");
    std::vector<GraphPtr> levels;
    for (const auto& p : paths) {
        fs::path path = fs::path(p).is_absolute() ? fs::path(p) : dir / p;
        levels.push_back(read_graph(path));
    }
    std::vector<std::size_t> sizes;
    for (std::size_t m = 0; m < levels.size(); ++m) {
        sizes.push_back(levels[m]->node_count());
        if (m == 0)
            continue;
        if (sizes[m] < sizes[m - 1])
            throw InputError("exhaustion: level " + std::to_string(m + 1) + " is smaller than level " + std::to_string(m));
        MetricGraph prefix = levels[m]->induced_prefix(sizes[m - 1], false);
        auto key = [](const MetricGraph& g) {
            std::vector<std::tuple<NodeId, NodeId, double, double>> k;
            for (const Edge& e : g.edges())
                k.emplace_back(std::min(e.u, e.v), std::max(e.u, e.v), e.len, e.mu);
            std::sort(k.begin(), k.end());
            return k;
        };
        if (key(prefix) != key(*levels[m - 1]))
            throw InputError("exhaustion: level " + std::to_string(m) + " is not the induced prefix of level " + std::to_string(m + 1));
    }
    auto ex = std::make_shared<const Exhaustion>(levels.back(), std::move(sizes), std::move(radii), base, std::move(outer));
    return { ex, std::nullopt };
}

LoadedExhaustion read_exhaustion(const fs::path& path)
{
    return exhaustion_from_json(read_json(path), path.parent_path());
}

void write_exhaustion(const fs::path& path, const Exhaustion& ex)
{
    json graphs = json::array();
    for (int m = 1; m <= ex.level_count(); ++m) {
        std::string name = path.stem().string() + "_G" + std::to_string(m) + ".json";
        auto out = open_out(path.parent_path() / name);
        out << graph_to_json(*ex.level(m)).dump() << '\n';
        graphs.push_back(name);
    }
    json j = { { "graphs", std::move(graphs) }, { "radii", ex.radii() }, { "base", ex.base() }, { "outer_frontier", ex.outer_frontier().ids() } };
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

Chain chain_from_json(const json& j, const ExhaustionPtr& ex, const std::string& fallback_label)
{
    json sets = j.is_object() ? get<json>(j, "sets", "chain") : j;
    std::string label = j.is_object() && j.contains("label") ? j["label"].get<std::string>() : fallback_label;
    if (!sets.is_array() || sets.empty())
        throw InputError("chain: sets must be a nonempty array of node-id arrays");
    std::vector<NodeSet> out;
    for (const auto& s : sets) {
        NodeSet ns = nodeset_from_json(s);
        ex->universe().check_nodes(ns);
        out.push_back(std::move(ns));
    }
    return Chain::from_sets(ex, std::move(out), Chain::Origin::user_supplied, label);
}

json thresholds_to_json(const Thresholds& t)
{
    return { { "delta_hyp", t.delta_hyp }, { "delta_par", t.delta_par }, { "slope_hyp", t.slope_hyp }, { "slope_par", t.slope_par }, { "noise_floor", t.noise_floor }, { "min_points", t.min_points } };
}

json solver_to_json(const SolverOptions& s)
{
    return { { "tol", s.tol }, { "max_sweeps", s.max_sweeps }, { "max_newton", s.max_newton } };
}

json solve_report_to_json(const SolveReport& r)
{
    return { { "converged", r.converged }, { "newton_steps", r.newton_steps }, { "sweeps", r.sweeps }, { "residual", num(r.residual) }, { "energy", num(r.energy) }, { "relative_decrease", num(r.relative_decrease) } };
}

json analysis_to_json(const SequenceAnalysis& a)
{
    json fits = json::array();
    for (const auto& f : a.fits) {
        json params = json::array();
        for (double v : f.params)
            params.push_back(num(v));
        fits.push_back({ { "model", f.name }, { "formula", f.formula }, { "params", std::move(params) }, { "rms", num(f.rms) }, { "limit", num(f.limit) }, { "positive_limit_class", f.positive_class } });
    }
    return { { "verdict", to_string(a.verdict) },
             { "limit", num(a.limit) },
             { "growth_exponent", opt(a.growth_exponent) },
             { "resistance", num(a.resistance) },
             { "resistance_limit", num(a.resistance_limit) },
             { "aitken", opt(a.aitken) },
             { "monotone", a.monotone },
             { "best_positive_rms", num(a.best_positive_rms) },
             { "best_zero_rms", num(a.best_zero_rms) },
             { "fits", std::move(fits) },
             { "notes", a.notes } };
}

json verdict_to_json(const HyperbolicityVerdict& v)
{
    json table = json::array();
    for (const auto& pt : v.points)
        table.push_back({ { "n", pt.n }, { "a_n", num(pt.value) }, { "level", pt.level }, { "exact", pt.exact }, { "converged", pt.converged }, { "change", opt(pt.change) } });
    return { { "target", v.target },
             { "p", v.p },
             { "verdict", to_string(v.verdict) },
             { "a_n", std::move(table) },
             { "extrapolation", analysis_to_json(v.analysis) },
             { "thresholds", thresholds_to_json(v.thresholds) },
             { "inner_tol", v.inner_tol },
             { "all_converged", v.all_converged },
             { "notes", v.notes } };
}

json separation_to_json(const SeparationReport& s)
{
    json levels = json::array();
    for (std::size_t i = 0; i < s.levels.size(); ++i)
        levels.push_back({ { "level", s.levels[i] }, { "cap_F1_G1", num(s.estimates[i]) }, { "change", i == 0 ? json(nullptr) : num(s.changes[i - 1]) } });
    return { { "status", to_string(s.status) }, { "separated", s.separated }, { "sep_tol", s.tol }, { "log_slope", num(s.log_slope) }, { "levels", std::move(levels) } };
}

json pair_to_json(const PairReport& r)
{
    json values = json::array();
    for (std::size_t i = 0; i < r.indices.size(); ++i)
        values.push_back({ { "n", r.indices[i] }, { "cap_Fn_Gn", num(r.pair_values[i]) } });
    json out = { { "conclusive", r.conclusive },
                 { "f_verdict", to_string(r.f_verdict) },
                 { "g_verdict", to_string(r.g_verdict) },
                 { "separation", separation_to_json(r.separation) },
                 { "pair_values", std::move(values) },
                 { "pair_analysis", analysis_to_json(r.pair_analysis) },
                 { "cross_check_consistent", r.cross_check_consistent },
                 { "notes", r.notes } };
    if (r.f_direct)
        out["f_direct"] = verdict_to_json(*r.f_direct);
    if (r.g_direct)
        out["g_direct"] = verdict_to_json(*r.g_direct);
    return out;
}

json construction_to_json(const Construction& c)
{
    json steps = json::array();
    for (std::size_t i = 0; i < c.indices.size(); ++i)
        steps.push_back({ { "n", c.indices[i] },
                          { "energy", num(c.energies[i]) },
                          { "min", num(c.minima[i]) },
                          { "max", num(c.maxima[i]) },
                          { "oscillation", num(c.oscillations[i]) },
                          { "cauchy_sup", i == 0 ? json(nullptr) : num(c.cauchy[i - 1]) } });
    return { { "valid", c.valid },
             { "bounded", c.bounded },
             { "mod_F1_G1", num(c.mod_estimate) },
             { "lim_cap_estimate", num(c.limit_estimate) },
             { "energy_upper_ok", c.energy_upper_ok },
             { "energy_lower_ok", c.energy_lower_ok },
             { "delta", num(c.delta) },
             { "stabilized", c.stabilized },
             { "steps", std::move(steps) },
             { "pair", pair_to_json(c.pair) },
             { "notes", c.notes } };
}

json class_report_to_json(const ClassReport& r)
{
    json classes = json::object();
    for (LClass c : all_classes) {
        auto it = r.support.find(c);
        classes[to_string(c)] = { { "membership", to_string(r.at(c)) }, { "evidence", it == r.support.end() ? std::vector<std::string>{} : it->second } };
    }
    json evidence = json::array();
    for (const auto& e : r.evidence)
        evidence.push_back({ { "id", e.id }, { "summary", e.summary } });
    return { { "subject", r.subject },
             { "p", r.p },
             { "classes", std::move(classes) },
             { "evidence", std::move(evidence) },
             { "lattice_check", { { "consistent", r.consistent() }, { "violations", r.violations } } },
             { "notes", r.notes } };
}

json line_classification_to_json(const LineClassification& c)
{
    json out = { { "end_plus_inf", c.pos_hyperbolic ? "hyperbolic" : "parabolic" },
                 { "end_minus_inf", c.neg_hyperbolic ? "hyperbolic" : "parabolic" },
                 { "finite_part", num(c.finite_part) },
                 { "tail_plus_inf", opt(c.pos_tail) },
                 { "tail_minus_inf", opt(c.neg_tail) },
                 { "report", class_report_to_json(c.report) } };
    if (c.witness) {
        json samples = json::array();
        for (double x : { -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0 })
            samples.push_back({ { "x", x }, { "u", num(c.witness->u(x)) } });
        out["witness"] = { { "total", num(c.witness->total) }, { "samples", std::move(samples) } };
    }
    return out;
}

std::string class_report_table(const ClassReport& r)
{
    std::ostringstream os;
    os << "subject: " << r.subject << "  (p = " << r.p << ")\n";
    os << std::left << std::setw(10) << "class" << std::setw(11) << "verdict" << "evidence\n";
    for (LClass c : all_classes) {
        os << std::setw(10) << to_string(c) << std::setw(11) << to_string(r.at(c));
        auto it = r.support.find(c);
        if (it != r.support.end())
            for (std::size_t i = 0; i < it->second.size(); ++i)
                os << (i ? ", " : "") << it->second[i];
        os << '\n';
    }
    os << "lattice check: " << (r.consistent() ? "consistent" : std::to_string(r.violations.size()) + " violation(s)") << '\n';
    for (const auto& v : r.violations)
        os << "  " << v << '\n';
    return os.str();
}

void write_report(const fs::path& path, json report, bool timestamp)
{
    json doc = json::object();
    if (timestamp)
        doc["timestamp"] = timestamp_now();
    sanitize(report);
    for (auto& [k, v] : report.items())
        doc[k] = std::move(v);
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows)
{
    auto out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << '\n' << std::setprecision(17);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    auto out = open_out(path);
    out << text;
}

std::string decay_svg(const std::string& title, const std::vector<Series>& series)
{
    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (s.x[i] > 0 && s.y[i] > 0) {
                x0 = std::min(x0, std::log10(s.x[i]));
                x1 = std::max(x1, std::log10(s.x[i]));
                y0 = std::min(y0, std::log10(s.y[i]));
                y1 = std::max(y1, std::log10(s.y[i]));
            }
    if (!std::isfinite(x0)) {
        x0 = y0 = 0;
        x1 = y1 = 1;
    }
    x0 = std::floor(x0);
    x1 = std::max(std::ceil(x1), x0 + 1);
    y0 = std::floor(y0);
    y1 = std::max(std::ceil(y1), y0 + 1);
    auto px = [&](double lx) { return L + (lx - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double ly) { return H - B - (ly - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = { "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b" };

    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    for (double k = x0; k <= x1 + 1e-9; k += 1)
        os << "<line x1=\"" << px(k) << "\" y1=\"" << T << "\" x2=\"" << px(k) << "\" y2=\"" << H - B << "\" stroke=\"#ddd\"/>\n"
           << "<text x=\"" << px(k) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">1e" << static_cast<int>(k) << "</text>\n";
    for (double k = y0; k <= y1 + 1e-9; k += 1)
        os << "<line x1=\"" << L << "\" y1=\"" << py(k) << "\" x2=\"" << W - R << "\" y2=\"" << py(k) << "\" stroke=\"#ddd\"/>\n"
           << "<text x=\"" << L - 6 << "\" y=\"" << py(k) + 4 << "\" text-anchor=\"end\">1e" << static_cast<int>(k) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">n</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* c = colors[s % 6];
        std::ostringstream pts;
        pts << std::fixed << std::setprecision(2);
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (!(series[s].x[i] > 0 && series[s].y[i] > 0))
                continue;
            double X = px(std::log10(series[s].x[i])), Y = py(std::log10(series[s].y[i]));
            pts << X << "," << Y << " ";
            os << "<circle cx=\"" << X << "\" cy=\"" << Y << "\" r=\"3\" fill=\"" << c << "\"/>\n";
        }
        os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << c << "\"/>\n";
        os << "<text x=\"" << W - R - 8 << "\" y=\"" << T + 16 + 16 * static_cast<double>(s) << "\" text-anchor=\"end\" fill=\"" << c << "\">" << series[s].label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace pmod::io
