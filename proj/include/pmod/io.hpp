#pragma once

// File formats (graph, node set, boundary, exhaustion, chain, scenario
// spec) and report emission: JSON documents, CSV series, SVG decay plots.

#include "pmod/core.hpp"
#include "pmod/ends.hpp"
#include "pmod/energy.hpp"
#include "pmod/liouville.hpp"
#include "pmod/modulus.hpp"
#include "pmod/scenarios.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pmod::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json read_json(const fs::path& path);

/// {"nodes": [{"id": 0, "pos": [x, y]}, ...], "edges": [{"u", "v", "len", "mu"}]}.
/// Node ids must be exactly 0..N-1; pos is optional but all-or-none.
GraphPtr graph_from_json(const json& j);
json graph_to_json(const MetricGraph& g);
GraphPtr read_graph(const fs::path& path);

/// Array of node ids.
NodeSet nodeset_from_json(const json& j);
/// Array of {"node", "value"}.
std::vector<BoundaryValue> boundary_from_json(const json& j);

/// {"name": ..., "params": {key: number | string}}.
ScenarioSpec scenario_from_json(const json& j);
json scenario_to_json(const ScenarioSpec& spec);

struct LoadedExhaustion
{
    ExhaustionPtr ex;
    std::optional<Scenario> scenario;
};

/// Either {"scenario": {name, params}} or {"graphs": [paths of G_1..G_M],
/// "radii": [...], "base": id, "outer_frontier": [...]}. Each level graph
/// must be the induced prefix of the next; relative paths resolve against
/// the exhaustion file's directory.
LoadedExhaustion exhaustion_from_json(const json& j, const fs::path& dir = {});
LoadedExhaustion read_exhaustion(const fs::path& path);
/// Explicit exhaustion file for a loaded exhaustion, writing its level
/// graphs next to it as <stem>_G<m>.json.
void write_exhaustion(const fs::path& path, const Exhaustion& ex);

/// {"label": ..., "sets": [[ids of F_1], [ids of F_2], ...]} or the bare
/// array of sets.
Chain chain_from_json(const json& j, const ExhaustionPtr& ex, const std::string& fallback_label);

json thresholds_to_json(const Thresholds& t);
json solver_to_json(const SolverOptions& s);
json solve_report_to_json(const SolveReport& r);
json analysis_to_json(const SequenceAnalysis& a);
json verdict_to_json(const HyperbolicityVerdict& v);
json separation_to_json(const SeparationReport& s);
json pair_to_json(const PairReport& r);
json construction_to_json(const Construction& c);
json class_report_to_json(const ClassReport& r);
json line_classification_to_json(const LineClassification& c);

/// Fixed-width table of class, membership and evidence ids.
std::string class_report_table(const ClassReport& r);

/// Writes `report` pretty-printed. With `timestamp` the first member is
/// "timestamp" (UTC, ISO 8601) so runs differ only on that line.
void write_report(const fs::path& path, json report, bool timestamp);

/// Reals with 17 significant digits.
void write_csv(const fs::path& path, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

struct Series
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Log-log plot of positive series; nonpositive points are dropped.
std::string decay_svg(const std::string& title, const std::vector<Series>& series);
void write_text(const fs::path& path, const std::string& text);

} // namespace pmod::io
