#pragma once

// p-modulus of connecting curve families by constraint generation, and the
// modulus/capacity comparison.

#include "pmod/core.hpp"
#include "pmod/energy.hpp"

#include <iosfwd>
#include <vector>

namespace pmod {

/// Edge density rho >= 0, indexed by edge id.
struct Density
{
    std::vector<double> rho;
};

/// Simple edge path; nodes.size() == edges.size() + 1.
struct Path
{
    std::vector<NodeId> nodes;
    std::vector<EdgeId> edges;
};

double rho_length(const MetricGraph& g, const Density& d, const Path& path);

/// Σ mu rho^p.
double density_energy(const MetricGraph& g, const Density& d, double p);

struct ShortestPath
{
    double length; // +inf when F is unreachable from E
    Path path;
};

/// Shortest E-F path under edge weights rho*len. Among equal-length paths
/// the fewest-hop ones are preferred, then the lexicographically smallest
/// node sequence.
ShortestPath shortest_rho_path(const MetricGraph& g, const Density& d, const NodeSet& E, const NodeSet& F);

struct ModulusOptions
{
    /// Relative duality gap and feasibility tolerance.
    double tol = 1e-6;
    int max_rounds = 5000;
    int max_inner_sweeps = 20000;
    /// Seed the working set from a path decomposition of the capacity
    /// potential's flux.
    bool warm_start = true;
    SolverOptions solver = {};
};

struct ModulusResult
{
    /// Σ mu rho^p of the returned density, which is admissible (its shortest
    /// E-F path has rho-length exactly 1 up to rounding).
    double value = 0.0;
    /// Dual value of the path multipliers; value - lower_bound is the gap.
    double lower_bound = 0.0;
    double relative_gap = 0.0;
    bool converged = false;
    int rounds = 0;
    /// rho-length of the shortest path before rescaling to admissibility.
    double shortest_length = 0.0;
    Density density;
    std::vector<Path> active_paths;
    std::vector<double> multipliers;
};

/// Mod_p of all curves joining E to F. Disconnected E and F give 0 with an
/// empty (all-zero) density.
ModulusResult modulus_connect(GraphPtr g, const NodeSet& E, const NodeSet& F, double p, const ModulusOptions& options = {});

/// Modulus of curves from `base` meeting every F_n, n <= depth. For a nested
/// chain every curve ending in F_depth has already met each earlier F_n, so
/// the family is Γ(base, F_depth) on the universe graph.
ModulusResult modulus_traverse(const Exhaustion& ex, const NodeSet& base, const Chain& chain, int depth, double p, const ModulusOptions& options = {});

struct DualityReport
{
    double modulus;
    double modulus_lower;
    double capacity;
    double relative_gap;
    /// Shortest E-F path length under g_u of the capacity potential (>= 1
    /// makes the gradient admissible).
    double gradient_path_length;
    bool gradient_admissible;
    /// max_e |rho_e - g_u(e)|.
    double density_gradient_gap;
    ModulusResult modulus_result;
    CapacityResult capacity_result;
};

DualityReport verify_mod_eq_cap(GraphPtr g, const NodeSet& E, const NodeSet& F, double p, const ModulusOptions& options = {});

void write_density_csv(std::ostream& out, const MetricGraph& g, const Density& d);
void write_paths(std::ostream& out, const std::vector<Path>& paths);

} // namespace pmod
