#pragma once

// Discrete p-energy, p-harmonic Dirichlet solves, capacities of condenser
// pairs, and p-harmonic extensions on exhaustion truncations.

#include "pmod/core.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pmod {

/// Node potential u together with its edge gradient g_u(e) = |u(x)-u(y)|/len(e).
/// The gradient is always computed from the current values.
class PotentialField
{
  public:
    PotentialField(GraphPtr graph, std::vector<double> values);

    const MetricGraph& graph() const { return *graph_; }
    const GraphPtr& graph_ptr() const { return graph_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](NodeId x) const { return values_[static_cast<std::size_t>(x)]; }

    double gradient(EdgeId e) const;
    std::vector<double> gradients() const;

    double min() const;
    double max() const;
    /// max - min over the nodes of s.
    double oscillation(const NodeSet& s) const;

  private:
    GraphPtr graph_;
    std::vector<double> values_;
};

/// Σ_e mu(e) g_u(e)^p.
double p_energy(const PotentialField& field, double p);
double p_energy(const MetricGraph& g, std::span<const double> u, double p);

struct BoundaryValue
{
    NodeId node;
    double value;
};

struct SolverOptions
{
    /// Bound on the per-node stationarity residual; the relative energy
    /// decrease over the final sweep must also fall below tol², and the
    /// largest node update below tol times the boundary value range.
    double tol = 1e-8;
    int max_sweeps = 100000;
    /// Newton steps (Hessian-preconditioned, line-searched on the energy)
    /// used to reach the basin before the coordinate sweeps.
    int max_newton = 300;
    bool accelerate = true;
    bool record_log = false;
};

struct IterationRecord
{
    int sweep;
    double energy;
    double residual;
};

struct SolveReport
{
    bool converged = false;
    int newton_steps = 0;
    int sweeps = 0;
    double residual = 0.0;
    double energy = 0.0;
    double relative_decrease = 0.0;
    std::vector<IterationRecord> log;
};

struct DirichletProblem
{
    GraphPtr graph;
    std::vector<BoundaryValue> boundary;
    double p = 2.0;
    /// Explicitly request the problem without boundary values; the only
    /// minimizers are then the constants.
    bool free_problem = false;
};

struct Solution
{
    PotentialField field;
    SolveReport report;
};

/// Minimizes the p-energy over fields agreeing with the boundary values by
/// cyclic coordinate descent (each node solves its convex one-dimensional
/// subproblem to machine accuracy), optionally preceded by damped Newton
/// steps. `initial` seeds the free nodes; otherwise the start is a
/// distance-weighted interpolation of the boundary values.
Solution solve_p_harmonic(const DirichletProblem& problem,
                          const SolverOptions& options = {},
                          const std::vector<double>* initial = nullptr);

/// Largest |d/dt| of the one-dimensional energy restriction over nodes not in
/// `fixed` (mask indexed by node id). Each node's slope is taken as the
/// smallest one within a few ulps of its value, which is what floating point
/// can resolve when p < 2.
double stationarity_residual(const MetricGraph& g, std::span<const double> u, const std::vector<char>& fixed, double p);

struct CapacityResult
{
    double value;
    PotentialField witness;
    SolveReport report;
};

/// cap(E, F): energy of the p-harmonic potential that is 1 on E and 0 on F.
CapacityResult capacity(GraphPtr g, const NodeSet& E, const NodeSet& F, double p, const SolverOptions& options = {});

struct ExtensionResult
{
    PotentialField field;
    double energy;
    SolveReport report;
    /// Comparison with the same problem on the previous truncation, when the
    /// prescribed data is nonempty there.
    std::optional<double> previous_energy;
    std::optional<double> energy_change;
    std::optional<double> inner_sup_change;
};

/// p-harmonic extension into Ω = G_m \ {prescribed nodes}, with no condition
/// at the truncation frontier. Prescribed ids refer to the exhaustion's
/// universe and must lie in G_m.
ExtensionResult harmonic_extension(const Exhaustion& ex,
                                   const std::vector<BoundaryValue>& prescribed,
                                   int level,
                                   double p,
                                   const SolverOptions& options = {},
                                   double inner_radius = 1.0);

/// Boundary data 1 on E and 0 on F.
std::vector<BoundaryValue> condenser_boundary(const NodeSet& E, const NodeSet& F);

void check_exponent(double p);

} // namespace pmod
