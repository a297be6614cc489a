#pragma once

// Builders for the model spaces: weighted lines, weighted planes, a
// half-plane with a strip, a weighted binary tree and the integer grids,
// plus the bump-sum energy check.

#include "pmod/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace pmod {

struct ScenarioSpec
{
    std::string name;
    std::map<std::string, double> numbers;
    std::map<std::string, std::string> options;

    double number(const std::string& key, double fallback) const;
    std::string option(const std::string& key, const std::string& fallback) const;
};

struct Scenario
{
    ScenarioSpec spec;
    ExhaustionPtr exhaustion;
    /// Designated chains by name, e.g. "end_pos", "sector_right".
    std::map<std::string, Chain> chains;
    std::string description;

    const Chain& chain(const std::string& name) const;
};

/// Known names: weighted_line, weighted_plane_sector, halfplane_strip,
/// binary_tree, grid_zn. Unknown names and out-of-range parameters throw
/// InputError.
///
/// Grids use mesh h (1/h must be an integer) and `depth` levels; level m is
/// the part of the space in the box [-m, m]^n (the tree: depth <= m). Nodes
/// are numbered by level, then lexicographically by coordinates. Edges have
/// len = h and mu = h^n times the mean endpoint weight. Radii R_n = n.
Scenario build_scenario(const ScenarioSpec& spec);

std::vector<std::string> scenario_names();

struct BumpEnergy
{
    double discrete;
    double analytic;
    /// Discrete energy of bump j alone, j = 0..J.
    std::vector<double> per_bump;
    std::vector<double> per_bump_analytic;
};

/// u(x) = Σ_{j<=J} (1 - 2^{-j} |x - 4^j e_1|)_+ on R^n, meshed with spacing h
/// on a local grid around each bump. Requires p > n.
BumpEnergy bump_sum_energy(int n, double p, int J, double h);

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

} // namespace pmod
