#pragma once

#include <span>
#include <vector>

#include "drovar/divergences.hpp"
#include "drovar/measures.hpp"

namespace drovar {

/// Grid resolution for the brute-force primal search.
struct OracleConfig {
  /// Points per free coordinate; 0 selects 4001 for two atoms and 1201 for
  /// three.
  long grid_per_dim = 0;
  int refine_rounds = 3;
  /// Points per free coordinate in each refinement window; 0 reuses
  /// grid_per_dim.
  long refine_points = 201;
  /// Spacing shrink factor per refinement round.
  double zoom = 100.0;
  /// Use the serial reference sweep instead of the OpenMP kernel.
  bool serial = false;

  void validate() const;
  long points_for(std::size_t atoms) const;
};

struct OracleResult {
  double value = 0.0;
  /// Maximizing weights; entries may be zero on the simplex boundary.
  std::vector<double> argmax;
};

/// E_Q[rho] + Var_Q[phi] by direct weighted sums.
double primal_value(std::span<const double> q, const ProblemData& data);

/// max { E_Q[rho] + Var_Q[phi] : D_f(Q, P) <= eta } over a simplex grid with
/// local refinement around the incumbent. Each grid line also contributes the
/// endpoints of its feasible interval, located by bisection. Feasibility is
/// decided by summing the divergence directly. Supports 1 to 3 atoms; throws
/// UnsupportedSizeError beyond that.
OracleResult primal_sup_grid(const ProblemData& data, const EmpiricalMeasure& p,
                             const FDivergenceFamily& family, double eta,
                             const OracleConfig& config = {});

}  // namespace drovar
