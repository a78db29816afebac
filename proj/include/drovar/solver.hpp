#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drovar/dual_core.hpp"

namespace drovar {

enum class SolveStatus { Converged, BoundaryLambda, MaxIters };

std::string to_string(SolveStatus status);

struct SolverConfig {
  double grad_tol = 1e-9;
  double rel_tol = 1e-12;
  int max_iters = 10000;
  double lambda_floor = 1e-12;
  int multistart_count = 5;

  /// Throws ValidationError if a field is out of range.
  void validate() const;
};

/// A convex objective over dual points, with its analytic gradient.
///
/// Only the coordinates flagged in `free` (lambda, beta, nu) are optimized;
/// the rest keep their starting values. `gradient` may throw
/// NonsmoothPointError, in which case the solver falls back to a
/// derivative-free coordinate search.
struct DualObjective {
  std::function<ExtendedReal(const DualPoint&)> value;
  std::function<DualGradient(const DualPoint&)> gradient;
  std::array<bool, 3> free{true, true, true};
  /// Point at lambda_floor approximating the lambda -> 0 limit of the
  /// objective. When it beats every descent result the solve reports
  /// BoundaryLambda there.
  std::optional<DualPoint> limit_point;
};

struct MinimizeResult {
  DualPoint point;
  double value = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  int iterations = 0;
};

/// Gradient descent with Armijo backtracking in (s, beta, nu), lambda = e^s,
/// run from every start; returns the best start (ties to the lowest index).
///
/// Throws InfeasibleStartError if the objective is +inf at every start.
MinimizeResult minimize_dual(const DualObjective& objective, std::span<const DualPoint> starts,
                             const SolverConfig& config = {});

struct BoundResult {
  double value = 0.0;
  DualPoint dual_point;
  TiltResult tilt;
  Diagnostics diagnostics;
  SolveStatus status = SolveStatus::MaxIters;
  int iterations = 0;
};

enum class Parameterization {
  /// KL: (lambda, nu) with beta eliminated; alpha in (0,1): (beta, nu) with
  /// lambda eliminated; otherwise the full (lambda, beta, nu) objective.
  Auto,
  /// Always the full three-variable objective.
  Generic,
};

/// Deterministic multistart points for the variance objective.
std::vector<DualPoint> default_starts(const ProblemData& data, const EmpiricalMeasure& p,
                                      int count);

/// sup { E_Q[rho] + Var_Q[phi] : D_f(Q, P) <= eta } via the dual.
BoundResult variance_bound(const ProblemData& data, const EmpiricalMeasure& p,
                           const FDivergenceFamily& family, double eta,
                           const SolverConfig& config = {},
                           Parameterization parameterization = Parameterization::Auto);

/// sup { E_Q[values] : D_f(Q, P) <= eta } via the (lambda, beta) dual.
BoundResult mean_bound(std::span<const double> values, const EmpiricalMeasure& p,
                       const FDivergenceFamily& family, double eta,
                       const SolverConfig& config = {});

}  // namespace drovar
