#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "drovar/divergences.hpp"
#include "drovar/measures.hpp"
#include "drovar/solver.hpp"

namespace drovar {

/// n scenarios x d columns (d <= 8) with scenario probabilities. A decision
/// x yields per-scenario cost rho_i = -<x, row_i> and penalized quantity
/// phi_i = <x, row_i>, i.e. a mean-variance portfolio on scenario returns.
class ScenarioMatrix {
public:
  ScenarioMatrix(std::vector<std::vector<double>> rows, EmpiricalMeasure weights);

  std::size_t samples() const { return rows_.size(); }
  std::size_t columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  const EmpiricalMeasure& weights() const { return weights_; }

  /// (rho_x, phi_x) for decision x.
  ProblemData problem_for(std::span<const double> x) const;

private:
  std::vector<std::vector<double>> rows_;
  EmpiricalMeasure weights_;
  std::size_t columns_ = 0;
};

class DecisionConstraint {
public:
  enum class Kind { Box, Simplex };

  /// Componentwise lo <= hi; lo == hi pins that coordinate.
  static DecisionConstraint box(std::vector<double> lo, std::vector<double> hi);
  static DecisionConstraint simplex();

  Kind kind() const { return kind_; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

  /// Euclidean projection onto the feasible set.
  std::vector<double> project(std::span<const double> x) const;
  /// Box centre or simplex barycentre.
  std::vector<double> start(std::size_t dims) const;
  void check_dims(std::size_t dims) const;

private:
  DecisionConstraint(Kind kind, std::vector<double> lo, std::vector<double> hi)
      : kind_(kind), lo_(std::move(lo)), hi_(std::move(hi)) {}

  Kind kind_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// Sorted-threshold Euclidean projection onto { x >= 0, sum x = 1 }.
std::vector<double> project_to_simplex(std::span<const double> x);

/// Inner worst-case bound at decision x.
BoundResult robust_bound(std::span<const double> x, const ScenarioMatrix& scenarios,
                         const FDivergenceFamily& family, double eta,
                         const SolverConfig& config = {});

double robust_objective(std::span<const double> x, const ScenarioMatrix& scenarios,
                        const FDivergenceFamily& family, double eta,
                        const SolverConfig& config = {});

struct RobustSolution {
  std::vector<double> x;
  double value = 0.0;
  /// Objective at the deterministic starting point.
  double start_value = 0.0;
  int iterations = 0;
};

struct NelderMeadConfig {
  double diameter_tol = 1e-6;
  int max_iters = 500;
  /// Initial simplex edge as a fraction of the box width (or absolute for
  /// the probability simplex).
  double initial_step = 0.1;
};

/// min over the constraint set of robust_objective, by Nelder-Mead with
/// projection onto the constraint set. No global-optimality claim.
RobustSolution robust_minimize(const ScenarioMatrix& scenarios, const DecisionConstraint& constraint,
                               const FDivergenceFamily& family, double eta,
                               const SolverConfig& config = {},
                               const NelderMeadConfig& nm = {});

}  // namespace drovar
