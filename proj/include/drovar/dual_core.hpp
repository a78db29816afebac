#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "drovar/divergences.hpp"
#include "drovar/extended_real.hpp"
#include "drovar/measures.hpp"

namespace drovar {

/// Dual variables (lambda, beta, nu). lambda > 0 multiplies the divergence
/// constraint, beta normalizes the tilted measure, and nu = 2 E_Q[phi] at the
/// optimum.
struct DualPoint {
  double lambda = 1.0;
  double beta = 0.0;
  double nu = 0.0;

  friend bool operator==(const DualPoint&, const DualPoint&) = default;
};

/// Partial derivatives of a dual objective in (lambda, beta, nu).
struct DualGradient {
  double d_lambda = 0.0;
  double d_beta = 0.0;
  double d_nu = 0.0;
};

/// A convex g with its conjugate g* and (g*)'. The variance objective uses
/// g(z) = z^2, g*(nu) = nu^2 / 4.
struct ConjugatePair {
  std::function<double(double)> g;
  std::function<double(double)> g_conj;
  std::function<double(double)> g_conj_deriv;

  static ConjugatePair quarter_square();
  /// g(z) = z^4 / 4, g*(nu) = (3/4) |nu|^{4/3}.
  static ConjugatePair quartic();
};

/// Checks g(z) + g*(nu) >= z nu - 1e-9 on 100 random (z, nu) pairs.
bool satisfies_fenchel_young(const ConjugatePair& pair, std::uint64_t seed = 7);

/// Worst-case tilt recovered from a dual point.
struct TiltResult {
  /// p_i (f*)'(Psi_i); not renormalized.
  std::vector<double> weights;
  /// Psi_i = (psi_i - nu phi_i - beta) / lambda
  std::vector<double> psi;
};

/// First-order optimality report at a dual point. At an interior optimum
/// normalization == 1, achieved_divergence == eta, mean_condition_gap == 0.
struct Diagnostics {
  double normalization = 0.0;
  ExtendedReal achieved_divergence = 0.0;
  /// E_Q[phi] - nu / 2; empty for mean-only bounds.
  std::optional<double> mean_condition_gap;
  bool boundary_flag = false;
};

/// Throws ValidationError unless 0 < eta < divergence_cap.
void validate_eta(const FDivergenceFamily& family, double eta);

/// nu^2/4 + beta + eta lambda + lambda E_P[f*((rho + phi^2 - nu phi - beta) / lambda)]
ExtendedReal dual_objective_variance(const DualPoint& dp, const ProblemData& data,
                                     const EmpiricalMeasure& p, const FDivergenceFamily& family,
                                     double eta);

/// beta + eta lambda + lambda E_P[f*((values - beta) / lambda)]
ExtendedReal dual_objective_mean(double lambda, double beta, std::span<const double> values,
                                 const EmpiricalMeasure& p, const FDivergenceFamily& family,
                                 double eta);

/// g*(nu) + beta + eta lambda + lambda E_P[f*((psi - nu phi - beta) / lambda)]
ExtendedReal dual_objective_general(const DualPoint& dp, std::span<const double> psi,
                                    std::span<const double> phi, const ConjugatePair& pair,
                                    const EmpiricalMeasure& p, const FDivergenceFamily& family,
                                    double eta);

/// KL objective with beta minimized out:
/// nu^2/4 + eta lambda + lambda log E_P[exp((rho + phi^2 - nu phi) / lambda)]
double kl_reduced_objective(double lambda, double nu, const ProblemData& data,
                            const EmpiricalMeasure& p, double eta);

/// Minimizing beta for the KL objective at (lambda, nu):
/// lambda (log E_P[exp((rho + phi^2 - nu phi) / lambda)] - 1)
double kl_optimal_beta(double lambda, double nu, const ProblemData& data,
                       const EmpiricalMeasure& p);

/// Gradient of kl_reduced_objective; d_beta is always 0.
DualGradient gradient_kl_reduced(double lambda, double nu, const ProblemData& data,
                                 const EmpiricalMeasure& p, double eta);

/// alpha-divergence (alpha in (0,1)) objective with lambda minimized out.
/// +inf unless rho + phi^2 - nu phi - beta < 0 at every atom.
ExtendedReal alpha_reduced_objective(double beta, double nu, const ProblemData& data,
                                     const EmpiricalMeasure& p, double alpha, double eta);

/// Minimizing lambda of the inner problem at a feasible (beta, nu).
double alpha_optimal_lambda(double beta, double nu, const ProblemData& data,
                            const EmpiricalMeasure& p, double alpha, double eta);

/// Gradient of alpha_reduced_objective; d_lambda is always 0. Throws
/// NonsmoothPointError when the objective is infinite.
DualGradient gradient_alpha_reduced(double beta, double nu, const ProblemData& data,
                                    const EmpiricalMeasure& p, double alpha, double eta);

/// Analytic gradient of dual_objective_variance. Throws NonsmoothPointError
/// unless every conjugate argument lies in the interior of dom f*.
DualGradient gradient_variance(const DualPoint& dp, const ProblemData& data,
                               const EmpiricalMeasure& p, const FDivergenceFamily& family,
                               double eta);

DualGradient gradient_general(const DualPoint& dp, std::span<const double> psi,
                              std::span<const double> phi, const ConjugatePair& pair,
                              const EmpiricalMeasure& p, const FDivergenceFamily& family,
                              double eta);

/// Gradient of dual_objective_mean; d_nu is always 0.
DualGradient gradient_mean(double lambda, double beta, std::span<const double> values,
                           const EmpiricalMeasure& p, const FDivergenceFamily& family, double eta);

/// dQ = (f*)'(Psi) dP at a dual point. Throws NonsmoothPointError if some
/// Psi_i falls outside dom f*.
TiltResult tilt(const DualPoint& dp, const ProblemData& data, const EmpiricalMeasure& p,
                const FDivergenceFamily& family);

/// Tilt of the mean objective: Psi_i = (values_i - beta) / lambda.
TiltResult tilt_mean(double lambda, double beta, std::span<const double> values,
                     const EmpiricalMeasure& p, const FDivergenceFamily& family);

Diagnostics optimality_diagnostics(const DualPoint& dp, const ProblemData& data,
                                   const EmpiricalMeasure& p, const FDivergenceFamily& family,
                                   double eta, bool boundary_flag = false);

}  // namespace drovar
