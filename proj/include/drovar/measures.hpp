#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "drovar/divergences.hpp"
#include "drovar/extended_real.hpp"

namespace drovar {

/// Probability weights on a finite, positionally indexed set of atoms.
/// Every weight is strictly positive and the weights sum to 1 (1e-12).
class EmpiricalMeasure {
public:
  /// Throws ValidationError if a weight is not strictly positive or the
  /// weights do not sum to one.
  explicit EmpiricalMeasure(std::vector<double> weights);

  static EmpiricalMeasure uniform(std::size_t n);

  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

private:
  std::vector<double> weights_;
};

/// Per-atom cost rho and penalized quantity phi, aligned with a measure.
class ProblemData {
public:
  /// Throws ValidationError on empty input, length mismatch or non-finite
  /// entries.
  ProblemData(std::vector<double> rho, std::vector<double> phi);

  std::size_t size() const { return rho_.size(); }
  std::span<const double> rho() const { return rho_; }
  std::span<const double> phi() const { return phi_; }
  /// psi_i = rho_i + phi_i^2
  std::vector<double> psi() const;

private:
  std::vector<double> rho_;
  std::vector<double> phi_;
};

struct NormalizedWeights {
  EmpiricalMeasure measure;
  /// Indices of the zero-weight entries removed from the raw input.
  std::vector<std::size_t> dropped;
};

/// Scales nonnegative raw weights to sum to one and drops zero entries.
NormalizedWeights normalize(std::span<const double> raw_weights);

/// Neumaier-compensated sum, index-ascending.
class CompensatedSum {
public:
  void add(double x);
  double result() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);
/// sum_i w_i x_i
double weighted_sum(std::span<const double> w, std::span<const double> xs);

/// D_f(q, p) = sum_i p_i f(q_i / p_i). `q` may contain zeros (and need not be
/// normalized); `p` is strictly positive.
ExtendedReal divergence_of(std::span<const double> q, const EmpiricalMeasure& p,
                           const FDivergenceFamily& family);
ExtendedReal divergence_of(const EmpiricalMeasure& q, const EmpiricalMeasure& p,
                           const FDivergenceFamily& family);

/// E_Q[g] - E_P[f*(g)], a lower bound on D_f(Q, P) for every g.
ExtendedReal variational_gap(std::span<const double> g_values, const EmpiricalMeasure& q,
                             const EmpiricalMeasure& p, const FDivergenceFamily& family);

struct MeanVariance {
  double mean;
  /// Population variance, >= 0.
  double variance;
};

MeanVariance mean_var_of(std::span<const double> weights, std::span<const double> values);
MeanVariance mean_var_of(const EmpiricalMeasure& m, std::span<const double> values);

}  // namespace drovar
