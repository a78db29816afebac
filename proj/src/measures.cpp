#include "drovar/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "drovar/errors.hpp"

namespace drovar {

namespace {

constexpr double kWeightSumTol = 1e-12;

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": length mismatch (" << a << " vs " << b << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ValidationError("empirical measure needs at least one atom");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw ValidationError("empirical measure weight at index " + std::to_string(i) +
                            " is not strictly positive");
    }
  }
  const double total = compensated_sum(weights_);
  if (std::abs(total - 1.0) > kWeightSumTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "empirical measure weights sum to " << total << ", not 1";
    throw ValidationError(msg.str());
  }
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::size_t n) {
  if (n == 0) throw ValidationError("empirical measure needs at least one atom");
  return EmpiricalMeasure(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ProblemData::ProblemData(std::vector<double> rho, std::vector<double> phi)
    : rho_(std::move(rho)), phi_(std::move(phi)) {
  if (rho_.empty()) throw ValidationError("problem data needs at least one atom");
  require_same_length(rho_.size(), phi_.size(), "problem data rho/phi");
  for (std::size_t i = 0; i < rho_.size(); ++i) {
    if (!std::isfinite(rho_[i]) || !std::isfinite(phi_[i])) {
      throw ValidationError("problem data entry at index " + std::to_string(i) + " is not finite");
    }
  }
}

std::vector<double> ProblemData::psi() const {
  std::vector<double> out(rho_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rho_[i] + phi_[i] * phi_[i];
  return out;
}

NormalizedWeights normalize(std::span<const double> raw_weights) {
  if (raw_weights.empty()) throw ValidationError("no weights given");
  for (std::size_t i = 0; i < raw_weights.size(); ++i) {
    if (!(raw_weights[i] >= 0.0) || !std::isfinite(raw_weights[i])) {
      throw ValidationError("weight at index " + std::to_string(i) +
                            " is negative or not finite");
    }
  }
  const double total = compensated_sum(raw_weights);
  if (!(total > 0.0)) throw ValidationError("all weights are zero (index 0 onward)");

  std::vector<double> kept;
  std::vector<std::size_t> dropped;
  for (std::size_t i = 0; i < raw_weights.size(); ++i) {
    if (raw_weights[i] == 0.0) {
      dropped.push_back(i);
    } else {
      kept.push_back(raw_weights[i] / total);
    }
  }
  // Rescale once more so the stored weights sum to one to rounding.
  const double kept_total = compensated_sum(kept);
  for (double& w : kept) w /= kept_total;
  return {EmpiricalMeasure(std::move(kept)), std::move(dropped)};
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.result();
}

double weighted_sum(std::span<const double> w, std::span<const double> xs) {
  require_same_length(w.size(), xs.size(), "weighted sum");
  CompensatedSum acc;
  for (std::size_t i = 0; i < w.size(); ++i) acc.add(w[i] * xs[i]);
  return acc.result();
}

ExtendedReal divergence_of(std::span<const double> q, const EmpiricalMeasure& p,
                           const FDivergenceFamily& family) {
  require_same_length(q.size(), p.size(), "divergence_of");
  CompensatedSum acc;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const ExtendedReal term = f_eval(family, q[i] / p[i]);
    if (term.is_pos_inf()) return ExtendedReal::pos_inf();
    acc.add(p[i] * term.value());
  }
  return acc.result();
}

ExtendedReal divergence_of(const EmpiricalMeasure& q, const EmpiricalMeasure& p,
                           const FDivergenceFamily& family) {
  return divergence_of(q.weights(), p, family);
}

ExtendedReal variational_gap(std::span<const double> g_values, const EmpiricalMeasure& q,
                             const EmpiricalMeasure& p, const FDivergenceFamily& family) {
  require_same_length(g_values.size(), q.size(), "variational_gap g/q");
  require_same_length(q.size(), p.size(), "variational_gap q/p");
  CompensatedSum conj;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const ExtendedReal c = conj_eval(family, g_values[i]);
    if (c.is_pos_inf()) return ExtendedReal::neg_inf();
    conj.add(p[i] * c.value());
  }
  return weighted_sum(q.weights(), g_values) - conj.result();
}

MeanVariance mean_var_of(std::span<const double> weights, std::span<const double> values) {
  require_same_length(weights.size(), values.size(), "mean_var_of");
  const double mean = weighted_sum(weights, values);
  CompensatedSum acc;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    acc.add(weights[i] * d * d);
  }
  return {mean, std::max(0.0, acc.result())};
}

MeanVariance mean_var_of(const EmpiricalMeasure& m, std::span<const double> values) {
  return mean_var_of(m.weights(), values);
}

}  // namespace drovar
