#include "drovar/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "drovar/dual_core.hpp"
#include "drovar/errors.hpp"
#include "drovar/oracle_kernels.hpp"

namespace drovar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kGoldenIters = 120;
constexpr int kBisectIters = 80;

/// Primal objective and divergence on simplex points; no dual quantities
/// are involved anywhere in the oracle.
class Primal {
public:
  Primal(const ProblemData& data, const EmpiricalMeasure& p, const FDivergenceFamily& family,
         double eta)
      : data_(data), p_(p), family_(family), eta_(eta) {}

  std::size_t atoms() const { return p_.size(); }

  double value(const std::array<double, 3>& q) const {
    const std::size_t n = atoms();
    const auto rho = data_.rho();
    const auto phi = data_.phi();
    double mean_rho = 0.0;
    double mean_phi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean_rho += q[i] * rho[i];
      mean_phi += q[i] * phi[i];
    }
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += q[i] * (phi[i] - mean_phi) * (phi[i] - mean_phi);
    return mean_rho + var;
  }

  double divergence(const std::array<double, 3>& q) const {
    double d = 0.0;
    for (std::size_t i = 0; i < atoms(); ++i) {
      const ExtendedReal term = f_eval(family_, q[i] / p_[i]);
      if (!term.is_finite()) return std::numeric_limits<double>::infinity();
      d += p_[i] * term.value();
    }
    return d;
  }

  bool feasible(const std::array<double, 3>& q) const { return divergence(q) <= eta_; }

  double p(std::size_t i) const { return p_[i]; }

private:
  const ProblemData& data_;
  const EmpiricalMeasure& p_;
  const FDivergenceFamily& family_;
  double eta_;
};

/// Feasible sub-interval [lo, hi] of a segment t -> point(t), t in [a, b],
/// along which the divergence is convex. Endpoints are feasible points found
/// by bisection.
template <class PointFn>
std::optional<std::array<double, 2>> feasible_interval(const Primal& primal, PointFn&& point,
                                                       double a, double b) {
  if (!(b >= a)) return std::nullopt;
  auto div = [&](double t) { return primal.divergence(point(t)); };

  // Minimizer of the divergence along the segment.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = a;
  double hi = b;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = div(x1);
  double f2 = div(x2);
  for (int it = 0; it < kGoldenIters && hi - lo > 1e-16; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = div(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = div(x2);
    }
  }
  double center = f1 <= f2 ? x1 : x2;
  for (const double t : {a, b}) {
    if (div(t) < div(center)) center = t;
  }
  if (!primal.feasible(point(center))) return std::nullopt;

  // Bisection keeps `in` feasible.
  auto edge = [&](double in, double out) {
    if (primal.feasible(point(out))) return out;
    for (int it = 0; it < kBisectIters; ++it) {
      const double mid = 0.5 * (in + out);
      if (mid == in || mid == out) break;
      (primal.feasible(point(mid)) ? in : out) = mid;
    }
    return in;
  };
  return std::array<double, 2>{edge(center, a), edge(center, b)};
}

/// Evenly spaced window along one coordinate, clipped to [0, 1].
struct Axis {
  double lo = 0.0;
  double step = 0.0;
  long count = 1;

  double at(long j) const { return lo + static_cast<double>(j) * step; }
};

Axis centered_axis(double center, double step, long count) {
  const double span = step * static_cast<double>(count - 1);
  const double lo = std::clamp(center - 0.5 * span, 0.0, std::max(0.0, 1.0 - span));
  return {lo, step, count};
}

/// Scores the candidates of one line: the exact interval endpoints plus the
/// axis points strictly inside the interval.
template <class PointFn>
kernels::GridBest best_on_line(const Primal& primal, PointFn&& point, double a, double b,
                               const Axis& axis, long row) {
  kernels::GridBest best;
  const auto interval = feasible_interval(primal, point, a, b);
  if (!interval) return best;
  const auto [lo, hi] = *interval;

  // Every accepted candidate is re-checked against the divergence directly.
  auto consider = [&](double t, long j) {
    const std::array<double, 3> q = point(t);
    const kernels::GridBest cand{primal.value(q), q, {row, j}};
    if (kernels::better(cand, best) && primal.feasible(q)) best = cand;
  };
  consider(lo, -1);
  for (long j = 0; j < axis.count; ++j) {
    const double t = axis.at(j);
    if (t > lo && t < hi) consider(t, j);
  }
  consider(hi, axis.count);
  return best;
}

kernels::GridBest sweep_two_atoms(const Primal& primal, const Axis& axis) {
  auto point = [](double t) { return std::array<double, 3>{t, 1.0 - t, 0.0}; };
  return best_on_line(primal, point, 0.0, 1.0, axis, 0);
}

kernels::GridBest sweep_three_atoms(const Primal& primal, const Axis& rows, const Axis& cols,
                                    bool serial) {
  auto row_best = [&](long i) {
    const double q1 = rows.at(i);
    if (q1 < 0.0 || q1 > 1.0) return kernels::GridBest{};
    auto point = [q1](double t) {
      return std::array<double, 3>{q1, t, std::max(0.0, 1.0 - q1 - t)};
    };
    return best_on_line(primal, point, 0.0, 1.0 - q1, cols, i);
  };
  return serial ? kernels::sweep_rows_serial(rows.count, row_best)
                : kernels::sweep_rows_parallel(rows.count, row_best);
}

}  // namespace

void OracleConfig::validate() const {
  if (grid_per_dim != 0 && grid_per_dim < 101) {
    throw ValidationError("oracle grid_per_dim must be at least 101");
  }
  if (refine_points != 0 && refine_points < 3) {
    throw ValidationError("oracle refine_points must be at least 3");
  }
  if (refine_rounds < 0) throw ValidationError("oracle refine_rounds must be nonnegative");
  if (!(zoom > 1.0)) throw ValidationError("oracle zoom must exceed 1");
}

long OracleConfig::points_for(std::size_t atoms) const {
  if (grid_per_dim != 0) return grid_per_dim;
  return atoms <= 2 ? 4001 : 1201;
}

double primal_value(std::span<const double> q, const ProblemData& data) {
  if (q.size() != data.size()) {
    throw ValidationError("primal_value: length mismatch (" + std::to_string(q.size()) + " vs " +
                          std::to_string(data.size()) + ")");
  }
  const MeanVariance mv = mean_var_of(q, data.phi());
  return weighted_sum(q, data.rho()) + mv.variance;
}

OracleResult primal_sup_grid(const ProblemData& data, const EmpiricalMeasure& p,
                             const FDivergenceFamily& family, double eta,
                             const OracleConfig& config) {
  config.validate();
  validate_eta(family, eta);
  const std::size_t n = p.size();
  if (data.size() != n) throw ValidationError("primal_sup_grid: data/measure length mismatch");
  if (n > 3) {
    throw UnsupportedSizeError("brute-force oracle supports at most 3 atoms, got " +
                               std::to_string(n));
  }
  if (n == 1) return {primal_value(std::vector<double>{1.0}, data), {1.0}};

  const Primal primal(data, p, family, eta);
  const long points = config.points_for(n);
  const long refine_points = config.refine_points != 0 ? config.refine_points : points;
  double step = 1.0 / static_cast<double>(points - 1);

  auto sweep = [&](const Axis& a0, const Axis& a1) {
    return n == 2 ? sweep_two_atoms(primal, a0) : sweep_three_atoms(primal, a0, a1, config.serial);
  };

  const Axis full{0.0, step, points};
  kernels::GridBest best = sweep(full, full);
  if (!best.found()) {
    // p is always feasible; only reachable for degenerate tiny eta.
    const std::array<double, 3> q{p[0], p[1], n == 3 ? p[2] : 0.0};
    best = {primal.value(q), q, {0, 0}};
  }

  for (int round = 0; round < config.refine_rounds; ++round) {
    step /= config.zoom;
    const kernels::GridBest refined =
        sweep(centered_axis(best.q[0], step, refine_points),
              centered_axis(best.q[1], step, refine_points));
    if (refined.found() && refined.value > best.value) best = refined;
  }

  return {best.value, std::vector<double>(best.q.begin(), best.q.begin() + static_cast<long>(n))};
}

}  // namespace drovar
