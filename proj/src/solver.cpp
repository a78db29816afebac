#include "drovar/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "drovar/errors.hpp"

namespace drovar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kArmijo = 1e-4;
constexpr double kShrink = 0.5;
constexpr int kMaxBacktracks = 80;
constexpr double kCoordStepInit = 0.1;
constexpr double kCoordStepMin = 1e-10;
constexpr int kMaxPolishRounds = 3;
// Consecutive iterations with relative decrease below rel_tol before the
// descent phase is considered stalled.
constexpr int kSlowProgressLimit = 50;
// A recovered lambda below this multiple of the problem scale means the
// constraint is inactive (reduced alpha parameterization only).
constexpr double kBoundaryLambdaRel = 1e-8;

using Vec3 = std::array<double, 3>;

Vec3 to_coords(const DualPoint& dp) { return {std::log(dp.lambda), dp.beta, dp.nu}; }
DualPoint to_point(const Vec3& x) { return {std::exp(x[0]), x[1], x[2]}; }

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

class Descent {
public:
  Descent(const DualObjective& objective, const SolverConfig& config)
      : obj_(objective), cfg_(config), s_floor_(std::log(config.lambda_floor)) {}

  MinimizeResult run(const DualPoint& start) const {
    MinimizeResult out;
    Vec3 x = project(to_coords(start));
    double fx = eval(x);
    out.point = to_point(x);
    out.value = fx;
    if (!std::isfinite(fx)) return out;

    int iters = 0;
    bool converged = false;
    for (int round = 0; round <= kMaxPolishRounds && iters < cfg_.max_iters; ++round) {
      converged = descend(x, fx, iters);
      if (converged || iters >= cfg_.max_iters) break;
      const Vec3 before = x;
      coordinate_search(x, fx, iters);
      const std::optional<Vec3> g = gradient(x);
      if (!g || criterion(x, *g) <= cfg_.grad_tol || before == x) {
        converged = true;
        break;
      }
    }

    out.point = to_point(x);
    out.value = fx;
    out.iterations = iters;
    if (!converged) {
      out.status = SolveStatus::MaxIters;
    } else {
      // The floor only stands in for lambda -> 0; a minimizer there is never
      // an attained interior optimum, whatever the sign of the s-derivative.
      const bool pinned = obj_.free[0] && at_floor(x);
      out.status = pinned ? SolveStatus::BoundaryLambda : SolveStatus::Converged;
    }
    return out;
  }

private:
  double eval(const Vec3& x) const {
    const ExtendedReal v = obj_.value(to_point(x));
    return v.is_finite() ? v.value() : kInf;
  }

  /// Gradient in (s, beta, nu) restricted to free coordinates.
  std::optional<Vec3> gradient(const Vec3& x) const {
    const DualPoint dp = to_point(x);
    DualGradient g;
    try {
      g = obj_.gradient(dp);
    } catch (const NonsmoothPointError&) {
      return std::nullopt;
    }
    Vec3 out{dp.lambda * g.d_lambda, g.d_beta, g.d_nu};
    for (int i = 0; i < 3; ++i) {
      if (!obj_.free[i]) out[i] = 0.0;
      if (!std::isfinite(out[i])) return std::nullopt;
    }
    return out;
  }

  bool at_floor(const Vec3& x) const { return x[0] <= s_floor_ + 1e-9; }

  Vec3 project(Vec3 x) const {
    if (obj_.free[0]) x[0] = std::max(x[0], s_floor_);
    return x;
  }

  Vec3 projected_gradient(const Vec3& x, Vec3 g) const {
    if (obj_.free[0] && at_floor(x) && g[0] > 0.0) g[0] = 0.0;
    return g;
  }

  /// Stationarity measure: lambda-derivative in original units for
  /// lambda < 1, reparameterized otherwise; beta/nu derivatives as is.
  double criterion(const Vec3& x, const Vec3& g) const {
    const Vec3 pg = projected_gradient(x, g);
    const double lambda = std::exp(x[0]);
    double c = std::abs(pg[0]) / std::min(lambda, 1.0);
    c = std::max({c, std::abs(pg[1]), std::abs(pg[2])});
    return c;
  }

  /// Returns true once the stationarity test passes; false when the line
  /// search stalls or the iteration budget runs out.
  bool descend(Vec3& x, double& fx, int& iters) const {
    std::optional<Vec3> g = gradient(x);
    Vec3 prev_step{};
    Vec3 prev_dg{};
    bool have_prev = false;
    int slow = 0;
    while (iters < cfg_.max_iters) {
      if (!g) return false;
      if (criterion(x, *g) <= cfg_.grad_tol) return true;
      ++iters;

      const Vec3 pg = projected_gradient(x, *g);
      const double pg_inf = std::max({std::abs(pg[0]), std::abs(pg[1]), std::abs(pg[2])});
      double t = 1.0 / std::max(1.0, pg_inf);
      if (have_prev) {
        const double sy = dot(prev_step, prev_dg);
        if (sy > 0.0) t = dot(prev_step, prev_step) / sy;
      }
      t = std::min(t, 1e10);

      Vec3 xn{};
      double fn = kInf;
      bool accepted = false;
      for (int k = 0; k < kMaxBacktracks; ++k) {
        xn = project({x[0] - t * pg[0], x[1] - t * pg[1], x[2] - t * pg[2]});
        fn = eval(xn);
        const Vec3 dx{xn[0] - x[0], xn[1] - x[1], xn[2] - x[2]};
        if (fn <= fx + kArmijo * dot(*g, dx)) {
          accepted = true;
          break;
        }
        t *= kShrink;
      }
      if (!accepted || xn == x) return false;

      const std::optional<Vec3> gn = gradient(xn);
      have_prev = gn.has_value();
      if (gn) {
        for (int i = 0; i < 3; ++i) {
          prev_step[i] = xn[i] - x[i];
          prev_dg[i] = (*gn)[i] - (*g)[i];
        }
      }
      slow = (fx - fn <= cfg_.rel_tol * std::max(1.0, std::abs(fx))) ? slow + 1 : 0;
      x = xn;
      fx = fn;
      g = gn;
      if (slow >= kSlowProgressLimit) return false;
    }
    return false;
  }

  /// Cyclic coordinate search with shrinking steps over the free coordinates.
  void coordinate_search(Vec3& x, double& fx, int& iters) const {
    double step = kCoordStepInit;
    while (step >= kCoordStepMin && iters < cfg_.max_iters) {
      ++iters;
      bool improved = false;
      for (int i = 0; i < 3 && !improved; ++i) {
        if (!obj_.free[i]) continue;
        for (const double sign : {1.0, -1.0}) {
          Vec3 y = x;
          y[i] += sign * step;
          y = project(y);
          const double fy = eval(y);
          if (fy < fx) {
            x = y;
            fx = fy;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= kShrink;
    }
  }

  const DualObjective& obj_;
  const SolverConfig& cfg_;
  double s_floor_;
};

double problem_scale(std::span<const double> values, const EmpiricalMeasure& p) {
  return std::max(std::sqrt(mean_var_of(p, values).variance), 1.0);
}

double lambda_factor(int i) {
  if (i == 0) return 1.0;
  const int magnitude = (i + 1) / 2;
  const double f = std::pow(10.0, magnitude);
  return (i % 2 == 1) ? 1.0 / f : f;
}

/// Moves beta upward by doubling offsets until the objective is finite.
DualPoint shift_to_finite(const DualObjective& obj, DualPoint start, double scale) {
  if (obj.value(start).is_finite()) return start;
  const double base = start.beta;
  double offset = 1e-3 * scale;
  for (int j = 0; j < 200; ++j, offset *= 2.0) {
    start.beta = base + offset;
    if (obj.value(start).is_finite()) return start;
  }
  start.beta = base;
  return start;
}

std::vector<DualPoint> feasible_starts(const DualObjective& obj, std::vector<DualPoint> starts,
                                       double scale) {
  for (DualPoint& s : starts) s = shift_to_finite(obj, s, scale);
  return starts;
}

void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": length mismatch (" << a << " vs " << b << ")";
    throw ValidationError(msg.str());
  }
}

TiltResult tilt_or_empty(const DualPoint& dp, const ProblemData& data,
                         const EmpiricalMeasure& p, const FDivergenceFamily& family) {
  try {
    return tilt(dp, data, p, family);
  } catch (const NonsmoothPointError&) {
    return {};
  }
}

/// argmin over nu of nu^2/4 + max_i (psi_i - nu phi_i), the lambda -> 0
/// limit of the variance objective. The minimizer lies in [2 min phi, 2 max phi].
double limit_nu(std::span<const double> psi, std::span<const double> phi) {
  auto h = [&](double nu) {
    double top = -kInf;
    for (std::size_t i = 0; i < psi.size(); ++i) top = std::max(top, psi[i] - nu * phi[i]);
    return nu * nu / 4.0 + top;
  };
  double lo = 2.0 * *std::min_element(phi.begin(), phi.end());
  double hi = 2.0 * *std::max_element(phi.begin(), phi.end());
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = h(a);
  double fb = h(b);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = h(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = h(b);
    }
  }
  return fa <= fb ? a : b;
}

double max_centered(std::span<const double> psi, std::span<const double> phi, double nu) {
  double top = -kInf;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    top = std::max(top, psi[i] - nu * (phi.empty() ? 0.0 : phi[i]));
  }
  return top;
}

/// beta offset keeping the top conjugate argument inside dom f* at the floor.
double limit_beta_offset(const FDivergenceFamily& family, double lambda) {
  return family.has_bounded_divergence() ? lambda : 0.0;
}

/// A lambda this small relative to the problem scale only approximates the
/// lambda -> 0 infimum, so the solve is reported on the boundary.
void flag_vanishing_lambda(MinimizeResult& res, double lambda, double scale) {
  if (res.status != SolveStatus::MaxIters && lambda < kBoundaryLambdaRel * scale) {
    res.status = SolveStatus::BoundaryLambda;
  }
}

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::BoundaryLambda: return "BoundaryLambda";
    case SolveStatus::MaxIters: return "MaxIters";
  }
  return "Unknown";
}

void SolverConfig::validate() const {
  if (!(grad_tol > 0.0 && grad_tol < 1e-3)) throw ValidationError("grad_tol must lie in (0, 1e-3)");
  if (!(rel_tol > 0.0)) throw ValidationError("rel_tol must be positive");
  if (max_iters <= 0) throw ValidationError("max_iters must be positive");
  if (!(lambda_floor > 0.0 && lambda_floor < 1e-6)) {
    throw ValidationError("lambda_floor must lie in (0, 1e-6)");
  }
  if (multistart_count <= 0) throw ValidationError("multistart_count must be positive");
}

MinimizeResult minimize_dual(const DualObjective& objective, std::span<const DualPoint> starts,
                             const SolverConfig& config) {
  config.validate();
  if (starts.empty()) throw ValidationError("minimize_dual needs at least one start");
  const Descent descent(objective, config);

  std::vector<MinimizeResult> results(starts.size());
  const auto count = static_cast<long>(starts.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) results[i] = descent.run(starts[i]);

  std::size_t best = results.size();
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!std::isfinite(results[i].value)) continue;
    if (best == results.size() || results[i].value < results[best].value) best = i;
  }

  if (objective.limit_point) {
    const ExtendedReal limit = objective.value(*objective.limit_point);
    if (limit.is_finite() && (best == results.size() || limit.value() < results[best].value)) {
      MinimizeResult out;
      out.point = *objective.limit_point;
      out.value = limit.value();
      out.status = SolveStatus::BoundaryLambda;
      out.iterations = best == results.size() ? 0 : results[best].iterations;
      return out;
    }
  }
  if (best == results.size()) {
    throw InfeasibleStartError("dual objective is +inf at every multistart point");
  }
  return results[best];
}

std::vector<DualPoint> default_starts(const ProblemData& data, const EmpiricalMeasure& p,
                                      int count) {
  require_aligned(data.size(), p.size(), "default_starts");
  const std::vector<double> psi = data.psi();
  const double scale = problem_scale(psi, p);
  const double nu0 = 2.0 * weighted_sum(p.weights(), data.phi());
  std::vector<double> m(psi.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = psi[i] - nu0 * data.phi()[i];
  const double beta0 = weighted_sum(p.weights(), m);

  std::vector<DualPoint> starts;
  for (int i = 0; i < count; ++i) starts.push_back({lambda_factor(i) * scale, beta0, nu0});
  return starts;
}

BoundResult variance_bound(const ProblemData& data, const EmpiricalMeasure& p,
                           const FDivergenceFamily& family, double eta,
                           const SolverConfig& config, Parameterization parameterization) {
  config.validate();
  validate_eta(family, eta);
  require_aligned(data.size(), p.size(), "variance_bound");

  const std::vector<double> psi = data.psi();
  const double scale = problem_scale(psi, p);
  std::vector<DualPoint> starts = default_starts(data, p, config.multistart_count);

  const double floor = config.lambda_floor;
  const double nu_limit = limit_nu(psi, data.phi());
  const double top = max_centered(psi, data.phi(), nu_limit);

  MinimizeResult res;
  DualPoint dp;
  if (parameterization == Parameterization::Auto && family.is_kl()) {
    DualObjective obj{
        [&](const DualPoint& x) -> ExtendedReal {
          return kl_reduced_objective(x.lambda, x.nu, data, p, eta);
        },
        [&](const DualPoint& x) { return gradient_kl_reduced(x.lambda, x.nu, data, p, eta); },
        {true, false, true},
        DualPoint{floor, 0.0, nu_limit}};
    res = minimize_dual(obj, starts, config);
    dp = res.point;
    dp.beta = kl_optimal_beta(dp.lambda, dp.nu, data, p);
  } else if (parameterization == Parameterization::Auto && family.has_bounded_divergence()) {
    const double alpha = family.alpha_value();
    DualObjective obj{
        [&](const DualPoint& x) {
          return alpha_reduced_objective(x.beta, x.nu, data, p, alpha, eta);
        },
        [&](const DualPoint& x) {
          return gradient_alpha_reduced(x.beta, x.nu, data, p, alpha, eta);
        },
        {false, true, true},
        DualPoint{1.0, top + floor * scale, nu_limit}};
    for (DualPoint& s : starts) s.lambda = 1.0;
    starts.resize(1);
    res = minimize_dual(obj, feasible_starts(obj, starts, scale), config);
    dp = res.point;
    dp.lambda = alpha_optimal_lambda(dp.beta, dp.nu, data, p, alpha, eta);
    if (!(dp.lambda > 0.0)) dp.lambda = config.lambda_floor;
  } else {
    DualObjective obj{
        [&](const DualPoint& x) { return dual_objective_variance(x, data, p, family, eta); },
        [&](const DualPoint& x) { return gradient_variance(x, data, p, family, eta); },
        {true, true, true},
        DualPoint{floor, top + limit_beta_offset(family, floor), nu_limit}};
    res = minimize_dual(obj, feasible_starts(obj, starts, scale), config);
    dp = res.point;
  }
  flag_vanishing_lambda(res, dp.lambda, scale);

  BoundResult out;
  out.value = res.value;
  out.dual_point = dp;
  out.status = res.status;
  out.iterations = res.iterations;
  out.tilt = tilt_or_empty(dp, data, p, family);
  out.diagnostics = optimality_diagnostics(dp, data, p, family, eta,
                                           res.status == SolveStatus::BoundaryLambda);
  return out;
}

BoundResult mean_bound(std::span<const double> values, const EmpiricalMeasure& p,
                       const FDivergenceFamily& family, double eta, const SolverConfig& config) {
  config.validate();
  validate_eta(family, eta);
  require_aligned(values.size(), p.size(), "mean_bound");
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("mean_bound values must be finite");
  }

  const double scale = problem_scale(values, p);
  const double beta0 = weighted_sum(p.weights(), values);
  std::vector<DualPoint> starts;
  for (int i = 0; i < config.multistart_count; ++i) {
    starts.push_back({lambda_factor(i) * scale, beta0, 0.0});
  }
  DualObjective obj{
      [&](const DualPoint& x) { return dual_objective_mean(x.lambda, x.beta, values, p, family, eta); },
      [&](const DualPoint& x) { return gradient_mean(x.lambda, x.beta, values, p, family, eta); },
      {true, true, false},
      DualPoint{config.lambda_floor,
                max_centered(values, {}, 0.0) + limit_beta_offset(family, config.lambda_floor),
                0.0}};
  MinimizeResult res = minimize_dual(obj, feasible_starts(obj, starts, scale), config);
  flag_vanishing_lambda(res, res.point.lambda, scale);

  BoundResult out;
  out.value = res.value;
  out.dual_point = res.point;
  out.status = res.status;
  out.iterations = res.iterations;
  out.diagnostics.boundary_flag = res.status == SolveStatus::BoundaryLambda;
  try {
    out.tilt = tilt_mean(res.point.lambda, res.point.beta, values, p, family);
    out.diagnostics.normalization = compensated_sum(out.tilt.weights);
    out.diagnostics.achieved_divergence = divergence_of(out.tilt.weights, p, family);
  } catch (const NonsmoothPointError&) {
    out.diagnostics.normalization = kInf;
    out.diagnostics.achieved_divergence = ExtendedReal::pos_inf();
  }
  return out;
}

}  // namespace drovar
