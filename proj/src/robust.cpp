#include "drovar/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "drovar/errors.hpp"

namespace drovar {

namespace {

constexpr std::size_t kMaxColumns = 8;

// Standard Nelder-Mead coefficients.
constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrinkNm = 0.5;

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// a + t (b - a)
std::vector<double> along(std::span<const double> a, std::span<const double> b, double t) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
  return out;
}

}  // namespace

ScenarioMatrix::ScenarioMatrix(std::vector<std::vector<double>> rows, EmpiricalMeasure weights)
    : rows_(std::move(rows)), weights_(std::move(weights)) {
  if (rows_.empty()) throw ValidationError("scenario matrix needs at least one row");
  if (rows_.size() != weights_.size()) {
    throw ValidationError("scenario matrix has " + std::to_string(rows_.size()) +
                          " rows but " + std::to_string(weights_.size()) + " weights");
  }
  columns_ = rows_.front().size();
  if (columns_ == 0 || columns_ > kMaxColumns) {
    throw ValidationError("scenario matrix must have between 1 and 8 columns");
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != columns_) {
      throw ValidationError("scenario row " + std::to_string(r) + " has the wrong column count");
    }
    for (double v : rows_[r]) {
      if (!std::isfinite(v)) {
        throw ValidationError("scenario row " + std::to_string(r) + " has a non-finite entry");
      }
    }
  }
}

ProblemData ScenarioMatrix::problem_for(std::span<const double> x) const {
  if (x.size() != columns_) {
    throw ValidationError("decision has " + std::to_string(x.size()) + " entries, expected " +
                          std::to_string(columns_));
  }
  std::vector<double> rho(rows_.size());
  std::vector<double> phi(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const double ret = std::inner_product(x.begin(), x.end(), rows_[r].begin(), 0.0);
    rho[r] = -ret;
    phi[r] = ret;
  }
  return ProblemData(std::move(rho), std::move(phi));
}

DecisionConstraint DecisionConstraint::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size()) {
    throw ValidationError("box bounds must be non-empty and of equal length");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i]) {
      throw ValidationError("box constraint is infeasible at coordinate " + std::to_string(i));
    }
  }
  return DecisionConstraint(Kind::Box, std::move(lo), std::move(hi));
}

DecisionConstraint DecisionConstraint::simplex() { return DecisionConstraint(Kind::Simplex, {}, {}); }

void DecisionConstraint::check_dims(std::size_t dims) const {
  if (kind_ == Kind::Box && lo_.size() != dims) {
    throw ValidationError("box has " + std::to_string(lo_.size()) +
                          " coordinates but the decision has " + std::to_string(dims));
  }
}

std::vector<double> DecisionConstraint::project(std::span<const double> x) const {
  if (kind_ == Kind::Simplex) return project_to_simplex(x);
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lo_[i], hi_[i]);
  return out;
}

std::vector<double> DecisionConstraint::start(std::size_t dims) const {
  if (kind_ == Kind::Simplex) return std::vector<double>(dims, 1.0 / static_cast<double>(dims));
  std::vector<double> out(dims);
  for (std::size_t i = 0; i < dims; ++i) out[i] = 0.5 * (lo_[i] + hi_[i]);
  return out;
}

std::vector<double> project_to_simplex(std::span<const double> x) {
  std::vector<double> u(x.begin(), x.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i] - theta, 0.0);
  return out;
}

BoundResult robust_bound(std::span<const double> x, const ScenarioMatrix& scenarios,
                         const FDivergenceFamily& family, double eta,
                         const SolverConfig& config) {
  return variance_bound(scenarios.problem_for(x), scenarios.weights(), family, eta, config);
}

double robust_objective(std::span<const double> x, const ScenarioMatrix& scenarios,
                        const FDivergenceFamily& family, double eta,
                        const SolverConfig& config) {
  return robust_bound(x, scenarios, family, eta, config).value;
}

RobustSolution robust_minimize(const ScenarioMatrix& scenarios, const DecisionConstraint& constraint,
                               const FDivergenceFamily& family, double eta,
                               const SolverConfig& config, const NelderMeadConfig& nm) {
  const std::size_t d = scenarios.columns();
  constraint.check_dims(d);
  validate_eta(family, eta);

  auto objective = [&](std::span<const double> x) {
    return robust_objective(x, scenarios, family, eta, config);
  };

  struct Vertex {
    std::vector<double> x;
    double f;
  };
  std::vector<Vertex> simplex;
  const std::vector<double> x0 = constraint.start(d);
  simplex.push_back({x0, objective(x0)});
  const double start_value = simplex.front().f;

  for (std::size_t i = 0; i < d; ++i) {
    const double width = constraint.kind() == DecisionConstraint::Kind::Box
                             ? constraint.hi()[i] - constraint.lo()[i]
                             : 1.0;
    std::vector<double> y = x0;
    y[i] += nm.initial_step * width;
    y = constraint.project(y);
    if (distance(y, x0) == 0.0) {
      y = x0;
      y[i] -= nm.initial_step * width;
      y = constraint.project(y);
    }
    simplex.push_back({y, objective(y)});
  }

  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  auto diameter = [&] {
    double dmax = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      dmax = std::max(dmax, distance(simplex[i].x, simplex[0].x));
    }
    return dmax;
  };

  int iters = 0;
  std::stable_sort(simplex.begin(), simplex.end(), by_value);
  while (iters < nm.max_iters && diameter() >= nm.diameter_tol) {
    ++iters;
    std::vector<double> centroid(d, 0.0);
    for (std::size_t v = 0; v + 1 < simplex.size(); ++v) {
      for (std::size_t i = 0; i < d; ++i) centroid[i] += simplex[v].x[i];
    }
    for (double& c : centroid) c /= static_cast<double>(simplex.size() - 1);

    Vertex& worst = simplex.back();
    const std::vector<double> xr = constraint.project(along(centroid, worst.x, -kReflect));
    const double fr = objective(xr);

    if (fr < simplex.front().f) {
      const std::vector<double> xe = constraint.project(along(centroid, worst.x, -kExpand));
      const double fe = objective(xe);
      worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < simplex[simplex.size() - 2].f) {
      worst = {xr, fr};
    } else {
      const bool outside = fr < worst.f;
      const std::vector<double> xc = constraint.project(
          outside ? along(centroid, xr, kContract) : along(centroid, worst.x, kContract));
      const double fc = objective(xc);
      if (fc < std::min(fr, worst.f)) {
        worst = {xc, fc};
      } else {
        for (std::size_t v = 1; v < simplex.size(); ++v) {
          simplex[v].x = constraint.project(along(simplex[0].x, simplex[v].x, kShrinkNm));
          simplex[v].f = objective(simplex[v].x);
        }
      }
    }
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
  }

  return {simplex.front().x, simplex.front().f, start_value, iters};
}

}  // namespace drovar
