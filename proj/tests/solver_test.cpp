#include <doctest.h>

#include <cmath>

#include "drovar/errors.hpp"
#include "drovar/solver.hpp"
#include "test_support.hpp"

using namespace drovar;
using drovar::testing::Rng;
using drovar::testing::uniform;

namespace {

const FDivergenceFamily kKL = FDivergenceFamily::kl();
const FDivergenceFamily kA2 = FDivergenceFamily::alpha(2.0);
const FDivergenceFamily kAHalf = FDivergenceFamily::alpha(0.5);

/// Root of g on [lo, hi] by bisection, g(lo) and g(hi) of opposite sign.
template <class G>
double bisect(G g, double lo, double hi) {
  const bool lo_neg = g(lo) < 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((g(mid) < 0.0) == lo_neg ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double kl2(double q, double p) {
  return drovar::testing::kl_direct({q, 1 - q}, {p, 1 - p});
}

double floor_value(const ProblemData& d, const EmpiricalMeasure& p) {
  return weighted_sum(p.weights(), d.rho()) + mean_var_of(p, d.phi()).variance;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("minimize_dual on a smooth quadratic") {
  DualObjective obj;
  obj.value = [](const DualPoint& x) {
    return ExtendedReal((x.lambda - 1) * (x.lambda - 1) + (x.beta + 2) * (x.beta + 2) + x.nu * x.nu);
  };
  obj.gradient = [](const DualPoint& x) {
    return DualGradient{2 * (x.lambda - 1), 2 * (x.beta + 2), 2 * x.nu};
  };
  const std::vector<DualPoint> starts{{3.0, 1.0, -2.0}, {0.2, 0.0, 0.5}};
  const MinimizeResult r = minimize_dual(obj, starts);
  CHECK(r.status == SolveStatus::Converged);
  CHECK(r.point.lambda == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.point.beta == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(std::abs(r.point.nu) < 1e-8);
  CHECK(std::abs(r.value) <= 1e-10);
}

TEST_CASE("minimize_dual rejects starts that are all infinite") {
  DualObjective obj;
  obj.value = [](const DualPoint&) { return ExtendedReal::pos_inf(); };
  obj.gradient = [](const DualPoint&) { return DualGradient{}; };
  const std::vector<DualPoint> starts{{1, 0, 0}};
  CHECK_THROWS_AS(minimize_dual(obj, starts), InfeasibleStartError);
}

TEST_CASE("SolverConfig validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.lambda_floor = 1e-5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.grad_tol = 1e-2;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.multistart_count = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("symmetric two-point KL bound sits on the lambda boundary") {
  const ProblemData d({0.0, 0.0}, {0.0, 1.0});
  const BoundResult r = variance_bound(d, EmpiricalMeasure({0.5, 0.5}), kKL, 0.1);
  CHECK(r.value == doctest::Approx(0.25).epsilon(4e-4));
  CHECK(r.status == SolveStatus::BoundaryLambda);
  CHECK(r.diagnostics.boundary_flag);
  CHECK(r.dual_point.nu == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("asymmetric two-point KL bound matches the root-find oracle") {
  const ProblemData d({0.0, 0.0}, {0.0, 1.0});
  const EmpiricalMeasure p({0.8, 0.2});
  const BoundResult r = variance_bound(d, p, kKL, 0.1);
  // Var = q (1 - q) is maximized at the lower end of the feasible q-interval.
  const double q = bisect([](double x) { return kl2(x, 0.8) - 0.1; }, 0.3, 0.8);
  CHECK(q == doctest::Approx(0.605).epsilon(1e-2));
  CHECK(r.value == doctest::Approx(q * (1 - q)).epsilon(1e-9));
  CHECK(std::abs(r.value - 0.2390) <= 2e-3);
  CHECK(r.status == SolveStatus::Converged);
  CHECK_FALSE(r.diagnostics.boundary_flag);
  CHECK(std::abs(r.diagnostics.normalization - 1) <= 1e-6);
  CHECK(std::abs(r.diagnostics.achieved_divergence.value() - 0.1) <= 1e-5);
  CHECK(std::abs(*r.diagnostics.mean_condition_gap) <= 1e-6);
  CHECK(r.tilt.weights[0] == doctest::Approx(q).epsilon(1e-5));
}

TEST_CASE("closed-form alpha examples") {
  const ProblemData d({0.0, 0.0}, {0.0, 1.0});
  const BoundResult a2 = variance_bound(d, EmpiricalMeasure({0.8, 0.2}), kA2, 0.08);
  CHECK(std::abs(a2.value - 0.64 * 0.36) <= 1e-4);
  const BoundResult half = variance_bound(d, EmpiricalMeasure({0.5, 0.5}), kAHalf, 1.2);
  CHECK(std::abs(half.value - 0.25) <= 1e-4);
}

TEST_CASE("constant phi reduces the variance bound to the mean bound") {
  Rng rng(61);
  for (const auto& fam : drovar::testing::core_families()) {
    for (int k = 0; k < 5; ++k) {
      const std::size_t n = 2 + k % 4;
      const auto rho = drovar::testing::random_vector(rng, n);
      const auto p = drovar::testing::random_measure(rng, n);
      const double c = uniform(rng, -1.0, 1.0);
      const ProblemData d(rho, std::vector<double>(n, c));
      const double eta = fam.has_bounded_divergence() ? 0.5 : 0.2;
      const double v = variance_bound(d, p, fam, eta).value;
      const double m = mean_bound(rho, p, fam, eta).value;
      CHECK(std::abs(v - m) <= 1e-8);
    }
  }
}

TEST_CASE("mean bound examples") {
  const EmpiricalMeasure half({0.5, 0.5});
  for (const auto& fam : drovar::testing::core_families()) {
    const BoundResult r = mean_bound(std::vector<double>{0.7, 0.7}, half, fam, 0.2);
    CHECK(std::abs(r.value - 0.7) <= 1e-8);
  }
  const std::vector<double> v{0.0, 1.0};
  const BoundResult r1 = mean_bound(v, half, kKL, 0.1);
  const double q = bisect([](double x) { return kl2(x, 0.5) - 0.1; }, 0.5, 1.0);
  CHECK(std::abs(r1.value - 0.7198) <= 1e-3);
  CHECK(r1.value == doctest::Approx(q).epsilon(1e-9));
  CHECK_FALSE(r1.diagnostics.mean_condition_gap.has_value());
  const BoundResult r2 = mean_bound(v, half, kKL, 0.2);
  CHECK(r2.value >= r1.value);
}

TEST_CASE("bounds are covariant in rho and invariant to shifts of phi") {
  Rng rng(67);
  for (const auto& fam : drovar::testing::core_families()) {
    for (int k = 0; k < 6; ++k) {
      const std::size_t n = 2 + k % 3;
      const auto d = drovar::testing::random_problem(rng, n);
      const auto p = drovar::testing::random_measure(rng, n);
      const double eta = fam.has_bounded_divergence() ? 0.5 : 0.2;
      const double c = uniform(rng, -1.0, 1.0);
      const double base = variance_bound(d, p, fam, eta).value;

      std::vector<double> rho(d.rho().begin(), d.rho().end());
      std::vector<double> phi(d.phi().begin(), d.phi().end());
      std::vector<double> rho_c = rho;
      for (auto& x : rho_c) x += c;
      std::vector<double> phi_c = phi;
      for (auto& x : phi_c) x += c;

      CHECK(std::abs(variance_bound(ProblemData(rho_c, phi), p, fam, eta).value - base - c) <= 1e-8);
      CHECK(std::abs(variance_bound(ProblemData(rho, phi_c), p, fam, eta).value - base) <= 1e-8);
    }
  }
}

TEST_CASE("bound dominates the baseline value and grows with eta") {
  Rng rng(71);
  for (const auto& fam : drovar::testing::core_families()) {
    for (int k = 0; k < 4; ++k) {
      const std::size_t n = 2 + k;
      const auto d = drovar::testing::random_problem(rng, n);
      const auto p = drovar::testing::random_measure(rng, n);
      const double top = fam.has_bounded_divergence() ? 3.5 : 1.0;
      double prev = floor_value(d, p) - 1e-8;
      for (int j = 1; j <= 8; ++j) {
        const double v = variance_bound(d, p, fam, top * j / 8.0).value;
        CHECK(v >= prev - 1e-8);
        prev = v;
      }
    }
  }
}

TEST_CASE("reduced and generic parameterizations agree") {
  Rng rng(73);
  for (const auto& fam : {kKL, kAHalf}) {
    for (int k = 0; k < 6; ++k) {
      const std::size_t n = 2 + k % 3;
      const auto d = drovar::testing::random_problem(rng, n);
      const auto p = drovar::testing::random_measure(rng, n);
      const double eta = fam.is_kl() ? 0.2 : 0.5;
      const BoundResult a = variance_bound(d, p, fam, eta, {}, Parameterization::Auto);
      const BoundResult b = variance_bound(d, p, fam, eta, {}, Parameterization::Generic);
      CHECK(std::abs(a.value - b.value) <= (fam.is_kl() ? 1e-7 : 1e-6));
    }
  }
}

TEST_CASE("repeated solves are bit-identical") {
  Rng rng(79);
  const auto d = drovar::testing::random_problem(rng, 3);
  const auto p = drovar::testing::random_measure(rng, 3);
  for (const auto& fam : drovar::testing::core_families()) {
    const BoundResult a = variance_bound(d, p, fam, 0.2);
    const BoundResult b = variance_bound(d, p, fam, 0.2);
    CHECK(a.value == b.value);
    CHECK(a.dual_point == b.dual_point);
    CHECK(a.tilt.weights == b.tilt.weights);
    CHECK(a.iterations == b.iterations);
    CHECK(a.status == b.status);
  }
}

TEST_CASE("default starts follow the baseline moments") {
  const ProblemData d({0.0, 0.0}, {0.0, 1.0});
  const auto starts = default_starts(d, EmpiricalMeasure({0.8, 0.2}), 3);
  REQUIRE(starts.size() == 3);
  for (const auto& s : starts) CHECK(s.nu == doctest::Approx(0.4));
  CHECK(starts[0].lambda == 1.0);
}

}  // TEST_SUITE
