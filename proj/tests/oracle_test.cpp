#include <doctest.h>

#include <cmath>

#include "drovar/errors.hpp"
#include "drovar/oracle.hpp"
#include "drovar/oracle_kernels.hpp"
#include "drovar/solver.hpp"
#include "test_support.hpp"

using namespace drovar;
using drovar::testing::Rng;

namespace {

const FDivergenceFamily kKL = FDivergenceFamily::kl();
const ProblemData kBernoulli({0.0, 0.0}, {0.0, 1.0});

double eta_for(const FDivergenceFamily& fam, double eta) {
  return fam.has_bounded_divergence() ? std::min(eta, 0.9 * fam.divergence_cap().value()) : eta;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("primal_value examples") {
  CHECK(primal_value(std::vector<double>{0.7, 0.3}, ProblemData({1.0, 2.0}, {0.0, 1.0})) ==
        doctest::Approx(1.51).epsilon(1e-14));
  CHECK(primal_value(std::vector<double>{0.0, 1.0, 0.0}, ProblemData({1.0, 2.0, 3.0}, {4.0, 5.0, 6.0})) ==
        2.0);
  CHECK(primal_value(std::vector<double>{0.5, 0.5}, kBernoulli) == 0.25);
  CHECK_THROWS_AS(primal_value(std::vector<double>{1.0}, kBernoulli), ValidationError);
}

TEST_CASE("primal_sup_grid examples") {
  auto sym = primal_sup_grid(kBernoulli, EmpiricalMeasure({0.5, 0.5}), kKL, 0.1);
  CHECK(sym.value == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(sym.argmax[0] == doctest::Approx(0.5).epsilon(1e-6));

  auto asym = primal_sup_grid(kBernoulli, EmpiricalMeasure({0.8, 0.2}), kKL, 0.1);
  CHECK(std::abs(asym.value - 0.2390) <= 2e-3);
  CHECK(asym.argmax[0] == doctest::Approx(0.605).epsilon(1e-2));

  auto a2 = primal_sup_grid(kBernoulli, EmpiricalMeasure({0.8, 0.2}), FDivergenceFamily::alpha(2.0), 0.08);
  CHECK(std::abs(a2.value - 0.2304) <= 1e-4);
  CHECK(a2.argmax[0] == doctest::Approx(0.64).epsilon(1e-6));
  CHECK(a2.argmax[1] == doctest::Approx(0.36).epsilon(1e-6));
}

TEST_CASE("size limits and configuration") {
  const ProblemData four({0, 0, 0, 0}, {0, 1, 2, 3});
  CHECK_THROWS_AS(primal_sup_grid(four, EmpiricalMeasure::uniform(4), kKL, 0.1), UnsupportedSizeError);
  const auto one = primal_sup_grid(ProblemData({3.0}, {1.0}), EmpiricalMeasure({1.0}), kKL, 0.1);
  CHECK(one.value == 3.0);
  OracleConfig c;
  c.grid_per_dim = 50;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(OracleConfig{}.points_for(2) == 4001);
  CHECK(OracleConfig{}.points_for(3) == 1201);
}

TEST_CASE("oracle respects weak duality and tracks the dual tilt") {
  Rng rng(83);
  OracleConfig cfg;
  cfg.grid_per_dim = 301;
  for (const auto& fam : drovar::testing::core_families()) {
    for (int k = 0; k < 6; ++k) {
      const std::size_t n = 2 + k % 2;
      const auto d = drovar::testing::random_problem(rng, n);
      const auto p = drovar::testing::random_measure(rng, n);
      const double eta = eta_for(fam, 0.2);
      const OracleResult o = primal_sup_grid(d, p, fam, eta, cfg);
      const BoundResult b = variance_bound(d, p, fam, eta);
      CHECK(o.value <= b.value + 1e-8);
      CHECK(divergence_of(o.argmax, p, fam).value() <= eta + 1e-12);
      if (b.status == SolveStatus::Converged) {
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(o.argmax[i] - b.tilt.weights[i]) <= 1e-2);
      }
      // The objective is concave in q, so it is unimodal on the segment p -> argmax.
      int turns = 0;
      double prev = primal_value(p.weights(), d);
      bool rising = true;
      for (int j = 1; j <= 200; ++j) {
        const double t = j / 200.0;
        std::vector<double> q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = (1 - t) * p[i] + t * o.argmax[i];
        const double v = primal_value(q, d);
        if (rising && v < prev - 1e-12) {
          rising = false;
          ++turns;
        } else if (!rising && v > prev + 1e-12) {
          ++turns;
        }
        prev = v;
      }
      CHECK(turns <= 1);
    }
  }
}

TEST_CASE("parallel and serial sweeps agree exactly") {
  Rng rng(89);
  for (const auto& fam : drovar::testing::core_families()) {
    const auto d = drovar::testing::random_problem(rng, 3);
    const auto p = drovar::testing::random_measure(rng, 3);
    OracleConfig par;
    par.grid_per_dim = 401;
    OracleConfig ser = par;
    ser.serial = true;
    const double eta = eta_for(fam, 0.3);
    const OracleResult a = primal_sup_grid(d, p, fam, eta, par);
    const OracleResult b = primal_sup_grid(d, p, fam, eta, ser);
    CHECK(a.value == b.value);
    CHECK(a.argmax == b.argmax);
  }
}

TEST_CASE("kernel reduction breaks ties toward the smaller index") {
  // Rows 3 and 7 share the best value; row 3 must win in both sweeps.
  auto row = [](long i) {
    kernels::GridBest b;
    b.value = (i == 3 || i == 7) ? 1.0 : 0.0;
    b.index = {i, 0};
    b.q = {static_cast<double>(i), 0.0, 0.0};
    return b;
  };
  const auto s = kernels::sweep_rows_serial(64, row);
  const auto p = kernels::sweep_rows_parallel(64, row);
  CHECK(s.index[0] == 3);
  CHECK(p.index[0] == 3);
  CHECK_FALSE(kernels::sweep_rows_serial(0, row).found());
}

}  // TEST_SUITE
