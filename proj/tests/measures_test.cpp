#include <doctest.h>

#include <cmath>
#include <limits>

#include "drovar/errors.hpp"
#include "drovar/measures.hpp"
#include "test_support.hpp"

using namespace drovar;
using drovar::testing::Rng;

TEST_SUITE("measures") {

TEST_CASE("EmpiricalMeasure validation") {
  CHECK_NOTHROW(EmpiricalMeasure({0.25, 0.75}));
  CHECK_THROWS_AS(EmpiricalMeasure({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(EmpiricalMeasure({1.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(EmpiricalMeasure(std::vector<double>{}), ValidationError);
  const auto u = EmpiricalMeasure::uniform(4);
  CHECK(u.size() == 4);
  CHECK(u[2] == 0.25);
}

TEST_CASE("ProblemData validation") {
  CHECK_THROWS_AS(ProblemData({1.0}, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(ProblemData({}, {}), ValidationError);
  CHECK_THROWS_AS(ProblemData({std::nan("")}, {0.0}), ValidationError);
  const ProblemData d({1.0, 2.0}, {0.0, 3.0});
  CHECK(d.psi() == std::vector<double>{1.0, 11.0});
}

TEST_CASE("normalize examples") {
  const auto a = normalize(std::vector<double>{2.0, 2.0});
  CHECK(a.measure[0] == 0.5);
  CHECK(a.measure[1] == 0.5);
  CHECK(a.dropped.empty());

  const auto b = normalize(std::vector<double>{1.0, 0.0, 3.0});
  REQUIRE(b.measure.size() == 2);
  CHECK(b.measure[0] == 0.25);
  CHECK(b.measure[1] == 0.75);
  CHECK(b.dropped == std::vector<std::size_t>{1});

  CHECK_THROWS_WITH_AS(normalize(std::vector<double>{-1.0, 2.0}), doctest::Contains("0"),
                       ValidationError);
  CHECK_THROWS_AS(normalize(std::vector<double>{0.0, 0.0}), ValidationError);
}

TEST_CASE("divergence_of examples") {
  const EmpiricalMeasure p({0.5, 0.5});
  const EmpiricalMeasure q({0.7, 0.3});
  for (const auto& fam : drovar::testing::core_families()) {
    CHECK(divergence_of(p, p, fam).value() == 0.0);
  }
  CHECK(divergence_of(q, p, FDivergenceFamily::kl()).value() ==
        doctest::Approx(0.0822829).epsilon(1e-6 / 0.08));
  CHECK(divergence_of(q, p, FDivergenceFamily::kl()).value() ==
        doctest::Approx(drovar::testing::kl_direct({0.7, 0.3}, {0.5, 0.5})).epsilon(1e-13));
  CHECK(divergence_of(q, p, FDivergenceFamily::alpha(2.0)).value() ==
        doctest::Approx(0.08).epsilon(1e-12));
  CHECK_THROWS_AS(divergence_of(std::vector<double>{1.0}, p, FDivergenceFamily::kl()),
                  ValidationError);
}

TEST_CASE("divergence_of is nonnegative, vanishes only at p, and stays below the cap") {
  Rng rng(3);
  for (int k = 0; k < 300; ++k) {
    const std::size_t n = 2 + k % 4;
    const auto p = drovar::testing::random_measure(rng, n);
    const auto q = drovar::testing::random_measure(rng, n);
    for (const auto& fam : drovar::testing::core_families()) {
      const double d = divergence_of(q, p, fam).value();
      CHECK(d >= 0.0);
      CHECK(d > 1e-12);
      if (fam.has_bounded_divergence()) CHECK(d < fam.divergence_cap().value());
    }
  }
  // Point masses reach the alpha < 1 supremum only in the limit.
  const auto half = FDivergenceFamily::alpha(0.5);
  const EmpiricalMeasure p({0.5, 0.5});
  CHECK(divergence_of(std::vector<double>{1.0, 0.0}, p, half).value() < 4.0);
}

TEST_CASE("variational_gap examples") {
  const auto kl = FDivergenceFamily::kl();
  const EmpiricalMeasure p({0.5, 0.5});
  const EmpiricalMeasure q({0.7, 0.3});
  CHECK(std::abs(variational_gap(std::vector<double>{1.0, 1.0}, p, p, kl).value()) < 1e-15);
  const std::vector<double> g{1.0 + std::log(0.7 / 0.5), 1.0 + std::log(0.3 / 0.5)};
  CHECK(variational_gap(g, q, p, kl).value() ==
        doctest::Approx(divergence_of(q, p, kl).value()).epsilon(1e-12));
  CHECK(variational_gap(std::vector<double>{0.0, 0.0}, q, p, kl).value() ==
        doctest::Approx(-std::exp(-1.0)).epsilon(1e-14));
  CHECK(variational_gap(std::vector<double>{1.0, -1.0}, q, p, FDivergenceFamily::alpha(0.5))
            .is_neg_inf());
  CHECK_THROWS_AS(variational_gap(std::vector<double>{1.0}, q, p, kl), ValidationError);
}

TEST_CASE("variational_gap never exceeds the divergence") {
  Rng rng(17);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 2 + k % 5;
    const auto p = drovar::testing::random_measure(rng, n);
    const auto q = drovar::testing::random_measure(rng, n);
    for (const auto& fam : drovar::testing::core_families()) {
      const auto g = fam.has_bounded_divergence()
                         ? drovar::testing::random_vector(rng, n, -5.0, -0.05)
                         : drovar::testing::random_vector(rng, n, -3.0, 3.0);
      const ExtendedReal gap = variational_gap(g, q, p, fam);
      CHECK(gap.value() <= divergence_of(q, p, fam).value() + 1e-9);
    }
  }
}

TEST_CASE("mean_var_of examples") {
  auto mv = mean_var_of(EmpiricalMeasure({0.5, 0.5}), std::vector<double>{0.0, 1.0});
  CHECK(mv.mean == 0.5);
  CHECK(mv.variance == 0.25);
  mv = mean_var_of(EmpiricalMeasure({1.0}), std::vector<double>{7.0});
  CHECK(mv.mean == 7.0);
  CHECK(mv.variance == 0.0);
  mv = mean_var_of(EmpiricalMeasure({0.8, 0.2}), std::vector<double>{0.0, 1.0});
  CHECK(mv.mean == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(mv.variance == doctest::Approx(0.16).epsilon(1e-14));
  CHECK_THROWS_AS(mean_var_of(EmpiricalMeasure({1.0}), std::vector<double>{1.0, 2.0}),
                  ValidationError);
}

TEST_CASE("variance is the minimum of E[(phi - c)^2] over c") {
  Rng rng(23);
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 2 + k % 6;
    const auto p = drovar::testing::random_measure(rng, n);
    const auto phi = drovar::testing::random_vector(rng, n);
    const auto mv = mean_var_of(p, phi);
    const double step = 1e-4;
    double best = std::numeric_limits<double>::infinity();
    double best_c = 0.0;
    for (double c = -1.0; c <= 1.0; c += step) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += p[i] * (phi[i] - c) * (phi[i] - c);
      if (s < best) {
        best = s;
        best_c = c;
      }
    }
    CHECK(mv.variance >= 0.0);
    CHECK(mv.variance <= best + 1e-15);
    CHECK(best - mv.variance <= step * step);
    CHECK(std::abs(best_c - mv.mean) <= step);
  }
}

TEST_CASE("compensated summation is order-fixed and accurate") {
  std::vector<double> xs{1e16, 1.0, -1e16, 1.0};
  CHECK(compensated_sum(xs) == 2.0);
  CHECK(weighted_sum(std::vector<double>{0.5, 0.5}, std::vector<double>{2.0, 4.0}) == 3.0);
}

}  // TEST_SUITE
