#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hermapp/hermite.hpp"
#include "hermapp/quadrature.hpp"

using namespace hermapp;

TEST_CASE("eval_all low-degree values") {
  // H_2(x) = (x^2 - 1)/sqrt(2), so H_2(1) = 0 and H_2(sqrt(3)) = sqrt(2)
  const auto at1 = eval_all(1.0, 2);
  CHECK(at1.values[0] == 1.0);
  CHECK(at1.values[1] == 1.0);
  CHECK(at1.values[2] == 0.0);

  CHECK(eval_all(0.0, 3).values[3] == 0.0);  // odd symmetry
  CHECK(eval_all(std::sqrt(3.0), 2).values[2] ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("recurrence residual stays at rounding level") {
  for (double x : {-8.0, -2.5, -0.3, 0.0, 0.7, 3.1, 8.0}) {
    const auto he = eval_all(x, 200);
    for (int k = 1; k < 200; ++k) {
      const double res = std::sqrt(k + 1.0) * he.values[k + 1] - x * he.values[k] +
                         std::sqrt(static_cast<double>(k)) * he.values[k - 1];
      CHECK(std::abs(res) <= 1e-12 * std::max(1.0, std::abs(he.values[k])));
    }
  }
}

TEST_CASE("eval_multi") {
  const std::vector<double> x{2.0, 3.0};
  CHECK(eval_multi(x, {0, 0}) == 1.0);
  CHECK(eval_multi(x, {1, 1}) == doctest::Approx(6.0).epsilon(1e-15));  // H_1(x) = x
  const std::vector<double> y{1.0, -4.2};
  CHECK(eval_multi(y, {2, 0}) == 0.0);  // H_2(1) = 0
  CHECK_THROWS_AS(eval_multi(x, {1}), DimensionError);
}

TEST_CASE("Cramer bound margins") {
  const double root4_2pi = std::pow(2.0 * M_PI, 0.25);
  CHECK(cramer_bound_margin(0.0, 0) == doctest::Approx(root4_2pi - 1.0).epsilon(1e-14));
  CHECK(cramer_bound_margin(0.0, 7) == doctest::Approx(root4_2pi).epsilon(1e-14));
  CHECK(cramer_bound_margin(5.0, 30) >= 0.0);

  for (double x = -8.0; x <= 8.0 + 1e-9; x += 0.25) {
    for (int k = 0; k <= 60; k += 3) {
      CHECK(cramer_bound_margin(x, k) >= -1e-9);
    }
  }
}

TEST_CASE("product linearization closed cases") {
  SUBCASE("H_1 * H_1 = H_0 + sqrt(2) H_2") {
    const auto e = linearize_product(1, 1);
    REQUIRE(e.terms.size() == 2);
    CHECK(e.terms[0].degree == 0);
    CHECK(e.terms[0].coefficient == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e.terms[1].degree == 2);
    CHECK(e.terms[1].coefficient == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("H_2 * H_1 = sqrt(2) H_1 + sqrt(3) H_3") {
    const auto e = linearize_product(2, 1);
    REQUIRE(e.terms.size() == 2);
    CHECK(e.terms[0].degree == 1);
    CHECK(e.terms[0].coefficient == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(e.terms[1].degree == 3);
    CHECK(e.terms[1].coefficient == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  }
  SUBCASE("H_0 absorbs") {
    const auto e = linearize_product(0, 9);
    REQUIRE(e.terms.size() == 1);
    CHECK(e.terms[0].degree == 9);
    CHECK(e.terms[0].coefficient == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("linearization identity holds pointwise") {
  for (int h = 0; h <= 15; ++h) {
    for (int v = 0; v <= 15; ++v) {
      const auto e = linearize_product(h, v);
      // degrees ascend by 2 from |h-v| to h+v
      REQUIRE(static_cast<int>(e.terms.size()) == std::min(h, v) + 1);
      CHECK(e.terms.front().degree == std::abs(h - v));
      CHECK(e.terms.back().degree == h + v);
      for (double x : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
        const auto he = eval_all(x, h + v);
        const double product = he.values[h] * he.values[v];
        double sum = 0.0;
        for (const auto& t : e.terms) sum += t.coefficient * he.values[t.degree];
        CHECK(std::abs(product - sum) <= 1e-9 * (1.0 + std::abs(product)));
      }
    }
  }
}

TEST_CASE("top linearization coefficient matches the closed form") {
  for (int h : {1, 3, 7, 15, 40}) {
    for (int v : {2, 5, 15, 33}) {
      const auto e = linearize_product(h, v);
      const double expected =
          std::exp(0.5 * (std::lgamma(h + v + 1.0) - std::lgamma(h + 1.0) -
                          std::lgamma(v + 1.0)));
      CHECK(e.terms.back().coefficient == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("orthonormality under exact quadrature") {
  // a rule of order n integrates H_j H_k exactly once j + k <= 2n - 1
  for (int j = 0; j <= 20; j += 2) {
    for (int k = j; k <= 20; k += 3) {
      const int n = (j + k) / 2 + 1;
      const auto rule = make_rule(n);
      const double val = apply_1d(rule, [&](double x) {
        const auto he = eval_all(x, std::max(j, k));
        return he.values[j] * he.values[k];
      });
      CHECK(std::abs(val - (j == k ? 1.0 : 0.0)) <= 1e-10);
    }
  }
}
