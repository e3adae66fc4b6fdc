#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hermapp/approximate.hpp"
#include "hermapp/hermite.hpp"
#include "hermapp/integrate.hpp"

using namespace hermapp;

TEST_CASE("tensor integration") {
  SUBCASE("constant") {
    const auto rule = make_tensor_rule(std::vector<int>{3, 2});
    CHECK(integrate_tensor(rule, [](std::span<const double>) { return 1.0; }) ==
          doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("exp against its Gaussian mean") {
    for (int n : {10, 14, 20}) {
      const auto rule = make_tensor_rule(std::vector<int>{n});
      const double v =
          integrate_tensor(rule, [](std::span<const double> x) { return std::exp(x[0]); });
      CHECK(std::abs(v - std::exp(0.5)) <= 1e-10);
    }
  }
  SUBCASE("Hermite polynomial inside the window integrates to zero") {
    const auto rule = make_tensor_rule(std::vector<int>{1, 2});
    const MultiIndex k{1, 3};
    const double v =
        integrate_tensor(rule, [&](std::span<const double> x) { return eval_multi(x, k); });
    CHECK(std::abs(v) <= 1e-13);
  }
}

TEST_CASE("reduction of an approximation plan") {
  const WeightSpec spec(2, {1.0, 1.0}, {1.0, 1.0}, 0.5);
  const auto plan = make_plan(spec, 30.0, std::vector<int>{4, 3});
  const auto reduced = reduce_approximation(plan);

  SUBCASE("weights equal the tensor weights exactly") {
    REQUIRE(static_cast<std::int64_t>(reduced.rule.weights.size()) == plan.n_points());
    std::size_t i = 0;
    for (int i0 = 0; i0 < 4; ++i0) {
      for (int i1 = 0; i1 < 3; ++i1, ++i) {
        const double w =
            plan.tensor.rules[0].weights[i0] * plan.tensor.rules[1].weights[i1];
        CHECK(reduced.rule.weights[i] == w);
        CHECK(reduced.rule.nodes[i][0] == plan.tensor.rules[0].nodes[i0]);
        CHECK(reduced.rule.nodes[i][1] == plan.tensor.rules[1].nodes[i1]);
      }
    }
    CHECK(reduced.rule.provenance == IntegrationRule::Provenance::reduced_from_approximation);
  }
  SUBCASE("derivation log records the Hermite-integral collapse") {
    REQUIRE(!reduced.derivation_log.empty());
    const MultiIndex zero(2, 0);
    for (const auto& entry : reduced.derivation_log) {
      if (entry.h == zero) {
        CHECK(entry.quadrature_value == doctest::Approx(1.0).epsilon(1e-14));
      } else {
        CHECK(std::abs(entry.quadrature_value) <= 1e-12);
      }
    }
  }
  SUBCASE("reduced rule integrates the constant to one") {
    CHECK(reduced.rule.apply([](std::span<const double>) { return 1.0; }) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("reduction error chain for a unit-norm function") {
  // |INT(f) - Q(f)| <= ||f - A(f)||_L2 for the reduced rule Q
  const WeightSpec spec(1, {1.0}, {1.0}, 0.5);
  auto f = TestFunction::make_exp_linear({1.0});
  f.normalize_space(spec);
  for (int m : {2, 3, 5, 8}) {
    const auto plan = make_plan(spec, 64.0, std::vector<int>{m});
    const auto out = run(plan, [&](std::span<const double> x) { return f(x); });
    const double measured = exact_l2_error(out, f.coefficients(), plan.index_set);
    const auto reduced = reduce_approximation(plan);
    const double integral = reduced.rule.apply([&](std::span<const double> x) { return f(x); });
    const double reference = f.coefficients().at({0});  // INT(f) = fhat(0)
    CHECK(std::abs(reference - integral) <= measured + 1e-10);
  }
}

TEST_CASE("zero algorithm has worst-case error one") {
  // the constant function has unit space norm, INT(1) = 1, and A_0 = 0
  const WeightSpec spec(3, {1.0, 2.0, 3.0}, {1.0, 1.5, 2.0}, 0.4);
  SpectralFunction one;
  one.s = 3;
  one.set({0, 0, 0}, 1.0);
  CHECK(space_norm(spec, one) == 1.0);
  const auto rule = make_tensor_rule(std::vector<int>{2, 2, 2});
  const double integral =
      integrate_tensor(rule, [](std::span<const double>) { return 1.0; });
  CHECK(std::abs(integral - 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("integration needs no more points than approximation") {
  // empirical n(eps, INT) <= n(eps, APP) on the exp family
  const WeightSpec spec(1, {1.0}, {1.0}, 0.5);
  auto f = TestFunction::make_exp_linear({1.0});
  f.normalize_space(spec);
  const double reference = f.coefficients().at({0});
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const auto plan = exp_recipe(spec, eps);
    const double n_app = static_cast<double>(plan.n_points());
    int n_int = 0;
    for (int n = 1; n <= 200; ++n) {
      const auto rule = make_tensor_rule(std::vector<int>{n});
      const double v =
          integrate_tensor(rule, [&](std::span<const double> x) { return f(x); });
      if (std::abs(v - reference) <= eps) {
        n_int = n;
        break;
      }
    }
    REQUIRE(n_int > 0);
    CHECK(static_cast<double>(n_int) <= n_app);
  }
}
