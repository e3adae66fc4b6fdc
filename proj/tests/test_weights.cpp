#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include <nlohmann/json.hpp>

#include "hermapp/weights.hpp"

using namespace hermapp;

namespace {

WeightSpec spec1(double omega = 0.5) {
  return WeightSpec(1, {1.0}, {1.0}, omega);
}

}  // namespace

TEST_CASE("exponent of omega_k") {
  const WeightSpec spec(2, {1.0, 2.0}, {1.0, 2.0}, 0.5);
  CHECK(exponent(spec, {3, 2}) == doctest::Approx(11.0).epsilon(1e-15));
  CHECK(exponent(spec, {0, 0}) == 0.0);
  CHECK(weight_value(spec, {0, 0}) == 1.0);

  const WeightSpec frac(1, {1.0}, {1.5}, 0.5);
  CHECK(exponent(frac, {4}) == doctest::Approx(8.0).epsilon(1e-15));

  CHECK_THROWS_AS(exponent(spec, {1}), DimensionError);
}

TEST_CASE("index set enumeration matches brute force oracles") {
  SUBCASE("one dimension") {
    const auto set = enumerate_index_set(spec1(), 10.0);
    // oracle: 2^k < 10 exhaustively over k <= 10
    std::vector<MultiIndex> expected;
    for (int k = 0; k <= 10; ++k)
      if (std::pow(2.0, k) < 10.0) expected.push_back({k});
    CHECK(set.members() == expected);
    CHECK(set.size() == 4);
  }
  SUBCASE("two dimensions") {
    const WeightSpec spec(2, {1.0, 1.0}, {1.0, 1.0}, 0.5);
    const auto set = enumerate_index_set(spec, 8.0);
    std::size_t count = 0;
    for (int k1 = 0; k1 <= 10; ++k1)
      for (int k2 = 0; k2 <= 10; ++k2)
        if (std::pow(2.0, k1 + k2) < 8.0) {
          ++count;
          CHECK(set.contains({k1, k2}));
        }
    CHECK(set.size() == count);
    CHECK(set.size() == 6);  // k1 + k2 <= 2
  }
  SUBCASE("threshold just above one keeps only the zero index") {
    const auto set = enumerate_index_set(spec1(), 1.0 + 1e-12);
    REQUIRE(set.size() == 1);
    CHECK(set.members()[0] == MultiIndex{0});
  }
  SUBCASE("M <= 1 rejected") {
    CHECK_THROWS_AS(enumerate_index_set(spec1(), 1.0), std::invalid_argument);
  }
}

TEST_CASE("index set frontier audit and cardinality bound") {
  const WeightSpec spec(4, {1.0, 1.3, 2.0, 2.5}, {1.0, 1.5, 2.0, 1.0}, 0.55);
  const double M = 1e6;
  const auto set = enumerate_index_set(spec, M);
  const double log_M = std::log(M);
  const double L = spec.log_inv_omega();

  for (const auto& h : set.members()) {
    CHECK(exponent(spec, h) * L < log_M);
    // frontier: bumping any coordinate out of the set must break the inequality
    for (int j = 0; j < spec.dim(); ++j) {
      MultiIndex up = h;
      up[j] += 1;
      if (!set.contains(up)) CHECK_FALSE(exponent(spec, up) * L < log_M);
    }
  }

  // brute-force count over the full cap box
  const auto caps = index_set_caps(spec, M);
  std::size_t count = 0;
  MultiIndex k(4, 0);
  std::function<void(int)> walk = [&](int j) {
    if (j == 4) {
      if (exponent(spec, k) * L < log_M) ++count;
      return;
    }
    for (k[j] = 0; k[j] <= caps[j]; ++k[j]) walk(j + 1);
    k[j] = 0;
  };
  walk(0);
  CHECK(set.size() == count);
  CHECK(static_cast<double>(set.size()) <= index_set_cardinality_bound(spec, M));

  // cap tightness: no member exceeds the caps, and a cap is achieved along
  // each axis whenever its own exponent is below the threshold
  for (int j = 0; j < spec.dim(); ++j) {
    int max_seen = 0;
    for (const auto& h : set.members()) max_seen = std::max(max_seen, h[j]);
    CHECK(max_seen <= caps[j]);
    MultiIndex axis(4, 0);
    axis[j] = static_cast<int>(caps[j]);
    if (exponent(spec, axis) * L < log_M) CHECK(set.contains(axis));
  }
}

TEST_CASE("big_B prefix sums") {
  const WeightSpec spec(2, {1.0, 1.0}, {1.0, 2.0}, 0.5);
  CHECK(big_B(spec, 2) == doctest::Approx(1.5));
  CHECK(big_B(spec, 1) == doctest::Approx(1.0));
  const WeightSpec ones(2, {1.0, 1.0}, {1.0, 1.0}, 0.5);
  CHECK(big_B(ones, 2) == doctest::Approx(2.0));
  CHECK_THROWS_AS(big_B(spec, 3), std::out_of_range);
  CHECK_THROWS_AS(big_B(spec, 0), std::out_of_range);
}

TEST_CASE("K_of_omega") {
  SUBCASE("omega = 1/2") {
    const auto [k, K] = K_of_omega(0.5);
    CHECK(k == 4);
    const double expected = 11.0 + 2.0 * std::log1p(std::pow(0.5, 4)) / std::log(2.0);
    CHECK(K == doctest::Approx(expected).epsilon(1e-15));
    CHECK(K == doctest::Approx(11.1749).epsilon(1e-4));
  }
  SUBCASE("small omega hits the k = 1 branch") {
    // omega^{-1/8} - 1 >= 1 makes the log ratio non-positive
    const auto [k, K] = K_of_omega(std::pow(2.0, -8));
    CHECK(k == 1);
    CHECK(K > 0.0);
  }
  SUBCASE("defining inequality and minimality of k") {
    for (double omega : {0.05, 0.2, 0.3, 0.5, 0.7, 0.9, 0.99}) {
      const auto [k, K] = K_of_omega(omega);
      const double budget = 0.125 * std::log(1.0 / omega);
      CHECK(std::log1p(std::pow(omega, k)) <= budget * (1 + 1e-12));
      if (k >= 2) CHECK(std::log1p(std::pow(omega, k - 1)) > budget);
    }
  }
  SUBCASE("rejects omega outside (0,1)") {
    CHECK_THROWS_AS(K_of_omega(0.0), std::invalid_argument);
    CHECK_THROWS_AS(K_of_omega(1.0), std::invalid_argument);
  }
}

TEST_CASE("D factor") {
  const double omega = std::exp(-1.0);  // log(1/omega) = 1
  CHECK(D_of(WeightSpec(1, {1.0}, {1.0}, omega)) == doctest::Approx(32.0).epsilon(1e-14));
  CHECK(D_of(WeightSpec(2, {1.0, 1.0}, {1.0, 1.0}, omega)) ==
        doctest::Approx(1024.0).epsilon(1e-14));
  // increasing omega toward 1 decreases log(1/omega), hence increases D
  CHECK(D_of(spec1(0.7)) > D_of(spec1(0.5)));
  CHECK(D_of(spec1(0.5)) > D_of(spec1(0.3)));
}

TEST_CASE("WeightSpec validation") {
  CHECK_THROWS_AS(WeightSpec(1, {0.5}, {1.0}, 0.5), std::invalid_argument);  // a1 < 1
  CHECK_THROWS_AS(WeightSpec(2, {2.0, 1.0}, {1.0, 1.0}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(WeightSpec(1, {1.0}, {0.9}, 0.5), std::invalid_argument);  // b < 1
  CHECK_THROWS_AS(WeightSpec(1, {1.0}, {1.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(WeightSpec(1, {1.0}, {1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(WeightSpec(2, {1.0}, {1.0, 1.0}, 0.5), DimensionError);
}

TEST_CASE("WeightSpec JSON round trip and sequence generators") {
  SUBCASE("explicit") {
    const auto j = nlohmann::json::parse(
        R"({"s":2,"a":[1.0,2.0],"b":{"kind":"explicit","values":[1.0,1.5]},"omega":0.5})");
    const auto spec = WeightSpec::from_json(j);
    CHECK(spec.a() == std::vector<double>{1.0, 2.0});
    CHECK(spec.b() == std::vector<double>{1.0, 1.5});
    const auto spec2 = WeightSpec::from_json(spec.to_json());
    CHECK(spec2.a() == spec.a());
    CHECK(spec2.b() == spec.b());
    CHECK(spec2.omega() == spec.omega());
  }
  SUBCASE("geometric generates r^(j-1)") {
    const auto j = nlohmann::json::parse(
        R"({"s":4,"a":{"kind":"geometric","first":1.0,"ratio":2.0},"b":{"kind":"geometric","first":1.0,"ratio":2.0},"omega":0.5})");
    const auto spec = WeightSpec::from_json(j);
    CHECK(spec.a() == std::vector<double>{1.0, 2.0, 4.0, 8.0});
  }
  SUBCASE("power generates j^p") {
    const auto j = nlohmann::json::parse(
        R"({"s":3,"a":{"kind":"power","exponent":2.0},"b":{"kind":"power","exponent":0.0},"omega":0.5})");
    const auto spec = WeightSpec::from_json(j);
    CHECK(spec.a() == std::vector<double>{1.0, 4.0, 9.0});
    CHECK(spec.b() == std::vector<double>{1.0, 1.0, 1.0});
  }
  SUBCASE("dimension override") {
    const auto j = nlohmann::json::parse(
        R"({"s":2,"a":{"kind":"geometric","ratio":2.0},"b":{"kind":"geometric","ratio":1.0},"omega":0.5})");
    const auto spec = WeightSpec::from_json(j, 5);
    CHECK(spec.dim() == 5);
    CHECK(spec.a().back() == 16.0);
  }
  SUBCASE("diagnostics") {
    CHECK_THROWS_AS(WeightSpec::from_json(nlohmann::json::parse(
                        R"({"s":3,"a":[1.0,2.0],"b":[1,1,1],"omega":0.5})")),
                    ConfigError);
    CHECK_THROWS_AS(WeightSpec::from_json(nlohmann::json::parse(
                        R"({"s":1,"a":[1.0],"b":[1.0]})")),
                    ConfigError);
  }
}

TEST_CASE("weight materialization guard") {
  // the exponent is far past the underflow guard; the weight is reported 0
  const WeightSpec spec(1, {1.0}, {2.0}, 0.5);
  CHECK(weight_value(spec, {40}) == 0.0);
  CHECK(exponent(spec, {40}) == doctest::Approx(1600.0));
}
