#include "hermapp/hermite.hpp"

#include <cmath>

namespace hermapp {

HermiteEval eval_all(double x, int max_degree) {
  if (max_degree < 0) throw std::invalid_argument("eval_all: max_degree must be >= 0");
  HermiteEval out;
  out.point = x;
  out.values.resize(max_degree + 1);
  out.values[0] = 1.0;
  if (max_degree == 0) return out;
  out.values[1] = x;
  for (int k = 1; k < max_degree; ++k) {
    out.values[k + 1] =
        (x * out.values[k] - std::sqrt(static_cast<double>(k)) * out.values[k - 1]) /
        std::sqrt(static_cast<double>(k + 1));
  }
  return out;
}

double eval_multi(std::span<const double> x, const MultiIndex& k) {
  if (x.size() != k.size())
    throw DimensionError("eval_multi: point and multi-index dimensions differ");
  double prod = 1.0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    prod *= eval_all(x[j], k[j]).values[k[j]];
  }
  return prod;
}

double cramer_bound_margin(double x, int k) {
  if (k < 0) throw std::invalid_argument("cramer_bound_margin: k must be >= 0");
  // 1/sqrt(phi(x)) = (2 pi)^{1/4} e^{x^2/4}
  const double bound = std::pow(2.0 * M_PI, 0.25) * std::exp(0.25 * x * x);
  const double hk = eval_all(x, k).values[k];
  return bound - std::abs(hk);
}

namespace {

// factorials 0!..170! are representable in double
constexpr int kFactTableSize = 171;
const double* factorial_table() {
  static const auto table = [] {
    static double t[kFactTableSize];
    t[0] = 1.0;
    for (int i = 1; i < kFactTableSize; ++i) t[i] = t[i - 1] * static_cast<double>(i);
    return t;
  }();
  return table;
}

}  // namespace

LinearizationExpansion linearize_product(int h, int v) {
  if (h < 0 || v < 0) throw std::invalid_argument("linearize_product: degrees must be >= 0");
  const int t = std::min(h, v);
  const int T = std::max(h, v);
  const int base = T - t;  // |h - v|
  LinearizationExpansion out;
  out.h = h;
  out.v = v;
  out.terms.reserve(t + 1);
  const double* fact = factorial_table();
  const bool direct = h + v < kFactTableSize;  // largest factorial is (h+v)!
  const double half_log_ratio = 0.5 * (std::lgamma(t + 1.0) - std::lgamma(T + 1.0));
  for (int r = 0; r <= t; ++r) {
    const int degree = base + 2 * r;
    // sqrt(t!/T!) * C(T, t-r) * sqrt(degree!) / r!
    double coef;
    if (direct) {
      coef = std::sqrt(fact[t] / fact[T]) * (fact[T] / (fact[t - r] * fact[T - t + r])) *
             std::sqrt(fact[degree]) / fact[r];
    } else {
      // log-gamma route: factorials past 170! overflow double precision
      const double log_coef = half_log_ratio + std::lgamma(T + 1.0) -
                              std::lgamma(t - r + 1.0) - std::lgamma(T - t + r + 1.0) +
                              0.5 * std::lgamma(degree + 1.0) - std::lgamma(r + 1.0);
      coef = std::exp(log_coef);
    }
    out.terms.push_back({degree, coef});
  }
  return out;
}

}  // namespace hermapp
