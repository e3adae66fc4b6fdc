#include "hermapp/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "hermapp/hermite.hpp"

namespace hermapp {

namespace {

// H_n and H_{n-1} at x, rescaled on the fly so the pair never overflows.
// true value = reported value * exp(log_scale). Near the extreme nodes of
// large rules |H_k| grows like e^{x^2/4}, past double range around n = 550.
struct ScaledPair {
  double hn;
  double hn1;
  double log_scale;
};

ScaledPair hermite_top_two(double x, int n) {
  double prev = 1.0;  // H_0
  double log_scale = 0.0;
  if (n == 0) return {prev, 0.0, 0.0};
  double cur = x;  // H_1
  for (int k = 1; k < n; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
    const double mag = std::max(std::abs(cur), std::abs(prev));
    if (mag > 1e150) {
      cur /= mag;
      prev /= mag;
      log_scale += std::log(mag);
    }
  }
  return {cur, prev, log_scale};
}

}  // namespace

GaussHermiteRule make_rule(int n) {
  if (n < 1) throw std::invalid_argument("make_rule: order must be positive");

  GaussHermiteRule rule;
  rule.order = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 1.0;
    return rule;
  }

  // Jacobi matrix of the orthonormal recurrence: zero diagonal,
  // off-diagonal sqrt(1..n-1). Its eigenvalues are the zeros of H_n.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd subdiag(n - 1);
  for (int k = 1; k < n; ++k) subdiag[k - 1] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, subdiag, Eigen::EigenvaluesOnly);
  for (int i = 0; i < n; ++i) rule.nodes[i] = solver.eigenvalues()[i];

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    // Newton polish on H_n; H_n'(x) = sqrt(n) H_{n-1}(x). The scale factor
    // cancels in the ratio.
    double x = rule.nodes[i];
    for (int step = 0; step < 2; ++step) {
      const auto sp = hermite_top_two(x, n);
      const double deriv = sqrt_n * sp.hn1;
      if (deriv == 0.0) break;
      x -= sp.hn / deriv;
    }
    rule.nodes[i] = x;
  }
  std::sort(rule.nodes.begin(), rule.nodes.end());

  // Symmetrize node pairs exactly, re-derive weights from the closed form,
  // then normalize so the weights sum to one in working precision.
  for (int i = 0; i < n / 2; ++i) {
    const double mag = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    rule.nodes[i] = -mag;
    rule.nodes[n - 1 - i] = mag;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;

  for (int i = 0; i < n; ++i) {
    // weight = 1/(n H_{n-1}^2), in log space; extreme weights of very large
    // rules underflow to zero, which is their correct double rounding
    const auto sp = hermite_top_two(rule.nodes[i], n);
    const double log_w = -(std::log(static_cast<double>(n)) +
                           2.0 * (std::log(std::abs(sp.hn1)) + sp.log_scale));
    rule.weights[i] = std::exp(log_w);
  }
  for (int i = 0; i < n / 2; ++i) {
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  const double total = pairwise_sum(rule.weights);
  for (double& w : rule.weights) w /= total;
  return rule;
}

double apply_1d(const GaussHermiteRule& rule, const std::function<double(double)>& f) {
  std::vector<double> terms(rule.order);
  for (int i = 0; i < rule.order; ++i) {
    const double fx = f(rule.nodes[i]);
    if (!std::isfinite(fx))
      throw EvaluationError("apply_1d: integrand is not finite at a quadrature node");
    terms[i] = rule.weights[i] * fx;
  }
  return pairwise_sum(terms);
}

std::int64_t TensorRule::total_points() const {
  std::int64_t n = 1;
  for (int m : orders) n *= m;
  return n;
}

TensorRule make_tensor_rule(std::span<const int> orders) {
  if (orders.empty()) throw std::invalid_argument("make_tensor_rule: empty order list");
  TensorRule rule;
  rule.orders.assign(orders.begin(), orders.end());
  rule.rules.reserve(orders.size());
  for (int m : orders) rule.rules.push_back(make_rule(m));
  return rule;
}

double apply_tensor(const TensorRule& rule,
                    const std::function<double(std::span<const double>)>& f,
                    std::int64_t budget, int threads) {
  const std::int64_t total = rule.total_points();
  if (total > budget) {
    throw BudgetError("apply_tensor: point budget exceeded",
                      BudgetReport{.orders = {rule.orders.begin(), rule.orders.end()},
                                   .predicted_n = static_cast<double>(total),
                                   .cost = static_cast<double>(total),
                                   .budget = static_cast<double>(budget)});
  }
  const int s = rule.dim();
  constexpr std::int64_t kChunk = 4096;
  const std::int64_t n_chunks = (total + kChunk - 1) / kChunk;
  std::vector<double> chunk_sums(n_chunks, 0.0);

  parallel_for_index(n_chunks, threads, [&](std::int64_t c) {
    const std::int64_t begin = c * kChunk;
    const std::int64_t end = std::min(begin + kChunk, total);
    // decode the odometer state at `begin` (last dimension fastest)
    std::vector<int> digit(s, 0);
    std::int64_t rem = begin;
    for (int j = s - 1; j >= 0; --j) {
      digit[j] = static_cast<int>(rem % rule.orders[j]);
      rem /= rule.orders[j];
    }
    std::vector<double> x(s);
    for (int j = 0; j < s; ++j) x[j] = rule.rules[j].nodes[digit[j]];
    double acc = 0.0;
    for (std::int64_t i = begin; i < end; ++i) {
      double w = 1.0;
      for (int j = 0; j < s; ++j) w *= rule.rules[j].weights[digit[j]];
      const double fx = f(x);
      if (!std::isfinite(fx))
        throw EvaluationError("apply_tensor: integrand is not finite at a quadrature node");
      acc += w * fx;
      // advance the odometer
      for (int j = s - 1; j >= 0; --j) {
        if (++digit[j] < rule.orders[j]) {
          x[j] = rule.rules[j].nodes[digit[j]];
          break;
        }
        digit[j] = 0;
        x[j] = rule.rules[j].nodes[0];
      }
    }
    chunk_sums[c] = acc;
  });
  return pairwise_sum(chunk_sums);
}

bool GPerpSpec::contains(const MultiIndex& v) const {
  if (v.size() != orders.size())
    throw DimensionError("GPerpSpec: multi-index length does not match orders");
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (v[j] == 0) continue;
    if (v[j] % 2 != 0 || v[j] < 2 * orders[j]) return false;
  }
  return true;
}

namespace detail {

TailF tail_F_detail(const WeightSpec& spec, std::span<const int> orders) {
  if (static_cast<int>(orders.size()) != spec.dim())
    throw DimensionError("tail_F: order list length does not match spec dimension");
  const double sqrt_8pi = std::sqrt(8.0 * M_PI);
  const double L = spec.log_inv_omega();

  // log g_j with g_j = sqrt(8 pi) sum_{l >= m_j} omega^{(1/2) a_j l^{b_j}},
  // the leading term factored out so the residual sum starts at one.
  std::vector<double> log_g(spec.dim());
  for (int j = 0; j < spec.dim(); ++j) {
    const double aj = spec.a()[j];
    const double bj = spec.b()[j];
    const int m = orders[j];
    if (m < 1) throw std::invalid_argument("tail_F: orders must be >= 1");
    const double mb = std::pow(static_cast<double>(m), bj);
    const double lead = 0.5 * aj * mb * L;
    double residual;
    if (bj == 1.0) {
      // geometric: sum_{q>=0} omega^{a q / 2} = 1 / (1 - omega^{a/2})
      residual = 1.0 / -std::expm1(-0.5 * aj * L);
    } else {
      residual = 0.0;
      for (std::int64_t q = 0;; ++q) {
        const double diff =
            0.5 * aj * (std::pow(static_cast<double>(m + q), bj) - mb) * L;
        const double term = std::exp(-diff);
        residual += term;
        if (term <= residual * 1e-18) break;
        if (q > 50'000'000) throw std::logic_error("tail_F: inner series failed to converge");
      }
    }
    log_g[j] = std::log(sqrt_8pi) - lead + std::log(residual);
  }

  const double max_log_g = *std::max_element(log_g.begin(), log_g.end());
  TailF out;
  if (max_log_g < -35.0) {
    // F = -1 + prod(1+g_j) = sum g_j up to a relatively negligible remainder
    double shifted = 0.0;
    for (double lg : log_g) shifted += std::exp(lg - max_log_g);
    out.log_value = max_log_g + std::log(shifted);
    out.value = std::exp(out.log_value);
    return out;
  }
  double S = 0.0;  // sum log1p(g_j)
  for (double lg : log_g) {
    if (lg > 35.0)
      S += lg;  // log1p(e^x) = x for large x
    else
      S += std::log1p(std::exp(lg));
  }
  out.value = std::expm1(S);
  out.log_value = std::log(out.value);
  return out;
}

}  // namespace detail

double tail_F(const WeightSpec& spec, std::span<const int> orders) {
  return detail::tail_F_detail(spec, orders).value;
}

double grile_error_bound(const SpectralFunction& g, const GPerpSpec& gperp) {
  const double q = std::pow(8.0 * M_PI, 0.25);
  std::vector<double> terms;
  for (const auto& [v, coef] : g.coeffs) {
    bool zero = true;
    for (int vj : v)
      if (vj != 0) zero = false;
    if (zero || !gperp.contains(v)) continue;
    int nz = 0;
    for (int vj : v)
      if (vj != 0) ++nz;
    terms.push_back(std::abs(coef) * std::pow(q, nz));
  }
  return pairwise_sum(terms);
}

}  // namespace hermapp
