#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hermapp/common.hpp"
#include "hermapp/spectral.hpp"
#include "hermapp/weights.hpp"

namespace hermapp {

/// A one-dimensional Gauss-Hermite rule for the standard Gaussian weight:
/// nodes are the zeros of H_n (ascending), weights alpha_i = 1/(n H_{n-1}(x_i)^2).
/// Nodes and weights are symmetric about zero and the weights sum to one.
struct GaussHermiteRule {
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Builds the order-n rule: symmetric-tridiagonal eigensolve (diagonal 0,
/// off-diagonals sqrt(1..n-1)), one or two Newton polish steps on H_n with
/// the recurrence-evaluated derivative sqrt(n) H_{n-1}, weights from the
/// closed form, then explicit symmetrization and weight normalization.
/// Robust to n around 500; beyond that the extreme weights underflow.
GaussHermiteRule make_rule(int n);

/// Q_n(f) = sum_i alpha_i f(x_i), accumulated pairwise in node order.
/// A non-finite f(x_i) raises EvaluationError.
double apply_1d(const GaussHermiteRule& rule, const std::function<double(double)>& f);

/// Full tensor product of one-dimensional rules with orders m_1..m_s.
struct TensorRule {
  std::vector<int> orders;
  std::vector<GaussHermiteRule> rules;

  int dim() const { return static_cast<int>(orders.size()); }
  std::int64_t total_points() const;
};

TensorRule make_tensor_rule(std::span<const int> orders);

/// The tensor sum over all prod m_j nodes. Iteration is an odometer over
/// the index ranges (no node grid is materialized); chunk partial sums are
/// combined with a fixed-shape pairwise tree, so the result is identical
/// for every thread count. Throws BudgetError when total_points > budget.
double apply_tensor(const TensorRule& rule,
                    const std::function<double(std::span<const double>)>& f,
                    std::int64_t budget = 100'000'000, int threads = 1);

/// Multi-indices the tensor rule fails to annihilate: every coordinate is
/// zero, or even and >= 2 m_j.
struct GPerpSpec {
  std::vector<int> orders;
  bool contains(const MultiIndex& v) const;
};

namespace detail {
struct TailF {
  double value = 0.0;
  double log_value = 0.0;  // log(value), finite even when value underflows
};
TailF tail_F_detail(const WeightSpec& spec, std::span<const int> orders);
}  // namespace detail

/// F_n = sum over v in Gperp \ {0} of (8 pi)^{|v|_*/2} omega^{(1/2) sum_j a_j (v_j/2)^{b_j}},
/// computed in the factored form -1 + prod_j (1 + sqrt(8 pi) sum_{l>=m_j} omega^{(1/2) a_j l^{b_j}})
/// with inner series truncated at relative 1e-18 and the outer product
/// assembled via log1p/expm1 so small tails keep full relative precision.
double tail_F(const WeightSpec& spec, std::span<const int> orders);

/// Right-hand side of the tensor-rule error bound for a finite series g:
/// sum over v in Gperp \ {0} of |ghat(v)| (8 pi)^{|v|_*/4}.
double grile_error_bound(const SpectralFunction& g, const GPerpSpec& gperp);

}  // namespace hermapp
