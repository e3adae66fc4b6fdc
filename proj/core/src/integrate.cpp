#include "hermapp/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "hermapp/hermite.hpp"

namespace hermapp {

double IntegrationRule::apply(const std::function<double(std::span<const double>)>& f) const {
  std::vector<double> terms(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double fx = f(nodes[i]);
    if (!std::isfinite(fx))
      throw EvaluationError("IntegrationRule: integrand not finite at a node");
    terms[i] = weights[i] * fx;
  }
  return pairwise_sum(terms);
}

double integrate_tensor(const TensorRule& rule,
                        const std::function<double(std::span<const double>)>& f,
                        std::int64_t budget, int threads) {
  return apply_tensor(rule, f, budget, threads);
}

ReducedRule reduce_approximation(const ApproximationPlan& plan, std::int64_t point_budget) {
  const std::int64_t n = plan.n_points();
  if (n > point_budget) {
    throw BudgetError("reduce_approximation: node materialization exceeds budget",
                      BudgetReport{.predicted_n = static_cast<double>(n),
                                   .cost = static_cast<double>(n),
                                   .budget = static_cast<double>(point_budget)});
  }
  const int s = plan.spec.dim();

  ReducedRule out;
  out.rule.provenance = IntegrationRule::Provenance::reduced_from_approximation;
  out.rule.s = s;
  out.rule.nodes.reserve(n);
  out.rule.weights.reserve(n);

  // beta_k = (tensor weight at node k) * sum_h H_h(x_k) * integral(H_h).
  // All Hermite integrals vanish except H_0, and 0 is always in A(s,M),
  // so beta_k collapses to the tensor weight itself.
  std::vector<int> digit(s, 0);
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<double> x(s);
    double w = 1.0;
    for (int j = 0; j < s; ++j) {
      x[j] = plan.tensor.rules[j].nodes[digit[j]];
      w *= plan.tensor.rules[j].weights[digit[j]];
    }
    out.rule.nodes.push_back(std::move(x));
    out.rule.weights.push_back(w);
    for (int j = s - 1; j >= 0; --j) {
      if (++digit[j] < plan.tensor.orders[j]) break;
      digit[j] = 0;
    }
  }

  // Machine check of the collapse: integrate a few H_h, h in A \ {0}, with
  // rules inside their exactness window; each value must be zero, and the
  // h = 0 integral must be one.
  const MultiIndex zero(s, 0);
  std::vector<MultiIndex> probes{zero};
  for (const auto& h : plan.index_set.members()) {
    if (h == zero) continue;
    probes.push_back(h);
    if (probes.size() >= 4) break;
  }
  for (const auto& h : probes) {
    std::vector<int> orders(s);
    for (int j = 0; j < s; ++j) orders[j] = h[j] / 2 + 1;  // 2m-1 >= h_j
    const TensorRule exact_rule = make_tensor_rule(orders);
    const double val = apply_tensor(exact_rule, [&](std::span<const double> x) {
      return eval_multi(x, h);
    });
    out.derivation_log.push_back({h, val});
  }
  return out;
}

}  // namespace hermapp
