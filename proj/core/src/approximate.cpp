#include "hermapp/approximate.hpp"

#include <algorithm>
#include <cmath>

#include "hermapp/hermite.hpp"

namespace hermapp {

namespace {

std::vector<double> to_real(std::span<const int> orders) {
  return {orders.begin(), orders.end()};
}

}  // namespace

ApproximationPlan make_plan(const WeightSpec& spec, double M, std::span<const int> orders,
                            double cost_budget, Provenance provenance) {
  if (!(M > 1.0)) throw std::invalid_argument("make_plan: M must exceed 1");
  if (static_cast<int>(orders.size()) != spec.dim())
    throw DimensionError("make_plan: order list length does not match dimension");
  for (int m : orders)
    if (m < 1) throw std::invalid_argument("make_plan: orders must be >= 1");

  double predicted_n = 1.0;
  for (int m : orders) predicted_n *= static_cast<double>(m);

  IndexSet set = enumerate_index_set(spec, M);
  const double cost = predicted_n * static_cast<double>(set.size());
  if (cost > cost_budget) {
    throw BudgetError("make_plan: evaluation cost exceeds budget",
                      BudgetReport{.orders = to_real(orders),
                                   .predicted_n = predicted_n,
                                   .set_size = set.size(),
                                   .cost = cost,
                                   .budget = cost_budget});
  }
  return ApproximationPlan{spec, M, std::move(set), make_tensor_rule(orders),
                           std::move(provenance)};
}

PlanSizing exp_recipe_sizing(const WeightSpec& spec, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("exp_recipe: epsilon must lie in (0,1)");
  const int s = spec.dim();
  const double B = big_B(spec, s);
  const double K = K_of_omega(spec.omega()).K;
  const double D = D_of(spec);
  const double L = spec.log_inv_omega();
  const double expo = 2.0 * B + K + 1.0;

  PlanSizing sz;
  sz.M = 2.0 / (eps * eps);
  // eta = (eps^2 / (2 D^{1/(2B+K+1)}))^{(2B+K+1)/2}, kept in log form since
  // it underflows readily
  sz.log_eta = 0.5 * expo * (2.0 * std::log(eps) - std::log(2.0)) - 0.5 * std::log(D);
  sz.eta = std::exp(sz.log_eta);

  // log(log(1 + eta^2)); for tiny eta, log1p(eta^2) ~ eta^2
  double log_log1p_eta2;
  if (sz.log_eta > -15.0) {
    log_log1p_eta2 = std::log(std::log1p(sz.eta * sz.eta));
  } else {
    log_log1p_eta2 = 2.0 * sz.log_eta;
  }
  const double log_c = std::log(s * std::sqrt(8.0 * M_PI) / (1.0 - std::sqrt(spec.omega())));
  const double u = log_c - log_log1p_eta2;  // log of the inner ratio
  const double t = u > 35.0 ? u : std::log1p(std::exp(u));  // log(1 + ratio)

  sz.m = 0.0;
  for (int j = 0; j < s; ++j) {
    const double inner = std::pow(2.0, spec.b()[j] + 1.0) / spec.a()[j] * t / L;
    sz.m = std::max(sz.m, std::ceil(std::pow(inner, B)));
  }
  sz.m = std::max(sz.m, 1.0);

  sz.orders_real.resize(s);
  sz.orders.resize(s);
  sz.predicted_n = 1.0;
  for (int j = 0; j < s; ++j) {
    const double mj = std::floor(std::pow(sz.m, 1.0 / (B * spec.b()[j])));
    sz.orders_real[j] = std::max(mj, 1.0);
    sz.orders[j] = sz.orders_real[j] < 2e9 ? static_cast<int>(sz.orders_real[j]) : 0;
    sz.predicted_n *= sz.orders_real[j];
  }
  return sz;
}

namespace {

ApproximationPlan build_from_sizing(const WeightSpec& spec, const PlanSizing& sz,
                                    double cost_budget, Provenance provenance) {
  std::uint64_t set_size = 0;
  try {
    IndexSet probe = enumerate_index_set(spec, sz.M);
    set_size = probe.size();
  } catch (const BudgetError&) {
    // fall through with set_size 0; the cost check below rejects anyway
  }
  const double cost = sz.predicted_n * static_cast<double>(std::max<std::uint64_t>(set_size, 1));
  if (set_size == 0 || cost > cost_budget || sz.orders.empty() ||
      std::find(sz.orders.begin(), sz.orders.end(), 0) != sz.orders.end()) {
    throw BudgetError("recipe plan exceeds evaluation budget",
                      BudgetReport{.m = sz.m,
                                   .orders = sz.orders_real,
                                   .predicted_n = sz.predicted_n,
                                   .set_size = set_size,
                                   .cost = cost,
                                   .budget = cost_budget});
  }
  return make_plan(spec, sz.M, sz.orders, cost_budget, std::move(provenance));
}

}  // namespace

ApproximationPlan exp_recipe(const WeightSpec& spec, double eps, double cost_budget) {
  const PlanSizing sz = exp_recipe_sizing(spec, eps);
  Provenance prov;
  prov.kind = Provenance::Kind::exp_recipe;
  prov.epsilon = eps;
  ApproximationPlan plan = build_from_sizing(spec, sz, cost_budget, std::move(prov));

  // re-verify the chain numerically: F_n <= eta^2 and bound <= eps
  const auto tf = detail::tail_F_detail(spec, plan.tensor.orders);
  if (2.0 * sz.log_eta > -700.0 && tf.log_value > 2.0 * sz.log_eta + 1e-9)
    throw std::logic_error("exp_recipe: tail bound F_n <= eta^2 failed");
  const ErrorReport report = a_priori_bound(spec, plan.M, plan.tensor.orders);
  if (!(report.bound <= eps * (1.0 + 1e-9)))
    throw std::logic_error("exp_recipe: a-priori bound exceeds epsilon");
  return plan;
}

PlanSizing spt_recipe_sizing(const WeightSpec& spec, double eps, double beta,
                             std::optional<double> M) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("spt_recipe: epsilon must lie in (0,1)");
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("spt_recipe: beta must lie in (0,1)");
  const double K = K_of_omega(spec.omega()).K;
  const double log_inv_omega_tilde = spec.log_inv_omega() / (2.0 * K + 2.0);

  PlanSizing sz;
  sz.M = M.value_or(2.0 / (eps * eps));
  if (!(sz.M > 1.0)) throw std::invalid_argument("spt_recipe: M must exceed 1");
  const double log_M = std::log(sz.M);
  const int s = spec.dim();
  sz.orders_real.resize(s);
  sz.orders.resize(s);
  sz.predicted_n = 1.0;
  for (int j = 0; j < s; ++j) {
    const double inner = log_M / (std::pow(spec.a()[j], beta) * log_inv_omega_tilde);
    const double mj = 2.0 * std::ceil(std::pow(inner, 1.0 / spec.b()[j])) - 1.0;
    sz.orders_real[j] = std::max(mj, 1.0);
    sz.orders[j] = sz.orders_real[j] < 2e9 ? static_cast<int>(sz.orders_real[j]) : 0;
    sz.predicted_n *= sz.orders_real[j];
  }
  return sz;
}

ApproximationPlan spt_recipe(const WeightSpec& spec, double eps, double beta, double delta,
                             std::optional<double> M, double cost_budget) {
  if (!(delta > 0.0)) throw std::invalid_argument("spt_recipe: delta must be positive");
  const PlanSizing sz = spt_recipe_sizing(spec, eps, beta, M);
  Provenance prov;
  prov.kind = Provenance::Kind::spt_recipe;
  prov.epsilon = eps;
  prov.beta = beta;
  prov.delta = delta;
  if (!M.has_value())
    prov.note = "M defaulted to 2/eps^2; the proof's constant-dependent M is not computable";
  return build_from_sizing(spec, sz, cost_budget, std::move(prov));
}

ErrorReport a_priori_bound(const WeightSpec& spec, double M, std::span<const int> orders) {
  if (!(M > 1.0)) throw std::invalid_argument("a_priori_bound: M must exceed 1");
  const double B = big_B(spec, spec.dim());
  const double K = K_of_omega(spec.omega()).K;
  ErrorReport rep;
  rep.truncation = 1.0 / M;
  rep.d_factor = D_of(spec);
  const auto tf = detail::tail_F_detail(spec, orders);
  rep.tail = tf.value;
  const double log_amp = (2.0 * B + K) * std::log(M);
  rep.amplification = log_amp > 709.0 ? HUGE_VAL : std::exp(log_amp);
  const double log_term = log_amp + std::log(rep.d_factor) + tf.log_value;
  rep.quadrature_term = log_term > 709.0 ? HUGE_VAL : std::exp(log_term);
  rep.bound = std::sqrt(rep.truncation + rep.quadrature_term);
  rep.n_points = 1;
  for (int m : orders) {
    rep.n_points = rep.n_points <= (1LL << 62) / std::max(m, 1) ? rep.n_points * m : -1;
  }
  return rep;
}

namespace {

// Per-dimension tables T_j[i][d] = alpha_i H_d(x_i) with the rule weight
// folded in, so the product over dimensions carries the tensor weight.
std::vector<std::vector<std::vector<double>>> weighted_tables(const ApproximationPlan& plan) {
  const int s = plan.spec.dim();
  std::vector<int> maxdeg(s, 0);
  for (const auto& h : plan.index_set.members())
    for (int j = 0; j < s; ++j) maxdeg[j] = std::max(maxdeg[j], h[j]);
  std::vector<std::vector<std::vector<double>>> tables(s);
  for (int j = 0; j < s; ++j) {
    const auto& rule = plan.tensor.rules[j];
    tables[j].resize(rule.order);
    for (int i = 0; i < rule.order; ++i) {
      const HermiteEval he = eval_all(rule.nodes[i], maxdeg[j]);
      tables[j][i].resize(maxdeg[j] + 1);
      for (int d = 0; d <= maxdeg[j]; ++d)
        tables[j][i][d] = rule.weights[i] * he.values[d];
    }
  }
  return tables;
}

}  // namespace

SpectralFunction run_tabulated(const ApproximationPlan& plan,
                               std::span<const double> node_values, int threads) {
  const std::int64_t n = plan.n_points();
  if (static_cast<std::int64_t>(node_values.size()) != n)
    throw DimensionError("run_tabulated: node value table size mismatch");
  for (double v : node_values)
    if (!std::isfinite(v))
      throw EvaluationError("run_tabulated: non-finite node value");

  const int s = plan.spec.dim();
  const auto tables = weighted_tables(plan);
  const auto& members = plan.index_set.members();

  std::vector<double> coeff(members.size(), 0.0);
  constexpr std::int64_t kBlock = 4096;
  const std::int64_t n_blocks = (n + kBlock - 1) / kBlock;

  parallel_for_index(static_cast<std::int64_t>(members.size()), threads,
                     [&](std::int64_t hi) {
    const MultiIndex& h = members[hi];
    std::vector<double> block_sums;
    block_sums.reserve(n_blocks);
    std::vector<int> digit(s, 0);
    // prefix[j] = prod_{l<=j} T_l[digit_l][h_l]
    std::vector<double> prefix(s, 1.0);
    auto rebuild_from = [&](int from) {
      for (int j = from; j < s; ++j) {
        const double base = j == 0 ? 1.0 : prefix[j - 1];
        prefix[j] = base * tables[j][digit[j]][h[j]];
      }
    };
    rebuild_from(0);
    double acc = 0.0;
    std::int64_t in_block = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      acc += node_values[i] * prefix[s - 1];
      if (++in_block == kBlock) {
        block_sums.push_back(acc);
        acc = 0.0;
        in_block = 0;
      }
      // odometer advance; only suffix products change
      int j = s - 1;
      for (; j >= 0; --j) {
        if (++digit[j] < plan.tensor.orders[j]) break;
        digit[j] = 0;
      }
      if (j < 0) break;
      rebuild_from(j);
    }
    if (in_block > 0) block_sums.push_back(acc);
    coeff[hi] = pairwise_sum(block_sums);
  });

  SpectralFunction out;
  out.s = s;
  for (std::size_t i = 0; i < members.size(); ++i) out.coeffs[members[i]] = coeff[i];
  return out;
}

SpectralFunction run(const ApproximationPlan& plan,
                     const std::function<double(std::span<const double>)>& f, int threads) {
  const std::int64_t n = plan.n_points();
  const int s = plan.spec.dim();
  std::vector<double> values(n);
  constexpr std::int64_t kChunk = 4096;
  const std::int64_t n_chunks = (n + kChunk - 1) / kChunk;
  parallel_for_index(n_chunks, threads, [&](std::int64_t c) {
    const std::int64_t begin = c * kChunk;
    const std::int64_t end = std::min(begin + kChunk, n);
    std::vector<int> digit(s, 0);
    std::int64_t rem = begin;
    for (int j = s - 1; j >= 0; --j) {
      digit[j] = static_cast<int>(rem % plan.tensor.orders[j]);
      rem /= plan.tensor.orders[j];
    }
    std::vector<double> x(s);
    for (int j = 0; j < s; ++j) x[j] = plan.tensor.rules[j].nodes[digit[j]];
    for (std::int64_t i = begin; i < end; ++i) {
      const double fx = f(x);
      if (!std::isfinite(fx))
        throw EvaluationError("run: f is not finite at a tensor node");
      values[i] = fx;
      for (int j = s - 1; j >= 0; --j) {
        if (++digit[j] < plan.tensor.orders[j]) {
          x[j] = plan.tensor.rules[j].nodes[digit[j]];
          break;
        }
        digit[j] = 0;
        x[j] = plan.tensor.rules[j].nodes[0];
      }
    }
  });
  return run_tabulated(plan, values, threads);
}

double exact_l2_error(const SpectralFunction& plan_output, const SpectralFunction& truth,
                      const IndexSet& index_set) {
  if (plan_output.s != truth.s)
    throw DimensionError("exact_l2_error: dimension mismatch");
  std::vector<double> sq;
  sq.reserve(index_set.size() + truth.coeffs.size());
  for (const auto& h : index_set.members()) {
    const double d = truth.at(h) - plan_output.at(h);
    sq.push_back(d * d);
  }
  // h outside A but in the truth support
  for (const auto& [h, c] : truth.coeffs) {
    if (!index_set.contains(h)) sq.push_back(c * c);
  }
  return std::sqrt(pairwise_sum(sq));
}

}  // namespace hermapp
