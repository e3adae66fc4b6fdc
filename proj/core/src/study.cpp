#include "hermapp/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace hermapp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig cfg;
  if (!j.contains("space")) throw ConfigError("config: field 'space' missing");
  cfg.space = j.at("space");
  if (j.contains("function")) cfg.function = j.at("function");

  if (!j.contains("sweep")) throw ConfigError("config: field 'sweep' missing");
  const auto& sw = j.at("sweep");
  const std::string kind = sw.value("kind", "");
  if (kind == "epsilon_ladder") {
    cfg.sweep.kind = Sweep::Kind::epsilon_ladder;
    for (const auto& e : sw.at("epsilons")) cfg.sweep.epsilons.push_back(e.get<double>());
  } else if (kind == "order_ladder") {
    cfg.sweep.kind = Sweep::Kind::order_ladder;
    for (const auto& o : sw.at("orders")) {
      std::vector<int> orders;
      for (const auto& m : o) orders.push_back(m.get<int>());
      cfg.sweep.order_ladder.push_back(std::move(orders));
    }
  } else if (kind == "dimension_ladder") {
    cfg.sweep.kind = Sweep::Kind::dimension_ladder;
    for (const auto& d : sw.at("dims")) cfg.sweep.dims.push_back(d.get<int>());
    cfg.sweep.dim_epsilon = sw.value("epsilon", 1e-3);
  } else {
    throw ConfigError("config: sweep.kind must be epsilon_ladder, order_ladder or "
                      "dimension_ladder, got '" + kind + "'");
  }

  if (j.contains("recipe")) {
    const auto& rc = j.at("recipe");
    const std::string rkind = rc.value("kind", "exp");
    if (rkind == "exp") {
      cfg.recipe.kind = Recipe::Kind::exp;
    } else if (rkind == "spt") {
      cfg.recipe.kind = Recipe::Kind::spt;
      cfg.recipe.beta = rc.value("beta", 0.5);
      cfg.recipe.delta = rc.value("delta", 1.0);
      if (rc.contains("M")) cfg.recipe.M = rc.at("M").get<double>();
    } else if (rkind == "manual") {
      cfg.recipe.kind = Recipe::Kind::manual;
      if (rc.contains("M")) cfg.recipe.M = rc.at("M").get<double>();
    } else {
      throw ConfigError("config: recipe.kind must be exp, spt or manual, got '" + rkind + "'");
    }
  }
  cfg.search = j.value("search", true);
  cfg.cost_budget = j.value("cost_budget", 1e9);
  cfg.threads = j.value("threads", 1);
  if (j.contains("output")) {
    cfg.out_csv = j.at("output").value("csv", "");
    cfg.out_json = j.at("output").value("json", "");
  }
  return cfg;
}

TestFunction make_test_function(const nlohmann::json& j, const WeightSpec& spec) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("function: expected {\"kind\":...}");
  const std::string kind = j.at("kind").get<std::string>();
  TestFunction f = [&] {
    if (kind == "exp_linear") {
      std::vector<double> lambda;
      const auto& lj = j.at("lambda");
      if (lj.is_number()) {
        lambda.assign(spec.dim(), lj.get<double>());
      } else {
        for (const auto& v : lj) lambda.push_back(v.get<double>());
        const double pad = j.value("pad", 0.0);
        while (static_cast<int>(lambda.size()) < spec.dim()) lambda.push_back(pad);
        lambda.resize(spec.dim());
      }
      return TestFunction::make_exp_linear(std::move(lambda));
    }
    if (kind == "finite_series" || kind == "polynomial") {
      const auto fkind = kind == "polynomial" ? TestFunction::Kind::polynomial
                                              : TestFunction::Kind::finite_series;
      SpectralFunction sf;
      sf.s = spec.dim();
      if (j.contains("coeffs")) {
        for (const auto& entry : j.at("coeffs")) {
          MultiIndex k;
          for (const auto& v : entry.at("k")) k.push_back(v.get<int>());
          if (static_cast<int>(k.size()) != spec.dim())
            throw ConfigError("function: coefficient index length does not match s");
          sf.coeffs[std::move(k)] = entry.at("c").get<double>();
        }
      } else if (j.contains("decay")) {
        const double power = j.at("decay").at("power").get<double>();
        const double support_M = j.at("decay").at("support_M").get<double>();
        const IndexSet support = enumerate_index_set(spec, support_M);
        const double L = spec.log_inv_omega();
        for (const auto& k : support.members()) {
          sf.coeffs[k] = std::exp(-power * exponent(spec, k) * L);
        }
      } else {
        throw ConfigError("function: finite_series needs 'coeffs' or 'decay'");
      }
      return TestFunction::make_series(std::move(sf), fkind);
    }
    throw ConfigError("function: unknown kind '" + kind + "'");
  }();
  const std::string norm = j.value("normalize", "none");
  if (norm == "space") {
    f.normalize_space(spec);
  } else if (norm != "none") {
    throw ConfigError("function: normalize must be 'none' or 'space'");
  }
  return f;
}

namespace {

// Exactness-window coupling for order ladders: M = omega^{-c} with
// c = min_j a_j (2 m_j)^{b_j}, which caps every h_j at 2 m_j - 1.
double window_M(const WeightSpec& spec, std::span<const int> orders) {
  double c = HUGE_VAL;
  for (int j = 0; j < spec.dim(); ++j) {
    c = std::min(c, spec.a()[j] * std::pow(2.0 * orders[j], spec.b()[j]));
  }
  return std::exp(std::min(700.0, c * spec.log_inv_omega()));
}

PlanSizing recipe_sizing(const ExperimentConfig::Recipe& recipe, const WeightSpec& spec,
                         double eps) {
  if (recipe.kind == ExperimentConfig::Recipe::Kind::exp)
    return exp_recipe_sizing(spec, eps);
  if (recipe.kind == ExperimentConfig::Recipe::Kind::spt)
    return spt_recipe_sizing(spec, eps, recipe.beta, recipe.M);
  throw ConfigError("study: this sweep requires an exp or spt recipe");
}

ApproximationPlan build_recipe_plan(const ExperimentConfig::Recipe& recipe,
                                    const WeightSpec& spec, double eps, double budget) {
  if (recipe.kind == ExperimentConfig::Recipe::Kind::exp)
    return exp_recipe(spec, eps, budget);
  if (recipe.kind == ExperimentConfig::Recipe::Kind::spt)
    return spt_recipe(spec, eps, recipe.beta, recipe.delta, recipe.M, budget);
  throw ConfigError("study: this sweep requires an exp or spt recipe");
}

double measure_error(const ApproximationPlan& plan, const TestFunction& f, int threads) {
  std::vector<std::vector<double>> axes;
  axes.reserve(plan.tensor.rules.size());
  for (const auto& r : plan.tensor.rules) axes.push_back(r.nodes);
  const std::vector<double> values = f.eval_on_grid(axes);
  const SpectralFunction out = run_tabulated(plan, values, threads);
  return exact_l2_error(out, f.coefficients(), plan.index_set);
}

std::optional<double> bound_if_computable(const WeightSpec& spec, double M,
                                          const PlanSizing& sz) {
  if (std::find(sz.orders.begin(), sz.orders.end(), 0) != sz.orders.end())
    return std::nullopt;
  return a_priori_bound(spec, M, sz.orders).bound;
}

/// Doubling-then-bisection over a scalar order multiplier t, holding the
/// recipe's order proportions m_j = max(1, floor(t^{1/(B(s) b_j)})).
std::optional<double> search_min_n(const WeightSpec& spec, const TestFunction& f,
                                   double eps, double M, double cost_budget, int threads) {
  const double B = big_B(spec, spec.dim());
  const auto orders_at = [&](double t) {
    std::vector<int> orders(spec.dim());
    for (int j = 0; j < spec.dim(); ++j) {
      orders[j] = std::max(1, static_cast<int>(std::floor(
                                  std::pow(t, 1.0 / (B * spec.b()[j])))));
    }
    return orders;
  };
  std::map<double, double> memo;  // t -> measured error
  const auto error_at = [&](double t) -> double {
    if (auto it = memo.find(t); it != memo.end()) return it->second;
    const auto orders = orders_at(t);
    const ApproximationPlan plan = make_plan(spec, M, orders, cost_budget);
    const double err = measure_error(plan, f, threads);
    memo[t] = err;
    return err;
  };

  double t = 2.0;
  double last_fail = 0.0;
  try {
    while (error_at(t) > eps) {
      last_fail = t;
      t *= 2.0;
      if (t > 1e15) return std::nullopt;
    }
  } catch (const BudgetError&) {
    return std::nullopt;  // not measurable within budget
  }
  // bisect on the multiplier between the last failure and the success
  double lo = last_fail, hi = t;
  while (hi - lo > 1.0) {
    const double mid = std::floor((lo + hi) / 2.0);
    if (mid <= lo || mid >= hi) break;
    try {
      if (error_at(mid) <= eps)
        hi = mid;
      else
        lo = mid;
    } catch (const BudgetError&) {
      lo = mid;
    }
  }
  double n = 1.0;
  for (int m : orders_at(hi)) n *= m;
  return n;
}

StudyRow convergence_point(const ExperimentConfig& cfg, const WeightSpec& spec,
                           const TestFunction* f, std::optional<double> eps,
                           const std::vector<int>* manual_orders, int inner_threads) {
  const auto start = Clock::now();
  StudyRow row;
  row.s = spec.dim();
  row.epsilon = eps;
  try {
    ApproximationPlan plan = [&] {
      if (manual_orders) {
        const double M = cfg.recipe.M.value_or(window_M(spec, *manual_orders));
        return make_plan(spec, M, *manual_orders, cfg.cost_budget);
      }
      return build_recipe_plan(cfg.recipe, spec, *eps, cfg.cost_budget);
    }();
    row.orders = plan.tensor.orders;
    row.n = static_cast<double>(plan.n_points());
    row.set_size = plan.index_set.size();
    row.M = plan.M;
    row.a_priori_bound = a_priori_bound(spec, plan.M, plan.tensor.orders).bound;
    if (f) row.measured_error = measure_error(plan, *f, inner_threads);
  } catch (const BudgetError& e) {
    row.budget_rejected = true;
    row.n = e.report.predicted_n;
    row.set_size = e.report.set_size;
    row.M = manual_orders ? cfg.recipe.M.value_or(window_M(spec, *manual_orders))
                          : recipe_sizing(cfg.recipe, spec, eps.value_or(0.5)).M;
    row.a_priori_bound = std::numeric_limits<double>::quiet_NaN();
    if (manual_orders) {
      row.orders = *manual_orders;
      row.a_priori_bound = a_priori_bound(spec, row.M, *manual_orders).bound;
    }
  }
  row.wall_time_ms = elapsed_ms(start);
  return row;
}

}  // namespace

std::vector<StudyRow> study_convergence(const ExperimentConfig& cfg) {
  const bool has_function = !cfg.function.is_null();
  std::vector<StudyRow> rows;

  if (cfg.sweep.kind == ExperimentConfig::Sweep::Kind::dimension_ladder) {
    rows.resize(cfg.sweep.dims.size());
    parallel_for_index(static_cast<std::int64_t>(cfg.sweep.dims.size()), cfg.threads,
                       [&](std::int64_t i) {
      const WeightSpec spec = WeightSpec::from_json(cfg.space, cfg.sweep.dims[i]);
      std::optional<TestFunction> f;
      if (has_function) f = make_test_function(cfg.function, spec);
      rows[i] = convergence_point(cfg, spec, f ? &*f : nullptr, cfg.sweep.dim_epsilon,
                                  nullptr, 1);
    });
    return rows;
  }

  const WeightSpec spec = WeightSpec::from_json(cfg.space);
  std::optional<TestFunction> f;
  if (has_function) f = make_test_function(cfg.function, spec);
  const TestFunction* fp = f ? &*f : nullptr;

  if (cfg.sweep.kind == ExperimentConfig::Sweep::Kind::epsilon_ladder) {
    rows.resize(cfg.sweep.epsilons.size());
    parallel_for_index(static_cast<std::int64_t>(cfg.sweep.epsilons.size()), cfg.threads,
                       [&](std::int64_t i) {
      rows[i] = convergence_point(cfg, spec, fp, cfg.sweep.epsilons[i], nullptr, 1);
    });
  } else {
    rows.resize(cfg.sweep.order_ladder.size());
    parallel_for_index(static_cast<std::int64_t>(cfg.sweep.order_ladder.size()), cfg.threads,
                       [&](std::int64_t i) {
      rows[i] = convergence_point(cfg, spec, fp, std::nullopt, &cfg.sweep.order_ladder[i], 1);
    });
  }
  return rows;
}

namespace {

StudyRow info_point(const ExperimentConfig& cfg, const WeightSpec& spec,
                    const TestFunction* f, double eps, int inner_threads) {
  const auto start = Clock::now();
  StudyRow row;
  row.s = spec.dim();
  row.epsilon = eps;
  const PlanSizing sz = recipe_sizing(cfg.recipe, spec, eps);
  row.M = sz.M;
  row.n = sz.predicted_n;
  if (std::find(sz.orders.begin(), sz.orders.end(), 0) == sz.orders.end())
    row.orders = sz.orders;
  try {
    row.set_size = enumerate_index_set(spec, sz.M).size();
  } catch (const BudgetError&) {
    row.set_size = 0;
  }
  const double B = big_B(spec, spec.dim());
  row.ratio = sz.predicted_n / std::pow(std::log1p(1.0 / eps), B);
  if (const auto b = bound_if_computable(spec, sz.M, sz)) row.a_priori_bound = *b;
  else row.a_priori_bound = std::numeric_limits<double>::quiet_NaN();

  const double cost = sz.predicted_n * static_cast<double>(std::max<std::uint64_t>(row.set_size, 1));
  row.budget_rejected = row.set_size == 0 || cost > cfg.cost_budget;
  if (!row.budget_rejected && f) {
    try {
      const ApproximationPlan plan = build_recipe_plan(cfg.recipe, spec, eps, cfg.cost_budget);
      row.measured_error = measure_error(plan, *f, inner_threads);
    } catch (const BudgetError&) {
      row.budget_rejected = true;
    }
  }
  if (f && cfg.search) {
    if (const auto n = search_min_n(spec, *f, eps, sz.M, cfg.cost_budget, inner_threads)) {
      row.search_n = n;
    }
  }
  row.wall_time_ms = elapsed_ms(start);
  return row;
}

}  // namespace

std::vector<StudyRow> study_info_complexity(const ExperimentConfig& cfg) {
  const bool has_function = !cfg.function.is_null();
  std::vector<StudyRow> rows;

  if (cfg.sweep.kind == ExperimentConfig::Sweep::Kind::dimension_ladder) {
    rows.resize(cfg.sweep.dims.size());
    parallel_for_index(static_cast<std::int64_t>(cfg.sweep.dims.size()), cfg.threads,
                       [&](std::int64_t i) {
      const WeightSpec spec = WeightSpec::from_json(cfg.space, cfg.sweep.dims[i]);
      std::optional<TestFunction> f;
      if (has_function) f = make_test_function(cfg.function, spec);
      rows[i] = info_point(cfg, spec, f ? &*f : nullptr, cfg.sweep.dim_epsilon, 1);
    });
    return rows;
  }
  if (cfg.sweep.kind != ExperimentConfig::Sweep::Kind::epsilon_ladder)
    throw ConfigError("study_info_complexity: needs an epsilon or dimension ladder");

  const WeightSpec spec = WeightSpec::from_json(cfg.space);
  std::optional<TestFunction> f;
  if (has_function) f = make_test_function(cfg.function, spec);
  const TestFunction* fp = f ? &*f : nullptr;
  rows.resize(cfg.sweep.epsilons.size());
  parallel_for_index(static_cast<std::int64_t>(cfg.sweep.epsilons.size()), cfg.threads,
                     [&](std::int64_t i) {
    rows[i] = info_point(cfg, spec, fp, cfg.sweep.epsilons[i], 1);
  });
  return rows;
}

namespace {

std::string orders_to_string(const std::vector<int>& orders) {
  std::string out;
  for (std::size_t j = 0; j < orders.size(); ++j) {
    if (j) out += 'x';
    out += std::to_string(orders[j]);
  }
  return out;
}

std::string opt_to_string(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? format_g17(*v) : std::string{};
}

}  // namespace

void emit_csv(const std::vector<StudyRow>& rows, std::ostream& os) {
  os << "s,epsilon,orders,n,set_size,M,a_priori_bound,measured_error,search_n,ratio,"
        "budget_rejected,wall_time_ms\n";
  for (const auto& r : rows) {
    os << r.s << ',' << opt_to_string(r.epsilon) << ',' << orders_to_string(r.orders) << ','
       << format_g17(r.n) << ',' << r.set_size << ',' << format_g17(r.M) << ','
       << (std::isfinite(r.a_priori_bound) ? format_g17(r.a_priori_bound) : std::string{})
       << ',' << opt_to_string(r.measured_error) << ',' << opt_to_string(r.search_n) << ','
       << opt_to_string(r.ratio) << ',' << (r.budget_rejected ? 1 : 0) << ','
       << format_g17(r.wall_time_ms) << "\n";
  }
}

void emit_json(const std::vector<StudyRow>& rows, std::ostream& os) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json jr{{"s", r.s},
                      {"orders", r.orders},
                      {"n", r.n},
                      {"set_size", r.set_size},
                      {"M", r.M},
                      {"budget_rejected", r.budget_rejected},
                      {"wall_time_ms", r.wall_time_ms}};
    jr["epsilon"] = r.epsilon ? nlohmann::json(*r.epsilon) : nlohmann::json();
    jr["a_priori_bound"] = std::isfinite(r.a_priori_bound)
                               ? nlohmann::json(r.a_priori_bound)
                               : nlohmann::json();
    jr["measured_error"] =
        r.measured_error ? nlohmann::json(*r.measured_error) : nlohmann::json();
    jr["search_n"] = r.search_n ? nlohmann::json(*r.search_n) : nlohmann::json();
    jr["ratio"] = r.ratio ? nlohmann::json(*r.ratio) : nlohmann::json();
    arr.push_back(std::move(jr));
  }
  os << arr.dump(2) << "\n";
}

std::vector<StudyRow> rows_from_json(const nlohmann::json& j) {
  std::vector<StudyRow> rows;
  for (const auto& jr : j) {
    StudyRow r;
    r.s = jr.at("s").get<int>();
    r.orders = jr.at("orders").get<std::vector<int>>();
    r.n = jr.at("n").get<double>();
    r.set_size = jr.at("set_size").get<std::uint64_t>();
    r.M = jr.at("M").get<double>();
    r.budget_rejected = jr.at("budget_rejected").get<bool>();
    r.wall_time_ms = jr.at("wall_time_ms").get<double>();
    if (!jr.at("epsilon").is_null()) r.epsilon = jr.at("epsilon").get<double>();
    r.a_priori_bound = jr.at("a_priori_bound").is_null()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : jr.at("a_priori_bound").get<double>();
    if (!jr.at("measured_error").is_null())
      r.measured_error = jr.at("measured_error").get<double>();
    if (!jr.at("search_n").is_null()) r.search_n = jr.at("search_n").get<double>();
    if (!jr.at("ratio").is_null()) r.ratio = jr.at("ratio").get<double>();
    rows.push_back(std::move(r));
  }
  return rows;
}

RateFit fit_rate(const std::vector<StudyRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (!r.measured_error || !(*r.measured_error > 0.0) || !(*r.measured_error < 0.5))
      continue;
    pts.push_back({std::log(r.n), std::log(std::log(1.0 / *r.measured_error))});
  }
  RateFit fit;
  fit.points = static_cast<int>(pts.size());
  if (pts.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double n = static_cast<double>(pts.size());
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (const auto& [x, y] : pts) {
    const double d = y - (fit.slope * x + fit.intercept);
    ss_res += d * d;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace hermapp
