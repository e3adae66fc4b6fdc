#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "hermapp/approximate.hpp"
#include "hermapp/integrate.hpp"
#include "hermapp/quadrature.hpp"
#include "hermapp/study.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitBudget = 3;

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hermapp::ConfigError("cannot open config file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw hermapp::ConfigError("config parse error in " + path + ": " + e.what());
  }
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw hermapp::ConfigError("cannot open output file: " + path);
  return file;
}

struct GlobalOpts {
  std::string config;
  std::string out;
  int threads = 1;
  double budget = 1e8;  // evaluation points; plan cost budget is 10x this
  bool strict = false;

  double cost_budget() const { return 10.0 * budget; }
};

int cmd_rule(const GlobalOpts& g, int n) {
  const auto rule = hermapp::make_rule(n);
  std::ofstream file;
  std::ostream& os = open_out(file, g.out);
  os << "node,weight\n";
  for (int i = 0; i < rule.order; ++i) {
    os << hermapp::format_g17(rule.nodes[i]) << "," << hermapp::format_g17(rule.weights[i])
       << "\n";
  }
  return 0;
}

int cmd_indexset(const GlobalOpts& g) {
  const auto cfg = load_config(g.config);
  const auto spec = hermapp::WeightSpec::from_json(cfg.at("space"));
  if (!cfg.contains("M")) throw hermapp::ConfigError("indexset: field 'M' missing");
  const double M = cfg.at("M").get<double>();
  const auto set = hermapp::enumerate_index_set(spec, M);
  std::ofstream file;
  std::ostream& os = open_out(file, g.out);
  for (int j = 1; j <= spec.dim(); ++j) os << "k_" << j << ",";
  os << "exponent\n";
  for (const auto& h : set.members()) {
    for (int kj : h) os << kj << ",";
    os << hermapp::format_g17(hermapp::exponent(spec, h)) << "\n";
  }
  return 0;
}

hermapp::ApproximationPlan plan_from_config(const nlohmann::json& cfg,
                                            const hermapp::WeightSpec& spec,
                                            double cost_budget) {
  const auto& pj = cfg.at("plan");
  const std::string kind = pj.value("kind", "manual");
  if (kind == "manual") {
    const double M = pj.at("M").get<double>();
    const auto orders = pj.at("orders").get<std::vector<int>>();
    return hermapp::make_plan(spec, M, orders, cost_budget);
  }
  if (kind == "exp") {
    return hermapp::exp_recipe(spec, pj.at("epsilon").get<double>(), cost_budget);
  }
  if (kind == "spt") {
    std::optional<double> M;
    if (pj.contains("M")) M = pj.at("M").get<double>();
    return hermapp::spt_recipe(spec, pj.at("epsilon").get<double>(), pj.value("beta", 0.5),
                               pj.value("delta", 1.0), M, cost_budget);
  }
  throw hermapp::ConfigError("plan: unknown kind '" + kind + "'");
}

int cmd_approx(const GlobalOpts& g, const std::string& report_path) {
  const auto cfg = load_config(g.config);
  const auto spec = hermapp::WeightSpec::from_json(cfg.at("space"));
  const auto plan = plan_from_config(cfg, spec, g.cost_budget());
  if (!cfg.contains("function")) throw hermapp::ConfigError("approx: field 'function' missing");
  const auto f = hermapp::make_test_function(cfg.at("function"), spec);

  std::vector<std::vector<double>> axes;
  for (const auto& r : plan.tensor.rules) axes.push_back(r.nodes);
  const auto values = f.eval_on_grid(axes);
  const auto coeffs = hermapp::run_tabulated(plan, values, g.threads);

  std::ofstream file;
  std::ostream& os = open_out(file, g.out);
  coeffs.write_csv(os);

  auto report = hermapp::a_priori_bound(spec, plan.M, plan.tensor.orders);
  report.measured = hermapp::exact_l2_error(coeffs, f.coefficients(), plan.index_set);

  nlohmann::json jr{{"M", plan.M},
                    {"orders", plan.tensor.orders},
                    {"n", plan.n_points()},
                    {"set_size", plan.index_set.size()},
                    {"bound", report.bound},
                    {"bound_parts",
                     {{"truncation", report.truncation},
                      {"amplification", report.amplification},
                      {"d_factor", report.d_factor},
                      {"tail", report.tail},
                      {"quadrature_term", report.quadrature_term}}},
                    {"measured_error", *report.measured}};
  if (!report_path.empty()) {
    std::ofstream rf(report_path);
    if (!rf) throw hermapp::ConfigError("cannot open report file: " + report_path);
    rf << jr.dump(2) << "\n";
  } else {
    std::cerr << jr.dump(2) << "\n";
  }
  return 0;
}

int cmd_integrate(const GlobalOpts& g) {
  const auto cfg = load_config(g.config);
  const auto spec_json = cfg.contains("space") ? cfg.at("space") : nlohmann::json();
  const std::string mode = cfg.value("mode", "tensor");

  nlohmann::json out;
  double value = 0.0;
  std::optional<hermapp::TestFunction> f;
  if (mode == "tensor") {
    const auto orders = cfg.at("orders").get<std::vector<int>>();
    const int s = static_cast<int>(orders.size());
    const hermapp::WeightSpec spec =
        spec_json.is_null()
            ? hermapp::WeightSpec(s, std::vector<double>(s, 1.0), std::vector<double>(s, 1.0),
                                  0.5)
            : hermapp::WeightSpec::from_json(spec_json);
    f = hermapp::make_test_function(cfg.at("function"), spec);
    const auto rule = hermapp::make_tensor_rule(orders);
    value = hermapp::integrate_tensor(
        rule, [&](std::span<const double> x) { return (*f)(x); },
        static_cast<std::int64_t>(g.budget), g.threads);
    out["n"] = rule.total_points();
  } else if (mode == "reduced") {
    const auto spec = hermapp::WeightSpec::from_json(spec_json);
    const auto plan = plan_from_config(cfg, spec, g.cost_budget());
    f = hermapp::make_test_function(cfg.at("function"), spec);
    const auto reduced =
        hermapp::reduce_approximation(plan, static_cast<std::int64_t>(g.budget));
    value = reduced.rule.apply([&](std::span<const double> x) { return (*f)(x); });
    out["n"] = plan.n_points();
  } else {
    throw hermapp::ConfigError("integrate: mode must be 'tensor' or 'reduced'");
  }
  out["value"] = value;

  // closed-form reference: the zero-index coefficient of the series
  const auto& truth = f->coefficients();
  const hermapp::MultiIndex zero(truth.s, 0);
  const double reference = truth.at(zero);
  out["reference"] = reference;
  out["abs_error"] = std::abs(value - reference);

  std::ofstream file;
  std::ostream& os = open_out(file, g.out);
  os << out.dump(2) << "\n";
  return 0;
}

int cmd_study(const GlobalOpts& g, const std::string& kind) {
  const auto raw = load_config(g.config);
  auto cfg = hermapp::ExperimentConfig::parse(raw);
  cfg.threads = g.threads;
  cfg.cost_budget = g.cost_budget();

  const auto rows = kind == "info_complexity" ? hermapp::study_info_complexity(cfg)
                                              : hermapp::study_convergence(cfg);

  const std::string csv_path = !g.out.empty() ? g.out : cfg.out_csv;
  std::ofstream file;
  std::ostream& os = open_out(file, csv_path);
  hermapp::emit_csv(rows, os);
  if (!cfg.out_json.empty()) {
    std::ofstream jf(cfg.out_json);
    if (!jf) throw hermapp::ConfigError("cannot open output file: " + cfg.out_json);
    hermapp::emit_json(rows, jf);
  }
  if (kind == "convergence") {
    const auto fit = hermapp::fit_rate(rows);
    if (fit.points >= 2) {
      std::cerr << "rate fit: slope=" << hermapp::format_g17(fit.slope)
                << " r2=" << hermapp::format_g17(fit.r2) << " points=" << fit.points << "\n";
    }
  }
  bool any_rejected = false;
  for (const auto& r : rows) any_rejected |= r.budget_rejected;
  if (any_rejected && g.strict) return kExitBudget;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hermite-space approximation and Gaussian integration toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config, "JSON config path");
  app.add_option("--out", g.out, "output path (default stdout)");
  app.add_option("--threads", g.threads, "worker threads");
  app.add_option("--budget", g.budget, "evaluation point budget");
  app.add_flag("--strict", g.strict, "exit 3 on budget rejection");

  int rule_n = 0;
  auto* rule = app.add_subcommand("rule", "print a 1D Gauss-Hermite rule as CSV");
  rule->add_option("--n", rule_n, "rule order")->required();

  auto* indexset = app.add_subcommand("indexset", "enumerate the truncation index set");
  auto* approx = app.add_subcommand("approx", "run the approximation algorithm");
  std::string report_path;
  approx->add_option("--report", report_path, "JSON report path");
  auto* integrate = app.add_subcommand("integrate", "Gaussian-measure integration");
  auto* study = app.add_subcommand("study", "convergence / info-complexity studies");
  std::string study_kind = "convergence";
  study->add_option("--kind", study_kind, "convergence | info_complexity")
      ->check(CLI::IsMember({"convergence", "info_complexity"}));

  // global flags may appear after the subcommand as well
  for (auto* sub : {rule, indexset, approx, integrate, study}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (rule->parsed()) return cmd_rule(g, rule_n);
    if (indexset->parsed()) return cmd_indexset(g);
    if (approx->parsed()) return cmd_approx(g, report_path);
    if (integrate->parsed()) return cmd_integrate(g);
    if (study->parsed()) return cmd_study(g, study_kind);
  } catch (const hermapp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const hermapp::BudgetError& e) {
    std::cerr << "budget rejection: " << e.what() << "\n";
    const auto& r = e.report;
    const nlohmann::json jr{{"m", r.m},
                            {"orders", r.orders},
                            {"predicted_n", r.predicted_n},
                            {"set_size", r.set_size},
                            {"cost", r.cost},
                            {"budget", r.budget}};
    std::cerr << jr.dump(2) << "\n";
    return g.strict ? kExitBudget : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
