#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hermapp/approximate.hpp"
#include "hermapp/spectral.hpp"
#include "hermapp/weights.hpp"

namespace hermapp {

/// Parsed experiment description. See README for the JSON schema.
struct ExperimentConfig {
  nlohmann::json space;     // descriptor for WeightSpec::from_json
  nlohmann::json function;  // descriptor for make_test_function

  struct Sweep {
    enum class Kind { epsilon_ladder, order_ladder, dimension_ladder };
    Kind kind = Kind::epsilon_ladder;
    std::vector<double> epsilons;                 // epsilon_ladder
    std::vector<std::vector<int>> order_ladder;   // order_ladder
    std::vector<int> dims;                        // dimension_ladder
    double dim_epsilon = 1e-3;                    // dimension_ladder
  };

  struct Recipe {
    enum class Kind { exp, spt, manual };
    Kind kind = Kind::exp;
    double beta = 0.5;
    double delta = 1.0;
    std::optional<double> M;  // manual M, or spt override; order ladders
                              // default to the exactness-window coupling
  };

  Sweep sweep;
  Recipe recipe;
  bool search = true;           // info-complexity: search smallest n on a ladder
  double cost_budget = 1e9;
  int threads = 1;
  std::string out_csv, out_json;

  static ExperimentConfig parse(const nlohmann::json& j);
};

/// Builds the test function described by a config descriptor for the given
/// space. Kinds:
///   {"kind":"exp_linear","lambda":[..] or number}
///   {"kind":"finite_series"|"polynomial","coeffs":[{"k":[..],"c":..},..]}
///   {"kind":"finite_series","decay":{"power":p,"support_M":M}}
///       -> fhat(k) = omega_k^p over A(s, support_M)
/// plus optional "normalize":"space" to scale to unit space norm.
TestFunction make_test_function(const nlohmann::json& j, const WeightSpec& spec);

/// One sweep point. Budget-rejected points keep predicted n and the bound
/// but have no measured error.
struct StudyRow {
  int s = 0;
  std::optional<double> epsilon;
  std::vector<int> orders;
  double n = 0.0;  // product of orders; double because rejected plans can be huge
  std::uint64_t set_size = 0;
  double M = 0.0;
  double a_priori_bound = 0.0;
  std::optional<double> measured_error;
  std::optional<double> search_n;   // info-complexity only
  std::optional<double> ratio;      // info-complexity only: n / log^{B(s)}(1+1/eps)
  double wall_time_ms = 0.0;
  bool budget_rejected = false;
};

/// Convergence study: one row per sweep point (epsilon or order ladder),
/// measured error against the function's known coefficients.
std::vector<StudyRow> study_convergence(const ExperimentConfig& cfg);

/// Information-complexity study over an epsilon or dimension ladder: the
/// recipe's n per point, plus (when measurable) the smallest n on a
/// doubling-then-bisection order ladder whose measured error <= epsilon.
std::vector<StudyRow> study_info_complexity(const ExperimentConfig& cfg);

/// CSV with a fixed column set; all numerics at 17 significant digits.
/// Identical configs produce byte-identical output except the wall_time
/// column.
void emit_csv(const std::vector<StudyRow>& rows, std::ostream& os);
void emit_json(const std::vector<StudyRow>& rows, std::ostream& os);
std::vector<StudyRow> rows_from_json(const nlohmann::json& j);

/// Ordinary least squares of log log(1/error) against log n over rows with
/// 0 < measured error < 0.5.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};
RateFit fit_rate(const std::vector<StudyRow>& rows);

}  // namespace hermapp
