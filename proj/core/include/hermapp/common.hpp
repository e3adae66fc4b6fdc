#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hermapp {

/// A multi-index k = (k_1,...,k_s) of non-negative Hermite degrees.
/// std::vector comparison is lexicographic, which is the canonical
/// ordering used everywhere (index sets, coefficient maps, CSV output).
using MultiIndex = std::vector<int>;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Signals that a norm or bound left the representable double range,
/// i.e. the function is numerically outside the space at this truncation.
struct NormOverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structured sizing snapshot attached to budget rejections so scaling
/// studies can log the would-be cost without building anything.
struct BudgetReport {
  double m = 0.0;                 // scalar order parameter (recipes), 0 for manual plans
  std::vector<double> orders;     // per-dimension rule orders
  double predicted_n = 0.0;       // product of orders (may exceed 2^53; kept as double)
  std::uint64_t set_size = 0;     // |A(s,M)| when enumerated, 0 if enumeration itself was rejected
  double cost = 0.0;              // predicted_n * set_size
  double budget = 0.0;
};

struct BudgetError : std::runtime_error {
  BudgetReport report;
  BudgetError(const std::string& what, BudgetReport r)
      : std::runtime_error(what), report(std::move(r)) {}
};

/// Sums `v` with a fixed-shape pairwise tree. The reduction order depends
/// only on v.size(), never on thread count, so results are reproducible.
double pairwise_sum(std::span<const double> v);

/// Runs fn(i) for i in [0, count) on `threads` workers with a static
/// stride-T assignment. fn must only write to slots owned by i.
void parallel_for_index(std::int64_t count, int threads,
                        const std::function<void(std::int64_t)>& fn);

std::string format_g17(double x);

}  // namespace hermapp
