#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hermapp/common.hpp"
#include "hermapp/weights.hpp"

namespace hermapp {

/// A finite Hermite series: a sparse map multi-index -> coefficient.
/// Absent indices mean coefficient zero. The map order is lexicographic,
/// matching IndexSet enumeration, so iteration and summation order are
/// deterministic.
struct SpectralFunction {
  int s = 0;
  std::map<MultiIndex, double> coeffs;

  double at(const MultiIndex& k) const;
  void set(MultiIndex k, double value);

  /// Largest degree appearing in dimension `dim`.
  int max_degree(int dim) const;

  /// Pointwise evaluation (per-coordinate Hermite tables, one pass).
  double eval(std::span<const double> x) const;

  /// Values on the full tensor grid spanned by per-dimension node lists,
  /// in row-major order (last dimension fastest). This matches the node
  /// ordering used by tensor-rule application.
  std::vector<double> eval_on_grid(std::span<const std::vector<double>> axes) const;

  /// CSV rows "k_1,...,k_s,coefficient" with a header line.
  void write_csv(std::ostream& os) const;
  static SpectralFunction read_csv(std::istream& is);
};

/// sqrt(sum_k fhat(k)^2).
double l2_norm(const SpectralFunction& f);

/// sqrt(sum_k fhat(k)^2 omega_k^{-1}), combined in log space per term.
/// Throws NormOverflowError when a term or the total leaves double range:
/// the function is numerically outside the space at this truncation.
double space_norm(const WeightSpec& spec, const SpectralFunction& f);

/// Exact coefficients of exp(lambda . x):
/// fhat(k) = e^{|lambda|^2/2} prod_j lambda_j^{k_j} / sqrt(k_j!),
/// restricted to k within the per-coordinate caps.
SpectralFunction coefficients_exp_linear(std::span<const double> lambda,
                                         std::span<const int> caps);

/// Per-coordinate caps such that the dropped L2 tail of exp(lambda . x)
/// is negligible (relative term cutoff 1e-18, far below test tolerances).
std::vector<int> exp_linear_caps(std::span<const double> lambda);

struct KernelResult {
  double value = 0.0;
  double tail_bound = 0.0;  // certified bound on the dropped tail
  double M = 0.0;           // truncation threshold actually used
  std::uint64_t set_size = 0;
};

/// Truncated kernel sum_k omega_k H_k(x) H_k(y) over A(s,M), with M grown
/// until the Cramer tail bound (phi_s(x) phi_s(y))^{-1/2} sum_{k not in A}
/// omega_k drops below tail_tol. Throws BudgetError if the required index
/// set would exceed max_members.
KernelResult kernel_eval(const WeightSpec& spec, std::span<const double> x,
                         std::span<const double> y, double tail_tol,
                         std::uint64_t max_members = 2'000'000);

/// A pointwise-evaluable test function with known Hermite coefficients.
class TestFunction {
 public:
  enum class Kind { exp_linear, polynomial, finite_series };

  static TestFunction make_exp_linear(std::vector<double> lambda);
  static TestFunction make_series(SpectralFunction f, Kind kind = Kind::finite_series);

  Kind kind() const { return kind_; }
  int dim() const { return s_; }
  double scale() const { return scale_; }

  /// Multiplies the function (and its coefficients) by c.
  void rescale(double c);
  /// Rescales so that the space norm in `spec` is exactly one.
  void normalize_space(const WeightSpec& spec);

  double operator()(std::span<const double> x) const;
  std::vector<double> eval_on_grid(std::span<const std::vector<double>> axes) const;

  /// The (possibly truncated) coefficient table, scaled consistently with
  /// pointwise evaluation. For exp_linear the truncation tail sits below
  /// 1e-18 relative.
  const SpectralFunction& coefficients() const { return truth_; }

 private:
  TestFunction() = default;
  Kind kind_ = Kind::finite_series;
  int s_ = 0;
  std::vector<double> lambda_;
  double scale_ = 1.0;
  SpectralFunction truth_;
};

}  // namespace hermapp
