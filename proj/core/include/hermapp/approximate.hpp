#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hermapp/common.hpp"
#include "hermapp/quadrature.hpp"
#include "hermapp/spectral.hpp"
#include "hermapp/weights.hpp"

namespace hermapp {

struct Provenance {
  enum class Kind { manual, exp_recipe, spt_recipe };
  Kind kind = Kind::manual;
  double epsilon = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  std::string note;
};

/// A fully assembled approximation plan: the truncation set A(s,M) plus the
/// tensor rule used to estimate each coefficient.
struct ApproximationPlan {
  WeightSpec spec;
  double M;
  IndexSet index_set;
  TensorRule tensor;
  Provenance provenance;

  std::int64_t n_points() const { return tensor.total_points(); }
  double cost() const { return static_cast<double>(n_points()) * static_cast<double>(index_set.size()); }
};

/// Sizing of a plan before anything is built. predicted_n may exceed any
/// buildable size; it is kept as a double on purpose.
struct PlanSizing {
  double M = 0.0;
  double m = 0.0;                  // scalar order parameter (recipes)
  std::vector<double> orders_real; // per-dimension orders before clamping
  std::vector<int> orders;         // clamped to >= 1; valid when buildable
  double predicted_n = 1.0;
  double eta = 0.0;                // exp recipe only
  double log_eta = 0.0;            // exp recipe only, always finite
};

/// Builds a plan with explicit M and orders. Throws BudgetError when
/// predicted_n * |A(s,M)| exceeds cost_budget (default 1e9 as for run()).
ApproximationPlan make_plan(const WeightSpec& spec, double M, std::span<const int> orders,
                            double cost_budget = 1e9,
                            Provenance provenance = {});

/// The worst-case-error recipe: M = 2/eps^2, eta from the closed form, the
/// scalar order m as the max over dimensions of the ceiling expression, and
/// m_j = floor(m^{1/(B(s) b_j)}). Pure arithmetic, nothing is built.
PlanSizing exp_recipe_sizing(const WeightSpec& spec, double eps);

/// Sizes and builds the exp-recipe plan, then re-verifies numerically that
/// tail_F(orders) <= eta^2 and that the a-priori bound is <= eps.
/// Throws BudgetError (carrying the sizing) when too large to build.
ApproximationPlan exp_recipe(const WeightSpec& spec, double eps, double cost_budget = 1e9);

/// The strong-tractability-flavored recipe with odd orders
/// m_j = 2 ceil((log M / (a_j^beta log(1/omega~)))^{1/b_j}) - 1 where
/// omega~ = omega^{1/(2K+2)}. The proof's constant-laden M is not
/// computable, so M is caller-supplied with default 2/eps^2; delta is the
/// claimed exponential growth rate of a, recorded but not validated.
PlanSizing spt_recipe_sizing(const WeightSpec& spec, double eps, double beta,
                             std::optional<double> M = std::nullopt);
ApproximationPlan spt_recipe(const WeightSpec& spec, double eps, double beta, double delta,
                             std::optional<double> M = std::nullopt,
                             double cost_budget = 1e9);

/// A-priori worst-case error report. bound^2 = truncation + quadrature
/// where truncation = 1/M and quadrature = amplification * d_factor * tail
/// (assembled in log space; `amplification` alone may overflow to inf while
/// the product stays finite).
struct ErrorReport {
  double bound = 0.0;
  double truncation = 0.0;     // 1/M
  double amplification = 0.0;  // M^{2B(s)+K}
  double d_factor = 0.0;       // D(s, omega, b)
  double tail = 0.0;           // F_n
  double quadrature_term = 0.0;
  std::int64_t n_points = 0;
  std::optional<double> measured;
};

ErrorReport a_priori_bound(const WeightSpec& spec, double M, std::span<const int> orders);

/// Runs the plan on a pointwise-evaluable f: returns the coefficient map
/// h -> Q_{n,s}(f H_h) over h in A(s,M). f is evaluated exactly once per
/// tensor node; per-dimension Hermite tables cover all h at once. May
/// parallelize over h; per-coefficient reduction order is fixed, so results
/// are bit-identical for every thread count.
SpectralFunction run(const ApproximationPlan& plan,
                     const std::function<double(std::span<const double>)>& f,
                     int threads = 1);

/// Same, with node values supplied by the caller in row-major grid order
/// (last dimension fastest), e.g. from SpectralFunction::eval_on_grid.
SpectralFunction run_tabulated(const ApproximationPlan& plan,
                               std::span<const double> node_values, int threads = 1);

/// sqrt( sum_{h in A} (truth(h)-output(h))^2 + sum_{h in supp(truth)\A} truth(h)^2 ).
/// The caller owns the truncation story of `truth`.
double exact_l2_error(const SpectralFunction& plan_output, const SpectralFunction& truth,
                      const IndexSet& index_set);

}  // namespace hermapp
