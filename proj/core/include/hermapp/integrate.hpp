#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "hermapp/approximate.hpp"
#include "hermapp/quadrature.hpp"

namespace hermapp {

/// A cubature rule for the Gaussian measure on R^s as an explicit
/// node/weight list.
struct IntegrationRule {
  enum class Provenance { tensor, reduced_from_approximation };
  Provenance provenance = Provenance::tensor;
  int s = 0;
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;

  double apply(const std::function<double(std::span<const double>)>& f) const;
};

/// INT_s(f) = integral of f against the Gaussian density, approximated by
/// the full tensor Gauss-Hermite sum. Delegates to apply_tensor.
double integrate_tensor(const TensorRule& rule,
                        const std::function<double(std::span<const double>)>& f,
                        std::int64_t budget = 100'000'000, int threads = 1);

/// One entry of the machine-checkable derivation log for the reduction:
/// the quadrature value of H_h under an exact-regime rule, which must be
/// zero for h != 0 and one for h = 0.
struct ReductionCheck {
  MultiIndex h;
  double quadrature_value;
};

struct ReducedRule {
  IntegrationRule rule;
  std::vector<ReductionCheck> derivation_log;
};

/// Converts an approximation plan into an integration rule with no larger
/// worst-case error: the rule's weight at node x_k is the tensor weight
/// times sum_h H_h(x_k) * (integral of H_h), and since the only surviving
/// Hermite integral is H_0 (always in A(s,M) for M > 1), the reduced rule
/// is the tensor rule itself. The collapse is re-verified numerically and
/// logged. Node materialization is guarded by point_budget.
ReducedRule reduce_approximation(const ApproximationPlan& plan,
                                 std::int64_t point_budget = 100'000'000);

}  // namespace hermapp
