#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hermapp/common.hpp"

namespace hermapp {

/// The weight data (a, b, omega) of a Hermite space over R^s.
///
/// Validated on construction:
///   - a is non-decreasing with a[0] >= 1,
///   - every b[j] >= 1,
///   - omega in the open interval (0, 1).
class WeightSpec {
 public:
  WeightSpec(int s, std::vector<double> a, std::vector<double> b, double omega);

  int dim() const { return s_; }
  const std::vector<double>& a() const { return a_; }
  const std::vector<double>& b() const { return b_; }
  double omega() const { return omega_; }
  double log_inv_omega() const { return log_inv_omega_; }

  /// Parses {"s":..,"a":{..},"b":{..},"omega":..}. Sequence descriptors are
  /// either a bare array, or one of
  ///   {"kind":"explicit","values":[..]}
  ///   {"kind":"geometric","first":f,"ratio":r}   -> f * r^(j-1)
  ///   {"kind":"power","scale":c,"exponent":p}    -> c * j^p
  /// When s_override > 0 it replaces the "s" field (dimension ladders).
  static WeightSpec from_json(const nlohmann::json& j, int s_override = 0);
  nlohmann::json to_json() const;

 private:
  int s_;
  std::vector<double> a_, b_;
  double omega_;
  double log_inv_omega_;
};

/// Sum_j a_j k_j^{b_j}, the exponent of omega in the weight omega_k.
/// All weight comparisons go through this value in log space; omega_k
/// itself is materialized only when safely representable.
double exponent(const WeightSpec& spec, const MultiIndex& k);

/// omega_k = omega^exponent(k), or 0 when the exponent is past the
/// underflow guard (exponent * log(1/omega) >= 700).
double weight_value(const WeightSpec& spec, const MultiIndex& k);

/// B(s_prefix) = Sum_{j<=s_prefix} 1/b_j.
double big_B(const WeightSpec& spec, int s_prefix);

/// The pair (k, K) with k = max(1, ceil(log(omega^{-1/8}-1)/log omega))
/// and K = 3k - 1 + 2 log(1+omega^k)/log(1/omega).
struct OmegaK {
  int k;
  double K;
};
OmegaK K_of_omega(double omega);

/// D = 8^s prod_j (1 + log^{-1/b_j}(1/omega))^2.
double D_of(const WeightSpec& spec);

/// The index set A(s,M) = { h : omega_h^{-1} < M }, members in
/// lexicographic order. Built once, immutable afterwards.
class IndexSet {
 public:
  IndexSet(WeightSpec spec, double M, std::vector<MultiIndex> members);

  const WeightSpec& spec() const { return spec_; }
  double threshold_M() const { return M_; }
  const std::vector<MultiIndex>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool contains(const MultiIndex& h) const;  // binary search

 private:
  WeightSpec spec_;
  double M_;
  std::vector<MultiIndex> members_;
};

/// Enumerates A(s,M) by recursive descent with per-coordinate caps
/// cap_j = ceil((log M / (a_j log(1/omega)))^{1/b_j}) - 1, pruning as soon
/// as the partial exponent crosses the threshold. Strict "< M" is honored
/// bit-for-bit; ties are excluded. Throws BudgetError when the member
/// count would exceed max_members.
IndexSet enumerate_index_set(const WeightSpec& spec, double M,
                             std::uint64_t max_members = 10'000'000);

/// The per-coordinate caps used by the enumeration (exposed for audits).
std::vector<long> index_set_caps(const WeightSpec& spec, double M);

/// prod_j (1 + (log M / (a_j log(1/omega)))^{1/b_j}), an upper bound
/// on |A(s,M)|.
double index_set_cardinality_bound(const WeightSpec& spec, double M);

}  // namespace hermapp
