#pragma once

#include <span>
#include <vector>

#include "hermapp/common.hpp"

namespace hermapp {

/// Values (H_0(x), ..., H_max(x)) of the orthonormal probabilists'
/// Hermite polynomials at a single point.
struct HermiteEval {
  double point = 0.0;
  std::vector<double> values;  // size max_degree + 1

  int max_degree() const { return static_cast<int>(values.size()) - 1; }
};

/// Evaluates H_0..H_max_degree at x via the normalized three-term
/// recurrence H_{k+1} = (x H_k - sqrt(k) H_{k-1}) / sqrt(k+1).
/// Stable for degrees well beyond 200 (no factorial over/underflow).
HermiteEval eval_all(double x, int max_degree);

/// Product of univariate evaluations, H_k(x) = prod_j H_{k_j}(x_j).
double eval_multi(std::span<const double> x, const MultiIndex& k);

/// 1/sqrt(phi(x)) - |H_k(x)| where phi is the standard Gaussian density.
/// Non-negative up to rounding for every k (Cramer's bound).
double cramer_bound_margin(double x, int k);

struct LinearizationTerm {
  int degree;
  double coefficient;  // strictly positive
};

/// H_h * H_v = sum_r coefficient(r) * H_{|h-v|+2r}, r = 0..min(h,v).
struct LinearizationExpansion {
  int h = 0;
  int v = 0;
  std::vector<LinearizationTerm> terms;  // degrees ascend in steps of 2
};

/// Expansion of a product of two orthonormal Hermite polynomials with
/// coefficient(r) = sqrt(t!/T!) C(T, t-r) sqrt((|h-v|+2r)!) / r!,
/// t = min(h,v), T = max(h,v). Coefficients are assembled in log space
/// (lgamma) and exponentiated at the end, so T up to several hundred is
/// fine even though T! itself overflows at 171.
LinearizationExpansion linearize_product(int h, int v);

}  // namespace hermapp
