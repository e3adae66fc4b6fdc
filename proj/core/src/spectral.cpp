#include "hermapp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "hermapp/hermite.hpp"

namespace hermapp {

double SpectralFunction::at(const MultiIndex& k) const {
  const auto it = coeffs.find(k);
  return it == coeffs.end() ? 0.0 : it->second;
}

void SpectralFunction::set(MultiIndex k, double value) {
  if (static_cast<int>(k.size()) != s)
    throw DimensionError("SpectralFunction::set: index length does not match dimension");
  coeffs[std::move(k)] = value;
}

int SpectralFunction::max_degree(int dim) const {
  int d = 0;
  for (const auto& [k, c] : coeffs) d = std::max(d, k[dim]);
  return d;
}

double SpectralFunction::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != s)
    throw DimensionError("SpectralFunction::eval: point dimension mismatch");
  std::vector<HermiteEval> tables;
  tables.reserve(s);
  for (int j = 0; j < s; ++j) tables.push_back(eval_all(x[j], max_degree(j)));
  std::vector<double> terms;
  terms.reserve(coeffs.size());
  for (const auto& [k, c] : coeffs) {
    double prod = c;
    for (int j = 0; j < s; ++j) prod *= tables[j].values[k[j]];
    terms.push_back(prod);
  }
  return pairwise_sum(terms);
}

std::vector<double> SpectralFunction::eval_on_grid(
    std::span<const std::vector<double>> axes) const {
  if (static_cast<int>(axes.size()) != s)
    throw DimensionError("eval_on_grid: axis count does not match dimension");
  // Contract one dimension at a time: values over grid prefixes times
  // Hermite tables. Cost is sum_j (prefix grid size) * |coeffs| in the
  // worst case but typically far less than pointwise evaluation.
  //
  // Layout: stage j holds a map from the truncated index (k_{j+1},...,k_s)
  // to a dense block over the first j axes, row-major.
  struct Block {
    MultiIndex tail;
    std::vector<double> values;
  };
  // stage 0: group coefficients by the full index tail after dim 0
  std::vector<Block> blocks;
  {
    std::map<MultiIndex, std::vector<std::pair<int, double>>> grouped;
    for (const auto& [k, c] : coeffs) {
      MultiIndex tail(k.begin() + 1, k.end());
      grouped[std::move(tail)].push_back({k[0], c});
    }
    const auto& axis = axes[0];
    std::vector<HermiteEval> tab;
    tab.reserve(axis.size());
    const int maxdeg0 = max_degree(0);
    for (double x : axis) tab.push_back(eval_all(x, maxdeg0));
    for (auto& [tail, entries] : grouped) {
      Block b;
      b.tail = tail;
      b.values.assign(axis.size(), 0.0);
      for (std::size_t i = 0; i < axis.size(); ++i) {
        double acc = 0.0;
        for (const auto& [deg, c] : entries) acc += c * tab[i].values[deg];
        b.values[i] = acc;
      }
      blocks.push_back(std::move(b));
    }
  }
  // fold remaining dimensions
  std::size_t prefix_size = axes[0].size();
  for (int j = 1; j < s; ++j) {
    const auto& axis = axes[j];
    int maxdeg = 0;
    for (const auto& b : blocks) maxdeg = std::max(maxdeg, b.tail[0]);
    std::vector<HermiteEval> tab;
    tab.reserve(axis.size());
    for (double x : axis) tab.push_back(eval_all(x, maxdeg));

    std::map<MultiIndex, std::vector<const Block*>> grouped;
    for (const auto& b : blocks) {
      MultiIndex tail(b.tail.begin() + 1, b.tail.end());
      grouped[std::move(tail)].push_back(&b);
    }
    std::vector<Block> next;
    next.reserve(grouped.size());
    for (auto& [tail, members] : grouped) {
      Block nb;
      nb.tail = tail;
      nb.values.assign(prefix_size * axis.size(), 0.0);
      for (const Block* b : members) {
        const int deg = b->tail[0];
        for (std::size_t p = 0; p < prefix_size; ++p) {
          const double base = b->values[p];
          if (base == 0.0) continue;
          double* row = nb.values.data() + p * axis.size();
          for (std::size_t i = 0; i < axis.size(); ++i) row[i] += base * tab[i].values[deg];
        }
      }
      next.push_back(std::move(nb));
    }
    blocks = std::move(next);
    prefix_size *= axis.size();
  }
  if (blocks.empty()) {
    std::size_t total = 1;
    for (const auto& axis : axes) total *= axis.size();
    return std::vector<double>(total, 0.0);
  }
  return std::move(blocks.front().values);
}

void SpectralFunction::write_csv(std::ostream& os) const {
  for (int j = 1; j <= s; ++j) os << "k_" << j << ",";
  os << "coefficient\n";
  for (const auto& [k, c] : coeffs) {
    for (int kj : k) os << kj << ",";
    os << format_g17(c) << "\n";
  }
}

SpectralFunction SpectralFunction::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("SpectralFunction: empty CSV");
  const auto commas = std::count(line.begin(), line.end(), ',');
  SpectralFunction f;
  f.s = static_cast<int>(commas);
  if (f.s < 1) throw ConfigError("SpectralFunction: malformed CSV header");
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    MultiIndex k(f.s);
    char sep = 0;
    for (int j = 0; j < f.s; ++j) {
      if (!(ss >> k[j] >> sep) || sep != ',') {
        throw ConfigError("SpectralFunction: parse error at CSV line " + std::to_string(line_no));
      }
    }
    double c = 0.0;
    if (!(ss >> c))
      throw ConfigError("SpectralFunction: parse error at CSV line " + std::to_string(line_no));
    f.coeffs[std::move(k)] = c;
  }
  return f;
}

double l2_norm(const SpectralFunction& f) {
  std::vector<double> sq;
  sq.reserve(f.coeffs.size());
  for (const auto& [k, c] : f.coeffs) sq.push_back(c * c);
  return std::sqrt(pairwise_sum(sq));
}

double space_norm(const WeightSpec& spec, const SpectralFunction& f) {
  if (f.s != spec.dim())
    throw DimensionError("space_norm: function dimension does not match spec");
  const double L = spec.log_inv_omega();
  std::vector<double> terms;
  terms.reserve(f.coeffs.size());
  for (const auto& [k, c] : f.coeffs) {
    if (c == 0.0) continue;
    const double log_term = 2.0 * std::log(std::abs(c)) + exponent(spec, k) * L;
    if (log_term > 700.0)
      throw NormOverflowError(
          "space_norm: term overflow; the function is numerically outside the space "
          "at this truncation");
    terms.push_back(std::exp(log_term));
  }
  const double total = pairwise_sum(terms);
  if (!std::isfinite(total))
    throw NormOverflowError("space_norm: sum overflow");
  return std::sqrt(total);
}

std::vector<int> exp_linear_caps(std::span<const double> lambda) {
  std::vector<int> caps(lambda.size());
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    const double l2 = lambda[j] * lambda[j];
    // l2-mass terms lambda^{2k}/k!; the cutoff keeps the dropped l2 tail
    // below 1e-12 in norm
    double term = 1.0;
    int k = 0;
    while (term > 1e-26 && k < 400) {
      ++k;
      term *= l2 / k;
    }
    caps[j] = k;
  }
  return caps;
}

SpectralFunction coefficients_exp_linear(std::span<const double> lambda,
                                         std::span<const int> caps) {
  if (lambda.size() != caps.size())
    throw DimensionError("coefficients_exp_linear: lambda/caps length mismatch");
  const int s = static_cast<int>(lambda.size());
  double norm2 = 0.0;
  for (double l : lambda) norm2 += l * l;
  const double lead = std::exp(0.5 * norm2);

  SpectralFunction f;
  f.s = s;
  // per-dimension factors lambda^k / sqrt(k!)
  std::vector<std::vector<double>> factors(s);
  for (int j = 0; j < s; ++j) {
    factors[j].resize(caps[j] + 1);
    factors[j][0] = 1.0;
    for (int k = 1; k <= caps[j]; ++k)
      factors[j][k] = factors[j][k - 1] * lambda[j] / std::sqrt(static_cast<double>(k));
  }
  MultiIndex k(s, 0);
  while (true) {
    double c = lead;
    for (int j = 0; j < s; ++j) c *= factors[j][k[j]];
    if (c != 0.0) f.coeffs[k] = c;
    int j = s - 1;
    for (; j >= 0; --j) {
      if (++k[j] <= caps[j]) break;
      k[j] = 0;
    }
    if (j < 0) break;
  }
  return f;
}

KernelResult kernel_eval(const WeightSpec& spec, std::span<const double> x,
                         std::span<const double> y, double tail_tol,
                         std::uint64_t max_members) {
  if (static_cast<int>(x.size()) != spec.dim() || static_cast<int>(y.size()) != spec.dim())
    throw DimensionError("kernel_eval: point dimension mismatch");
  if (!(tail_tol > 0.0)) throw std::invalid_argument("kernel_eval: tail_tol must be positive");

  // full weight mass per dimension: sum_k omega^{a_j k^{b_j}}
  const double L = spec.log_inv_omega();
  double total_mass = 1.0;
  for (int j = 0; j < spec.dim(); ++j) {
    double sum = 0.0, term = 1.0;
    for (int k = 0; term > sum * 1e-18 || k == 0; ++k) {
      sum += term;
      const double e = spec.a()[j] *
                       std::exp(spec.b()[j] * std::log(static_cast<double>(k + 1))) * L;
      term = e > 700.0 ? 0.0 : std::exp(-e);
      if (term == 0.0) break;
    }
    total_mass *= sum;
  }

  // Cramer factor (phi_s(x) phi_s(y))^{-1/2}
  double xx = 0.0, yy = 0.0;
  for (double v : x) xx += v * v;
  for (double v : y) yy += v * v;
  const double cramer =
      std::pow(2.0 * M_PI, spec.dim() / 2.0) * std::exp(0.25 * (xx + yy));

  double M = std::max(4.0, std::exp(1.0));
  for (;;) {
    IndexSet set = enumerate_index_set(spec, M, max_members);
    std::vector<double> mass_terms;
    mass_terms.reserve(set.size());
    for (const auto& h : set.members()) mass_terms.push_back(weight_value(spec, h));
    const double in_mass = pairwise_sum(mass_terms);
    const double tail = std::max(0.0, total_mass - in_mass) * cramer;
    if (tail <= tail_tol) {
      // evaluate with per-dimension tables up to the caps
      std::vector<HermiteEval> tx, ty;
      const auto caps = index_set_caps(spec, M);
      for (int j = 0; j < spec.dim(); ++j) {
        tx.push_back(eval_all(x[j], static_cast<int>(caps[j])));
        ty.push_back(eval_all(y[j], static_cast<int>(caps[j])));
      }
      std::vector<double> terms;
      terms.reserve(set.size());
      for (const auto& h : set.members()) {
        double t = weight_value(spec, h);
        for (int j = 0; j < spec.dim(); ++j)
          t *= tx[j].values[h[j]] * ty[j].values[h[j]];
        terms.push_back(t);
      }
      return KernelResult{pairwise_sum(terms), tail, M, set.size()};
    }
    M *= M;  // exponent doubles; caps grow geometrically
    if (!std::isfinite(M))
      throw BudgetError("kernel_eval: required truncation not reachable",
                        BudgetReport{.budget = static_cast<double>(max_members)});
  }
}

TestFunction TestFunction::make_exp_linear(std::vector<double> lambda) {
  TestFunction f;
  f.kind_ = Kind::exp_linear;
  f.s_ = static_cast<int>(lambda.size());
  f.lambda_ = std::move(lambda);
  const auto caps = exp_linear_caps(f.lambda_);
  f.truth_ = coefficients_exp_linear(f.lambda_, caps);
  return f;
}

TestFunction TestFunction::make_series(SpectralFunction fn, Kind kind) {
  if (kind == Kind::exp_linear)
    throw std::invalid_argument("make_series: use make_exp_linear for that kind");
  TestFunction f;
  f.kind_ = kind;
  f.s_ = fn.s;
  f.truth_ = std::move(fn);
  return f;
}

void TestFunction::rescale(double c) {
  scale_ *= c;
  for (auto& [k, v] : truth_.coeffs) v *= c;
}

void TestFunction::normalize_space(const WeightSpec& spec) {
  const double norm = space_norm(spec, truth_);
  if (!(norm > 0.0)) throw std::invalid_argument("normalize_space: zero function");
  rescale(1.0 / norm);
}

double TestFunction::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != s_)
    throw DimensionError("TestFunction: point dimension mismatch");
  if (kind_ == Kind::exp_linear) {
    double dot = 0.0;
    for (int j = 0; j < s_; ++j) dot += lambda_[j] * x[j];
    return scale_ * std::exp(dot);
  }
  return truth_.eval(x);
}

std::vector<double> TestFunction::eval_on_grid(
    std::span<const std::vector<double>> axes) const {
  if (kind_ == Kind::exp_linear) {
    if (static_cast<int>(axes.size()) != s_)
      throw DimensionError("TestFunction: axes dimension mismatch");
    std::vector<std::vector<double>> per_dim(s_);
    for (int j = 0; j < s_; ++j) {
      per_dim[j].reserve(axes[j].size());
      for (double x : axes[j]) per_dim[j].push_back(std::exp(lambda_[j] * x));
    }
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size();
    std::vector<double> out(total);
    std::vector<std::size_t> digit(s_, 0);
    for (std::size_t i = 0; i < total; ++i) {
      double v = scale_;
      for (int j = 0; j < s_; ++j) v *= per_dim[j][digit[j]];
      out[i] = v;
      for (int j = s_ - 1; j >= 0; --j) {
        if (++digit[j] < axes[j].size()) break;
        digit[j] = 0;
      }
    }
    return out;
  }
  return truth_.eval_on_grid(axes);
}

}  // namespace hermapp
