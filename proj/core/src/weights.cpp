#include "hermapp/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hermapp {

namespace {

// k^b for integer k >= 0 and real b >= 1, with 0^b = 0.
double int_pow_real(int k, double b) {
  if (k == 0) return 0.0;
  if (k == 1) return 1.0;
  if (b == 1.0) return static_cast<double>(k);
  if (b == 2.0) return static_cast<double>(k) * static_cast<double>(k);
  return std::exp(b * std::log(static_cast<double>(k)));
}

std::vector<double> parse_sequence(const nlohmann::json& j, int s, const char* field) {
  std::vector<double> out;
  out.reserve(s);
  if (j.is_array()) {
    if (static_cast<int>(j.size()) < s) {
      std::ostringstream msg;
      msg << "field '" << field << "': explicit sequence has " << j.size()
          << " entries, need " << s;
      throw ConfigError(msg.str());
    }
    for (int i = 0; i < s; ++i) out.push_back(j.at(i).get<double>());
    return out;
  }
  if (!j.is_object() || !j.contains("kind")) {
    throw ConfigError(std::string("field '") + field +
                      "': expected array or {\"kind\":...} descriptor");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "explicit") {
    return parse_sequence(j.at("values"), s, field);
  }
  if (kind == "geometric") {
    const double first = j.value("first", 1.0);
    const double ratio = j.at("ratio").get<double>();
    double v = first;
    for (int i = 0; i < s; ++i, v *= ratio) out.push_back(v);
    return out;
  }
  if (kind == "power") {
    const double scale = j.value("scale", 1.0);
    const double expo = j.at("exponent").get<double>();
    for (int i = 1; i <= s; ++i) out.push_back(scale * std::pow(static_cast<double>(i), expo));
    return out;
  }
  throw ConfigError(std::string("field '") + field + "': unknown sequence kind '" + kind + "'");
}

}  // namespace

WeightSpec::WeightSpec(int s, std::vector<double> a, std::vector<double> b, double omega)
    : s_(s), a_(std::move(a)), b_(std::move(b)), omega_(omega) {
  if (s_ < 1) throw std::invalid_argument("WeightSpec: dimension must be positive");
  if (static_cast<int>(a_.size()) != s_ || static_cast<int>(b_.size()) != s_)
    throw DimensionError("WeightSpec: a and b must have length s");
  if (!(omega_ > 0.0 && omega_ < 1.0))
    throw std::invalid_argument("WeightSpec: omega must lie in (0,1)");
  if (!(a_.front() >= 1.0))
    throw std::invalid_argument("WeightSpec: a[1] >= 1 required (rescale omega instead)");
  for (int j = 1; j < s_; ++j)
    if (a_[j] < a_[j - 1])
      throw std::invalid_argument("WeightSpec: a must be non-decreasing");
  for (double bj : b_)
    if (!(bj >= 1.0)) throw std::invalid_argument("WeightSpec: every b[j] >= 1 required");
  log_inv_omega_ = -std::log(omega_);
}

WeightSpec WeightSpec::from_json(const nlohmann::json& j, int s_override) {
  if (!j.is_object()) throw ConfigError("space: expected a JSON object");
  int s = s_override > 0 ? s_override : j.value("s", 0);
  if (s <= 0) throw ConfigError("space: field 's' must be a positive integer");
  if (!j.contains("omega")) throw ConfigError("space: field 'omega' missing");
  if (!j.contains("a") || !j.contains("b")) throw ConfigError("space: fields 'a' and 'b' required");
  return WeightSpec(s, parse_sequence(j.at("a"), s, "a"), parse_sequence(j.at("b"), s, "b"),
                    j.at("omega").get<double>());
}

nlohmann::json WeightSpec::to_json() const {
  return nlohmann::json{{"s", s_},
                        {"a", {{"kind", "explicit"}, {"values", a_}}},
                        {"b", {{"kind", "explicit"}, {"values", b_}}},
                        {"omega", omega_}};
}

double exponent(const WeightSpec& spec, const MultiIndex& k) {
  if (static_cast<int>(k.size()) != spec.dim())
    throw DimensionError("exponent: multi-index length does not match spec dimension");
  double e = 0.0;
  for (int j = 0; j < spec.dim(); ++j) e += spec.a()[j] * int_pow_real(k[j], spec.b()[j]);
  return e;
}

double weight_value(const WeightSpec& spec, const MultiIndex& k) {
  const double t = exponent(spec, k) * spec.log_inv_omega();
  if (t >= 700.0) return 0.0;  // underflow guard
  return std::exp(-t);
}

double big_B(const WeightSpec& spec, int s_prefix) {
  if (s_prefix < 1 || s_prefix > spec.dim())
    throw std::out_of_range("big_B: prefix out of range");
  double sum = 0.0;
  for (int j = 0; j < s_prefix; ++j) sum += 1.0 / spec.b()[j];
  return sum;
}

OmegaK K_of_omega(double omega) {
  if (!(omega > 0.0 && omega < 1.0))
    throw std::invalid_argument("K_of_omega: omega must lie in (0,1)");
  const double log_omega = std::log(omega);
  const double log_inv = -log_omega;
  const double x = std::pow(omega, -1.0 / 8.0) - 1.0;
  int k = 1;
  if (x < 1.0) {  // otherwise the ratio is <= 0 and the max picks 1
    k = std::max(1, static_cast<int>(std::ceil(std::log(x) / log_omega)));
  }
  const double K = 3.0 * k - 1.0 + 2.0 * std::log1p(std::pow(omega, k)) / log_inv;
  // defining inequality for k
  if (!(std::log1p(std::pow(omega, k)) <= 0.125 * log_inv * (1.0 + 1e-12)))
    throw std::logic_error("K_of_omega: defining inequality violated");
  return {k, K};
}

double D_of(const WeightSpec& spec) {
  const double L = spec.log_inv_omega();
  double prod = 1.0;
  for (int j = 0; j < spec.dim(); ++j) {
    const double t = 1.0 + std::pow(L, -1.0 / spec.b()[j]);
    prod *= t * t;
  }
  return std::pow(8.0, spec.dim()) * prod;
}

IndexSet::IndexSet(WeightSpec spec, double M, std::vector<MultiIndex> members)
    : spec_(std::move(spec)), M_(M), members_(std::move(members)) {}

bool IndexSet::contains(const MultiIndex& h) const {
  return std::binary_search(members_.begin(), members_.end(), h);
}

std::vector<long> index_set_caps(const WeightSpec& spec, double M) {
  const double log_M = std::log(M);
  const double L = spec.log_inv_omega();
  std::vector<long> caps(spec.dim());
  for (int j = 0; j < spec.dim(); ++j) {
    const double t = std::pow(log_M / (spec.a()[j] * L), 1.0 / spec.b()[j]);
    caps[j] = static_cast<long>(std::ceil(t)) - 1;
    if (caps[j] < 0) caps[j] = 0;
  }
  return caps;
}

double index_set_cardinality_bound(const WeightSpec& spec, double M) {
  const double log_M = std::log(M);
  const double L = spec.log_inv_omega();
  double prod = 1.0;
  for (int j = 0; j < spec.dim(); ++j)
    prod *= 1.0 + std::pow(log_M / (spec.a()[j] * L), 1.0 / spec.b()[j]);
  return prod;
}

namespace {

struct Enumerator {
  const WeightSpec& spec;
  double log_M;
  double log_inv;
  std::vector<long> caps;
  std::uint64_t max_members;
  std::vector<MultiIndex> out;
  MultiIndex current;

  // Members satisfy exponent(h) * log(1/omega) < log M, compared in exactly
  // this form so the frontier audit sees the same bits.
  void descend(int j, double partial_exponent) {
    if (j == spec.dim()) {
      if (out.size() >= max_members) {
        throw BudgetError("enumerate_index_set: member budget exceeded",
                          BudgetReport{.set_size = max_members,
                                       .budget = static_cast<double>(max_members)});
      }
      out.push_back(current);
      return;
    }
    const double aj = spec.a()[j];
    const double bj = spec.b()[j];
    for (long k = 0; k <= caps[j]; ++k) {
      const double e = partial_exponent + aj * int_pow_real(static_cast<int>(k), bj);
      if (!(e * log_inv < log_M)) break;  // strict; exponents increase in k
      current[j] = static_cast<int>(k);
      descend(j + 1, e);
    }
    current[j] = 0;
  }
};

}  // namespace

IndexSet enumerate_index_set(const WeightSpec& spec, double M, std::uint64_t max_members) {
  if (!(M > 1.0)) throw std::invalid_argument("enumerate_index_set: M must exceed 1");
  Enumerator en{spec,        std::log(M), spec.log_inv_omega(), index_set_caps(spec, M),
                max_members, {},          MultiIndex(spec.dim(), 0)};
  en.descend(0, 0.0);
  return IndexSet(spec, M, std::move(en.out));
}

}  // namespace hermapp
