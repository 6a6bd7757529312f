#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "greedyvote/errors.hpp"

namespace greedyvote {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

/// Normalized node weights (stake shares). Node indices are 0-based.
class WeightDistribution {
 public:
  /// Normalizes `raw` so it sums to one. Entries must be finite and >= 0 with a positive total.
  static WeightDistribution from_raw(std::vector<double> raw) {
    if (raw.empty()) throw InvalidParameter("weight vector must contain at least one node");
    for (double x : raw) {
      if (!std::isfinite(x) || x < 0.0)
        throw InvalidParameter("weights must be finite and non-negative");
    }
    const double total = compensated_sum(raw);
    if (!(total > 0.0)) throw InvalidParameter("weights must have a positive total");
    for (double& x : raw) x /= total;
    return WeightDistribution(std::move(raw));
  }

  /// Takes a vector that already sums to one (within 1e-12) without rescaling it.
  static WeightDistribution from_normalized(std::vector<double> w) {
    if (w.empty()) throw InvalidParameter("weight vector must contain at least one node");
    for (double x : w) {
      if (!std::isfinite(x) || x < 0.0) throw InvalidParameter("weights must be finite and non-negative");
    }
    if (std::abs(compensated_sum(w) - 1.0) > 1e-12) throw InvalidParameter("weights are not normalized");
    return WeightDistribution(std::move(w));
  }

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

  /// Index of the largest weight (lowest index on ties).
  std::size_t heaviest() const {
    return static_cast<std::size_t>(std::max_element(weights_.begin(), weights_.end()) - weights_.begin());
  }

 private:
  explicit WeightDistribution(std::vector<double> w) : weights_(std::move(w)) {}
  std::vector<double> weights_;
};

/// Sampling weight function f (or averaging function g) applied to a node weight.
struct WeightFunction {
  enum class Kind { identity, constant_one, power };

  Kind kind = Kind::identity;
  double alpha = 1.0;  // exponent, used by Kind::power only

  static WeightFunction identity() { return {}; }
  static WeightFunction constant_one() { return {Kind::constant_one, 1.0}; }
  static WeightFunction power(double alpha) {
    if (!std::isfinite(alpha) || alpha < 0.0) throw InvalidParameter("power exponent must be finite and >= 0");
    return {Kind::power, alpha};
  }

  /// Parses "id", "identity", "one", "constant", "constant-one" or "power:<alpha>".
  static WeightFunction parse(const std::string& text) {
    if (text == "id" || text == "identity") return identity();
    if (text == "one" || text == "1" || text == "constant" || text == "constant-one") return constant_one();
    if (text.rfind("power:", 0) == 0) {
      const std::string arg = text.substr(6);
      std::size_t used = 0;
      double a = 0.0;
      try {
        a = std::stod(arg, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != arg.size()) throw InvalidParameter("cannot parse power exponent in '" + text + "'");
      return power(a);
    }
    throw InvalidParameter("unknown weight function '" + text + "'");
  }

  double operator()(double m) const {
    switch (kind) {
      case Kind::identity:
        return m;
      case Kind::constant_one:
        return 1.0;
      case Kind::power:
        return std::pow(m, alpha);
    }
    return m;
  }

  bool is_identity() const { return kind == Kind::identity; }

  std::string name() const {
    switch (kind) {
      case Kind::identity:
        return "identity";
      case Kind::constant_one:
        return "constant-one";
      case Kind::power: {
        std::ostringstream os;
        os.precision(17);
        os << "power:" << alpha;
        return os.str();
      }
    }
    return "identity";
  }

  friend bool operator==(const WeightFunction&, const WeightFunction&) = default;
};

/// Probabilities p_i = f(m_i) / sum_j f(m_j) together with the f that produced them.
class SamplingDistribution {
 public:
  SamplingDistribution(const WeightDistribution& w, WeightFunction f) : source_(f) {
    probs_.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) probs_[i] = f(w[i]);
    const double total = compensated_sum(probs_);
    if (!(total > 0.0) || !std::isfinite(total))
      throw InvalidParameter("sampling weight function vanishes on every node");
    for (double& p : probs_) p /= total;
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  const WeightFunction& source() const { return source_; }

  /// Number of nodes with positive probability.
  std::size_t support_size() const {
    return static_cast<std::size_t>(std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }));
  }

 private:
  std::vector<double> probs_;
  WeightFunction source_;
};

inline SamplingDistribution sampling_distribution(const WeightDistribution& w,
                                                  WeightFunction f = WeightFunction::identity()) {
  return SamplingDistribution(w, f);
}

/// An r-splitting of `node`: part j receives fraction x_j of the node's weight.
struct SplitSpec {
  std::size_t node = 0;
  std::vector<double> fractions{1.0};

  static SplitSpec equal(std::size_t node, std::size_t r) {
    if (r == 0) throw InvalidParameter("split arity r must be >= 1");
    return {node, std::vector<double>(r, 1.0 / static_cast<double>(r))};
  }

  std::size_t r() const { return fractions.size(); }

  void validate() const {
    if (fractions.empty()) throw InvalidParameter("split needs at least one fraction");
    for (double x : fractions) {
      if (!std::isfinite(x) || !(x > 0.0)) throw InvalidParameter("split fractions must be positive");
    }
    const double total = compensated_sum(fractions);
    if (std::abs(total - 1.0) > 1e-12) throw InvalidParameter("split fractions must sum to 1");
  }
};

/// Position of the split parts after apply_split. Parts occupy [first, first + r).
struct IndexMap {
  std::size_t first = 0;
  std::size_t r = 1;
  std::size_t old_size = 0;

  /// New index of an unsplit node, or of the first part when `old_index` is the split node.
  std::size_t map(std::size_t old_index) const { return old_index <= first ? old_index : old_index + r - 1; }
  std::size_t part(std::size_t j) const { return first + j; }
  bool is_part(std::size_t new_index) const { return new_index >= first && new_index < first + r; }
  std::size_t new_size() const { return old_size + r - 1; }
};

struct ZipfParams {
  double s = 1.0;
  std::size_t n = 1;
};

/// Rank-j weight proportional to j^{-s}, j = 1..n. Output is non-increasing.
inline WeightDistribution zipf_weights(const ZipfParams& params) {
  if (params.n == 0) throw InvalidParameter("zipf: n must be >= 1");
  if (!std::isfinite(params.s) || params.s < 0.0) throw InvalidParameter("zipf: s must be finite and >= 0");
  std::vector<double> raw(params.n);
  for (std::size_t j = 0; j < params.n; ++j) raw[j] = std::pow(static_cast<double>(j + 1), -params.s);
  return WeightDistribution::from_raw(std::move(raw));
}

namespace detail {

inline std::vector<double> split_vector(std::span<const double> base, const SplitSpec& split, IndexMap& map) {
  split.validate();
  if (split.node >= base.size()) throw InvalidParameter("split node index out of range");
  if (!(base[split.node] > 0.0)) throw InvalidParameter("cannot split a node with zero weight");
  map = IndexMap{split.node, split.r(), base.size()};
  std::vector<double> out;
  out.reserve(map.new_size());
  out.insert(out.end(), base.begin(), base.begin() + static_cast<std::ptrdiff_t>(split.node));
  const double m = base[split.node];
  for (double x : split.fractions) out.push_back(m * x);
  out.insert(out.end(), base.begin() + static_cast<std::ptrdiff_t>(split.node) + 1, base.end());
  return out;
}

}  // namespace detail

/// Replaces node `split.node` by r contiguous nodes with weights m_i * x_j.
inline std::pair<WeightDistribution, IndexMap> apply_split(const WeightDistribution& w, const SplitSpec& split) {
  IndexMap map;
  auto raw = detail::split_vector(w.weights(), split, map);
  return {WeightDistribution::from_normalized(std::move(raw)), map};
}

struct DistributionDistance {
  double sup_norm = 0.0;
  double l1_norm = 0.0;
};

/// Sup- and l1-distance; the shorter vector is zero-padded.
inline DistributionDistance distribution_distance(std::span<const double> p, std::span<const double> q) {
  const std::size_t n = std::max(p.size(), q.size());
  DistributionDistance d;
  CompensatedSum l1;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    const double diff = std::abs(a - b);
    d.sup_norm = std::max(d.sup_norm, diff);
    l1.add(diff);
  }
  d.l1_norm = l1.value();
  return d;
}

inline DistributionDistance distribution_distance(const SamplingDistribution& p, const SamplingDistribution& q) {
  return distribution_distance(p.probs(), q.probs());
}

/// Reads a CSV with a single `weight` column (header required) and normalizes it.
inline WeightDistribution load_weights_csv(std::istream& in) {
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  };
  if (!std::getline(in, line) || trim(line) != "weight")
    throw InvalidParameter("weights CSV must start with a 'weight' header");
  std::vector<double> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string cell = trim(line);
    if (cell.empty()) continue;
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size())
      throw InvalidParameter("weights CSV line " + std::to_string(line_no) + ": cannot parse '" + cell + "'");
    raw.push_back(x);
  }
  return WeightDistribution::from_raw(std::move(raw));
}

inline WeightDistribution load_weights_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open weights file '" + path + "'");
  return load_weights_csv(in);
}

}  // namespace greedyvote
