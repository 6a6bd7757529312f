#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "greedyvote/errors.hpp"
#include "greedyvote/weights.hpp"

namespace greedyvote {

/// Exact law of v_k truncated at v_max: probs are indexed by v, residual is P(v_k > v_max).
struct VDistribution {
  std::size_t k = 1;
  std::size_t v_max = 1;
  std::vector<double> probs;  // size v_max + 1, zero below k
  double residual = 0.0;

  double prob(std::size_t v) const { return v < probs.size() ? probs[v] : 0.0; }
};

/// Exact law of (A_k(i), v_k) truncated at v_max.
struct JointDistribution {
  std::size_t k = 1;
  std::size_t node = 0;
  std::size_t v_max = 1;
  std::vector<std::vector<double>> probs;  // probs[v][ell], v in [0, v_max], ell in [0, v]
  double residual = 0.0;

  double prob(std::size_t ell, std::size_t v) const {
    if (v >= probs.size() || ell >= probs[v].size()) return 0.0;
    return probs[v][ell];
  }

  /// Sum over ell for a fixed v.
  double marginal(std::size_t v) const {
    if (v >= probs.size()) return 0.0;
    return compensated_sum(probs[v]);
  }
};

/// Law of u_k, the number of distinct nodes among k draws; probs[u - 1] = P(u_k = u).
struct UDistribution {
  std::size_t k = 1;
  std::vector<double> probs;

  double prob(std::size_t u) const { return u >= 1 && u <= probs.size() ? probs[u - 1] : 0.0; }
};

struct ExactLimits {
  std::size_t max_nodes = 14;
  std::size_t max_k = 6;
  std::size_t max_k_u = 10;
  std::size_t max_v = 1000;
  double max_terms = 1e8;
  std::size_t oracle_max_nodes = 5;
  std::size_t oracle_max_v = 10;
};

inline constexpr ExactLimits kExactLimits{};

namespace detail {

inline double binomial(std::size_t n, std::size_t r) {
  if (r > n) return 0.0;
  r = std::min(r, n - r);
  double out = 1.0;
  for (std::size_t j = 1; j <= r; ++j) out = out * static_cast<double>(n - r + j) / static_cast<double>(j);
  return std::round(out) < 9.0e15 ? std::round(out) : out;
}

/// Calls fn(parts) for every composition of n into m positive parts.
/// m == 0 yields the empty composition iff n == 0.
inline void for_each_composition(std::size_t n, std::size_t m, const std::function<void(std::span<const std::size_t>)>& fn) {
  if (m == 0) {
    if (n == 0) fn({});
    return;
  }
  if (n < m) return;
  std::vector<std::size_t> parts(m, 1);
  std::function<void(std::size_t, std::size_t)> fill = [&](std::size_t pos, std::size_t remaining) {
    if (pos + 1 == m) {
      parts[pos] = remaining;
      fn(parts);
      return;
    }
    const std::size_t left_after = m - 1 - pos;  // parts still to place after this one
    for (std::size_t x = 1; x + left_after <= remaining; ++x) {
      parts[pos] = x;
      fill(pos + 1, remaining - x);
    }
  };
  fill(0, n);
}

/// Calls fn(subset) for every size-m subset of `items` (increasing positions).
inline void for_each_subset(std::span<const std::size_t> items, std::size_t m,
                            const std::function<void(std::span<const std::size_t>)>& fn) {
  if (m > items.size()) return;
  std::vector<std::size_t> pos(m);
  std::vector<std::size_t> chosen(m);
  for (std::size_t t = 0; t < m; ++t) pos[t] = t;
  while (true) {
    for (std::size_t t = 0; t < m; ++t) chosen[t] = items[pos[t]];
    fn(chosen);
    std::size_t t = m;
    while (t > 0 && pos[t - 1] == items.size() - m + (t - 1)) --t;
    if (t == 0) return;
    ++pos[t - 1];
    for (std::size_t u = t; u < m; ++u) pos[u] = pos[u - 1] + 1;
  }
}

/// Evaluates sums of the form
///   sum over compositions x of n into m parts of multinomial(n; x) * sum over m-subsets A of
///   the allowed nodes of prod_r p_{a_r}^{x_r}.
/// Compositions for each (n, m) are enumerated once and cached.
class CompositionSums {
 public:
  CompositionSums(std::span<const double> probs, std::size_t max_power) : probs_(probs.begin(), probs.end()) {
    double min_positive = 1.0;
    for (double p : probs_)
      if (p > 0.0) min_positive = std::min(min_positive, p);
    log_space_ = min_positive < 1e-8;
    powers_.assign(probs_.size(), std::vector<double>(max_power + 1, 1.0));
    for (std::size_t a = 0; a < probs_.size(); ++a) {
      for (std::size_t x = 1; x <= max_power; ++x) {
        powers_[a][x] = log_space_ ? static_cast<double>(x) * std::log(probs_[a]) : powers_[a][x - 1] * probs_[a];
      }
      if (log_space_) powers_[a][0] = 0.0;
    }
  }

  /// Nodes with positive probability excluding `excluded`.
  std::vector<std::size_t> allowed(std::initializer_list<std::size_t> excluded) const {
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < probs_.size(); ++a) {
      if (!(probs_[a] > 0.0)) continue;
      if (std::find(excluded.begin(), excluded.end(), a) != excluded.end()) continue;
      out.push_back(a);
    }
    return out;
  }

  double sum(std::size_t n, std::size_t m, std::span<const std::size_t> nodes) {
    if (m == 0) return n == 0 ? 1.0 : 0.0;
    const auto& comps = compositions(n, m);
    if (comps.coeffs.empty() || nodes.size() < m) return 0.0;
    CompensatedSum acc;
    for_each_subset(nodes, m, [&](std::span<const std::size_t> subset) {
      const std::size_t count = comps.coeffs.size();
      for (std::size_t c = 0; c < count; ++c) {
        const std::size_t* x = &comps.parts[c * m];
        if (log_space_) {
          double lt = comps.coeffs[c];
          for (std::size_t r = 0; r < m; ++r) lt += powers_[subset[r]][x[r]];
          acc.add(std::exp(lt));
        } else {
          double t = comps.coeffs[c];
          for (std::size_t r = 0; r < m; ++r) t *= powers_[subset[r]][x[r]];
          acc.add(t);
        }
      }
    });
    return acc.value();
  }

  bool log_space() const { return log_space_; }
  double prob(std::size_t a) const { return probs_[a]; }

 private:
  struct CompositionList {
    std::vector<std::size_t> parts;  // flattened, m per composition
    std::vector<double> coeffs;      // multinomial coefficient (log of it in log space)
  };

  const CompositionList& compositions(std::size_t n, std::size_t m) {
    auto key = std::make_pair(n, m);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    CompositionList list;
    for_each_composition(n, m, [&](std::span<const std::size_t> x) {
      list.parts.insert(list.parts.end(), x.begin(), x.end());
      // multinomial(n; x) = prod_j C(x_1 + .. + x_j, x_j)
      double coeff = log_space_ ? 0.0 : 1.0;
      std::size_t partial = 0;
      for (std::size_t xj : x) {
        partial += xj;
        if (log_space_)
          coeff += std::lgamma(static_cast<double>(partial) + 1.0) - std::lgamma(static_cast<double>(partial - xj) + 1.0) -
                   std::lgamma(static_cast<double>(xj) + 1.0);
        else
          coeff *= binomial(partial, xj);
      }
      list.coeffs.push_back(coeff);
    });
    return cache_.emplace(key, std::move(list)).first->second;
  }

  std::vector<double> probs_;
  std::vector<std::vector<double>> powers_;
  bool log_space_ = false;
  std::map<std::pair<std::size_t, std::size_t>, CompositionList> cache_;
};

inline std::size_t positive_support(std::span<const double> probs) {
  return static_cast<std::size_t>(std::count_if(probs.begin(), probs.end(), [](double p) { return p > 0.0; }));
}

/// Number of (subset, composition) products one CompositionSums::sum(n, m, ...) call visits.
inline double sum_terms(std::size_t nodes, std::size_t n, std::size_t m) {
  if (m == 0 || n < m) return 0.0;
  return binomial(nodes, m) * binomial(n - 1, m - 1);
}

inline void check_common(std::span<const double> probs, std::size_t k, std::size_t v_max, const ExactLimits& lim) {
  if (k == 0) throw InvalidParameter("k must be >= 1");
  const std::size_t n = positive_support(probs);
  if (k > n) throw InvalidParameter("k exceeds the number of nodes with positive probability");
  if (n > lim.max_nodes)
    throw ResourceLimit("exact: support size N = " + std::to_string(n) + " exceeds limit " + std::to_string(lim.max_nodes));
  if (k > lim.max_k) throw ResourceLimit("exact: k = " + std::to_string(k) + " exceeds limit " + std::to_string(lim.max_k));
  if (v_max > lim.max_v)
    throw ResourceLimit("exact: v_max = " + std::to_string(v_max) + " exceeds limit " + std::to_string(lim.max_v));
}

inline double v_distribution_terms(std::size_t n, std::size_t k, std::size_t v_max) {
  double terms = 0.0;
  for (std::size_t v = k; v <= v_max; ++v) terms += static_cast<double>(n) * sum_terms(n - 1, v - 1, k - 1);
  return terms;
}

inline double joint_distribution_terms(std::size_t n, std::size_t k, std::size_t v_max) {
  double terms = 0.0;
  for (std::size_t m = 0; m < v_max; ++m) {
    terms += sum_terms(n - 1, m, k - 1);
    if (n >= 2) terms += static_cast<double>(n - 1) * (sum_terms(n - 2, m, k - 1) + sum_terms(n - 2, m, k >= 2 ? k - 2 : 0));
  }
  return terms;
}

inline void check_terms(double terms, const ExactLimits& lim) {
  if (terms > lim.max_terms)
    throw ResourceLimit("exact: term count " + std::to_string(static_cast<long long>(terms)) + " exceeds budget " +
                        std::to_string(static_cast<long long>(lim.max_terms)) + " (reduce v_max, k or N)");
}

}  // namespace detail

/// P(v_k = v) for v in [k, v_max]: the last node j is drawn once; the k-1 nodes before it
/// are an unordered subset of the others, appearing x_1..x_{k-1} >= 1 times in any order.
inline VDistribution exact_v_distribution(std::span<const double> probs, std::size_t k, std::size_t v_max,
                                          const ExactLimits& lim = kExactLimits) {
  detail::check_common(probs, k, v_max, lim);
  const std::size_t n = detail::positive_support(probs);
  detail::check_terms(detail::v_distribution_terms(n, k, v_max), lim);

  VDistribution out;
  out.k = k;
  out.v_max = v_max;
  out.probs.assign(v_max + 1, 0.0);
  detail::CompositionSums sums(probs, v_max);
  CompensatedSum total;
  for (std::size_t v = k; v <= v_max; ++v) {
    CompensatedSum acc;
    for (std::size_t last = 0; last < probs.size(); ++last) {
      if (!(probs[last] > 0.0)) continue;
      const auto others = sums.allowed({last});
      acc.add(probs[last] * sums.sum(v - 1, k - 1, others));
    }
    out.probs[v] = acc.value();
    total.add(out.probs[v]);
  }
  out.residual = std::max(0.0, 1.0 - total.value());
  return out;
}

inline VDistribution exact_v_distribution(const SamplingDistribution& p, std::size_t k, std::size_t v_max,
                                          const ExactLimits& lim = kExactLimits) {
  return exact_v_distribution(p.probs(), k, v_max, lim);
}

/// P(A_k(i) = ell, v_k = v) for v in [k, v_max].
///
/// ell = 0: the k distinct nodes avoid i.
/// ell = 1: either i is among the first v - 1 draws exactly once and some j != i is last,
///          or i itself is the last (k-th distinct) node.
/// ell >= 2: i appears ell times before some last node j != i.
inline JointDistribution exact_joint_distribution(std::span<const double> probs, std::size_t k, std::size_t node,
                                                  std::size_t v_max, const ExactLimits& lim = kExactLimits) {
  if (node >= probs.size()) throw InvalidParameter("node index out of range");
  detail::check_common(probs, k, v_max, lim);
  const std::size_t n = detail::positive_support(probs);
  detail::check_terms(detail::joint_distribution_terms(n, k, v_max), lim);

  JointDistribution out;
  out.k = k;
  out.node = node;
  out.v_max = v_max;
  out.probs.resize(v_max + 1);
  for (std::size_t v = 0; v <= v_max; ++v) out.probs[v].assign(v + 1, 0.0);

  detail::CompositionSums sums(probs, v_max);
  const double pi = probs[node];
  const std::size_t i = node;

  // i is the last node: p_i * S(v - 1, k - 1; all but i).
  std::vector<double> last_is_i(v_max + 1, 0.0);
  if (pi > 0.0) {
    const auto others = sums.allowed({i});
    for (std::size_t v = k; v <= v_max; ++v) last_is_i[v] = pi * sums.sum(v - 1, k - 1, others);
  }

  // Per last node j != i: sums over subsets avoiding {i, j}.
  std::vector<std::vector<CompensatedSum>> cells(v_max + 1);
  for (std::size_t v = 0; v <= v_max; ++v) cells[v].resize(v + 1);
  std::vector<double> avoid_last(v_max + 1);
  std::vector<double> with_i(v_max + 1);
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (j == i || !(probs[j] > 0.0)) continue;
    const double pj = probs[j];
    const auto rest = sums.allowed({i, j});
    for (std::size_t m = 0; m < v_max; ++m) {
      avoid_last[m] = sums.sum(m, k - 1, rest);
      with_i[m] = (k >= 2 && pi > 0.0) ? sums.sum(m, k - 2, rest) : 0.0;
    }
    for (std::size_t v = k; v <= v_max; ++v) {
      // ell = 0
      cells[v][0].add(pj * avoid_last[v - 1]);
      if (k < 2 || !(pi > 0.0)) continue;
      // ell >= 1 with i strictly before the last draw: C(v-1, ell) p_i^ell S(v-1-ell, k-2; rest)
      double pi_pow = 1.0;
      for (std::size_t ell = 1; ell + k - 1 <= v; ++ell) {
        pi_pow *= pi;
        const double s = with_i[v - 1 - ell];
        if (s == 0.0) continue;
        cells[v][ell].add(pj * detail::binomial(v - 1, ell) * pi_pow * s);
      }
    }
  }

  CompensatedSum total;
  for (std::size_t v = k; v <= v_max; ++v) {
    cells[v][1].add(last_is_i[v]);
    for (std::size_t ell = 0; ell <= v; ++ell) {
      out.probs[v][ell] = cells[v][ell].value();
      total.add(out.probs[v][ell]);
    }
  }
  out.residual = std::max(0.0, 1.0 - total.value());
  return out;
}

inline JointDistribution exact_joint_distribution(const SamplingDistribution& p, std::size_t k, std::size_t node,
                                                  std::size_t v_max, const ExactLimits& lim = kExactLimits) {
  return exact_joint_distribution(p.probs(), k, node, v_max, lim);
}

/// P(u_k = u): u distinct nodes appearing x_1..x_u >= 1 times in k draws.
inline UDistribution exact_u_distribution(std::span<const double> probs, std::size_t k,
                                          const ExactLimits& lim = kExactLimits) {
  if (k == 0) throw InvalidParameter("k must be >= 1");
  const std::size_t n = detail::positive_support(probs);
  if (n > lim.max_nodes)
    throw ResourceLimit("exact: support size N = " + std::to_string(n) + " exceeds limit " + std::to_string(lim.max_nodes));
  if (k > lim.max_k_u) throw ResourceLimit("exact: k = " + std::to_string(k) + " exceeds limit " + std::to_string(lim.max_k_u));
  UDistribution out;
  out.k = k;
  out.probs.assign(k, 0.0);
  detail::CompositionSums sums(probs, k);
  const auto all = sums.allowed({});
  for (std::size_t u = 1; u <= k; ++u) out.probs[u - 1] = sums.sum(k, u, all);
  return out;
}

inline UDistribution exact_u_distribution(const SamplingDistribution& p, std::size_t k,
                                          const ExactLimits& lim = kExactLimits) {
  return exact_u_distribution(p.probs(), k, lim);
}

struct OracleResult {
  VDistribution v;
  std::vector<JointDistribution> joint;  // one per node
};

/// Brute-force ground truth: walks every draw sequence of length <= v_max whose final draw
/// is the first time k distinct nodes are reached.
inline OracleResult enumeration_oracle(std::span<const double> probs, std::size_t k, std::size_t v_max,
                                       const ExactLimits& lim = kExactLimits) {
  const std::size_t n = probs.size();
  if (k == 0) throw InvalidParameter("k must be >= 1");
  if (n > lim.oracle_max_nodes)
    throw ResourceLimit("oracle: N = " + std::to_string(n) + " exceeds limit " + std::to_string(lim.oracle_max_nodes));
  if (v_max > lim.oracle_max_v)
    throw ResourceLimit("oracle: v_max = " + std::to_string(v_max) + " exceeds limit " + std::to_string(lim.oracle_max_v));
  if (k > detail::positive_support(probs)) throw InvalidParameter("k exceeds the number of nodes with positive probability");

  OracleResult out;
  out.v.k = k;
  out.v.v_max = v_max;
  out.v.probs.assign(v_max + 1, 0.0);
  out.joint.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& j = out.joint[i];
    j.k = k;
    j.node = i;
    j.v_max = v_max;
    j.probs.resize(v_max + 1);
    for (std::size_t v = 0; v <= v_max; ++v) j.probs[v].assign(v + 1, 0.0);
  }

  std::vector<std::size_t> counts(n, 0);
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t length, std::size_t distinct, double prob) {
    for (std::size_t u = 0; u < n; ++u) {
      if (!(probs[u] > 0.0)) continue;
      const double next = prob * probs[u];
      const bool fresh = counts[u] == 0;
      ++counts[u];
      if (fresh && distinct + 1 == k) {
        const std::size_t v = length + 1;
        out.v.probs[v] += next;
        for (std::size_t i = 0; i < n; ++i) out.joint[i].probs[v][counts[i]] += next;
      } else if (length + 1 < v_max) {
        walk(length + 1, distinct + (fresh ? 1 : 0), next);
      }
      --counts[u];
    }
  };
  if (v_max >= 1) walk(0, 0, 1.0);

  const double v_total = compensated_sum(out.v.probs);
  out.v.residual = std::max(0.0, 1.0 - v_total);
  for (auto& j : out.joint) j.residual = out.v.residual;
  return out;
}

inline OracleResult enumeration_oracle(const SamplingDistribution& p, std::size_t k, std::size_t v_max,
                                       const ExactLimits& lim = kExactLimits) {
  return enumeration_oracle(p.probs(), k, v_max, lim);
}

/// 1 + log(1 - x) / x, continuous at 0; series for small x avoids cancellation.
inline double one_plus_log1m_over(double x) {
  if (x == 0.0) return 0.0;
  if (std::abs(x) < 0.05) {
    // -(x/2 + x^2/3 + x^3/4 + ...)
    double term = x;
    double acc = 0.0;
    for (int n = 2; n < 60; ++n) {
      const double add = term / n;
      acc += add;
      if (std::abs(add) < 1e-18 * std::abs(acc)) break;
      term *= x;
    }
    return -acc;
  }
  return 1.0 + std::log1p(-x) / x;
}

/// Closed-form k = 2 voting power E[A_2(i) / v_2].
inline double voting_power_k2(std::span<const double> probs, std::size_t node) {
  if (probs.size() < 2) throw InvalidParameter("k = 2 voting power needs at least two nodes");
  if (node >= probs.size()) throw InvalidParameter("node index out of range");
  for (double p : probs)
    if (p >= 1.0) throw InvalidParameter("a node with probability 1 makes k = 2 sampling non-terminating");
  const double pi = probs[node];
  CompensatedSum others;
  for (std::size_t u = 0; u < probs.size(); ++u)
    if (u != node) others.add(one_plus_log1m_over(probs[u]));
  // (1 - p_i) log(1 - p_i) / p_i = (1 - p_i)(h(p_i) - 1)
  return -pi * others.value() + (1.0 - pi) * (one_plus_log1m_over(pi) - 1.0) + 1.0;
}

inline double voting_power_k2(const SamplingDistribution& p, std::size_t node) { return voting_power_k2(p.probs(), node); }

/// Closed-form k = 2 gain sum_j V(i_j) - V(i) of splitting node i into fractions x_j.
inline double split_gain_k2(std::span<const double> probs, const SplitSpec& split) {
  split.validate();
  if (split.node >= probs.size()) throw InvalidParameter("split node index out of range");
  const double pi = probs[split.node];
  if (!(pi > 0.0) || pi >= 1.0) throw InvalidParameter("split node probability must lie in (0, 1)");
  if (split.r() == 1) return 0.0;
  CompensatedSum parts;
  for (double x : split.fractions) parts.add(one_plus_log1m_over(pi * x));
  return (1.0 - pi) * (parts.value() - one_plus_log1m_over(pi));
}

inline double split_gain_k2(const SamplingDistribution& p, const SplitSpec& split) {
  if (!p.source().is_identity())
    throw UnsupportedConfiguration("closed-form split gain requires the identity sampling weight function");
  return split_gain_k2(p.probs(), split);
}

/// k = 2 gain of an equal r-split of a node with probability p.
inline double tau_r_value(double p, std::size_t r) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("tau_r: p must lie in (0, 1)");
  if (r == 0) throw InvalidParameter("tau_r: r must be >= 1");
  if (r == 1) return 0.0;
  const double rd = static_cast<double>(r);
  return (1.0 - p) * (rd * one_plus_log1m_over(p / rd) - one_plus_log1m_over(p));
}

/// Limit of tau_r(p) as r grows without bound.
inline double tau_limit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("tau: p must lie in (0, 1)");
  return (1.0 - p) * (-p / 2.0 - one_plus_log1m_over(p));
}

struct TauMaximum {
  double m_star;
  double tau_star;
};

/// Golden-section search for the maximizer of tau on (0.01, 0.99).
inline TauMaximum tau_argmax(double bracket_width = 1e-8) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.01;
  double b = 0.99;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = tau_limit(c);
  double fd = tau_limit(d);
  while (b - a > bracket_width) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = tau_limit(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = tau_limit(d);
    }
  }
  const double m = 0.5 * (a + b);
  return {m, tau_limit(m)};
}

struct TruncatedPower {
  double value = 0.0;
  double error_bound = 0.0;
  std::size_t v_max = 0;
};

/// V_k(i) = E[A_k(i) / v_k] from the exact joint law, doubling v_max from 4k until the
/// residual mass drops below epsilon. The residual bounds the error because A/v is in [0, 1].
inline TruncatedPower voting_power_truncated(std::span<const double> probs, std::size_t k, std::size_t node, double epsilon,
                                             const ExactLimits& lim = kExactLimits) {
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon must be > 0");
  if (node >= probs.size()) throw InvalidParameter("node index out of range");
  const std::size_t n = detail::positive_support(probs);
  std::size_t v_max = std::max<std::size_t>(4 * k, 1);
  double achieved = 1.0;
  while (true) {
    const bool too_large = v_max > lim.max_v || (k <= n && detail::joint_distribution_terms(n, k, v_max) > lim.max_terms);
    if (too_large) {
      throw ResourceLimit("voting_power_truncated: limits reached at v_max = " + std::to_string(v_max) +
                          " with residual " + std::to_string(achieved) + " >= epsilon");
    }
    const auto joint = exact_joint_distribution(probs, k, node, v_max, lim);
    achieved = joint.residual;
    if (joint.residual < epsilon) {
      CompensatedSum acc;
      for (std::size_t v = k; v <= v_max; ++v)
        for (std::size_t ell = 1; ell <= v; ++ell)
          acc.add(static_cast<double>(ell) / static_cast<double>(v) * joint.probs[v][ell]);
      return {acc.value(), joint.residual, v_max};
    }
    v_max *= 2;
  }
}

inline TruncatedPower voting_power_truncated(const SamplingDistribution& p, std::size_t k, std::size_t node, double epsilon,
                                             const ExactLimits& lim = kExactLimits) {
  return voting_power_truncated(p.probs(), k, node, epsilon, lim);
}

}  // namespace greedyvote
