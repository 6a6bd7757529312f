#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "greedyvote/alias_table.hpp"
#include "greedyvote/errors.hpp"
#include "greedyvote/rng.hpp"
#include "greedyvote/weights.hpp"

namespace greedyvote {

/// Outcome of one greedy sampling run: draws with replacement until k distinct nodes were seen.
class GreedySample {
 public:
  struct Entry {
    std::size_t node;
    std::uint64_t count;
  };

  /// Records one draw; returns true if the node had not been seen before.
  bool add(std::size_t node) {
    ++total_draws_;
    last_ = node;
    for (auto& e : entries_) {
      if (e.node == node) {
        ++e.count;
        return false;
      }
    }
    entries_.push_back({node, 1});
    return true;
  }

  void clear() {
    entries_.clear();
    total_draws_ = 0;
  }

  /// A_k(node); zero for nodes never drawn.
  std::uint64_t count(std::size_t node) const {
    for (const auto& e : entries_)
      if (e.node == node) return e.count;
    return 0;
  }

  /// Entries in first-seen order.
  std::span<const Entry> entries() const { return entries_; }
  std::size_t distinct() const { return entries_.size(); }
  std::uint64_t total_draws() const { return total_draws_; }
  std::size_t last_node() const { return last_; }

 private:
  std::vector<Entry> entries_;
  std::uint64_t total_draws_ = 0;
  std::size_t last_ = 0;
};

/// Greedy sampler over a fixed distribution; holds the alias table so it can be reused across runs.
class GreedySampler {
 public:
  explicit GreedySampler(const SamplingDistribution& p) : table_(p), support_(p.support_size()) {}

  std::size_t support_size() const { return support_; }

  void check_k(std::size_t k) const {
    if (k == 0) throw InvalidParameter("k must be >= 1");
    if (k > support_)
      throw InvalidParameter("k = " + std::to_string(k) + " exceeds the number of nodes with positive probability (" +
                             std::to_string(support_) + ")");
  }

  GreedySample sample(std::size_t k, RngStream& rng) const {
    GreedySample out;
    sample_into(out, k, rng);
    return out;
  }

  /// Reuses `out`'s storage.
  void sample_into(GreedySample& out, std::size_t k, RngStream& rng) const {
    check_k(k);
    out.clear();
    while (out.distinct() < k) out.add(table_.draw(rng));
  }

  const AliasTable& table() const { return table_; }

 private:
  AliasTable table_;
  std::size_t support_;
};

inline GreedySample greedy_sample(const SamplingDistribution& p, std::size_t k, RngStream& rng) {
  return GreedySampler(p).sample(k, rng);
}

/// Paired outcomes of greedy sampling before (over P) and after (over the split P) a node split.
struct CoupledSample {
  GreedySample pre;
  GreedySample post;
  std::uint64_t extra_draws = 0;        // K = pre.v - post.v
  std::uint64_t extra_split_hits = 0;   // L = pre.A(i) - sum_j post.A(i_j)
  std::uint64_t pre_split_count = 0;    // Y_pre  = pre.A(i)
  std::uint64_t post_split_count = 0;   // Y_post = sum_j post.A(i_j)

  /// Y_post / v_post - Y_pre / v_pre.
  double gain() const {
    return static_cast<double>(post_split_count) / static_cast<double>(post.total_draws()) -
           static_cast<double>(pre_split_count) / static_cast<double>(pre.total_draws());
  }
};

/// Couples greedy sampling on P with greedy sampling on P split at one node.
///
/// Every draw u ~ P is appended to the pre sequence. While the post sequence is
/// still running it receives u as well, except that a draw of the split node i
/// is replaced by part i_j chosen with probability x_j. The post sequence always
/// has at least as many distinct nodes, so it stops first; the pre sequence then
/// keeps drawing from P until it reaches k distinct nodes.
///
/// The conditional law of the parts given i equals (x_1..x_r) only when both
/// distributions share a normalizer, i.e. for the identity sampling function.
class CoupledSampler {
 public:
  CoupledSampler(const SamplingDistribution& p, const SplitSpec& split)
      : split_(split), pre_table_(p), part_table_(split.fractions), pre_support_(p.support_size()) {
    if (!p.source().is_identity())
      throw UnsupportedConfiguration("coupled sampling requires the identity sampling weight function");
    split.validate();
    if (split.node >= p.size()) throw InvalidParameter("split node index out of range");
    if (!(p[split.node] > 0.0)) throw InvalidParameter("cannot split a node with zero probability");
    map_ = IndexMap{split.node, split.r(), p.size()};
  }

  const IndexMap& index_map() const { return map_; }

  CoupledSample sample(std::size_t k, RngStream& rng) const {
    CoupledSample out;
    sample_into(out, k, rng);
    return out;
  }

  void sample_into(CoupledSample& out, std::size_t k, RngStream& rng) const {
    if (k == 0) throw InvalidParameter("k must be >= 1");
    if (k > pre_support_)
      throw InvalidParameter("k = " + std::to_string(k) + " exceeds the pre-split support size (" +
                             std::to_string(pre_support_) + ")");
    out.pre.clear();
    out.post.clear();
    const std::size_t i = split_.node;
    bool post_running = true;
    std::uint64_t pre_hits = 0;
    std::uint64_t post_hits = 0;
    while (out.pre.distinct() < k) {
      const std::size_t u = pre_table_.draw(rng);
      out.pre.add(u);
      if (u == i) ++pre_hits;
      if (post_running) {
        if (u == i) {
          out.post.add(map_.part(part_table_.draw(rng)));
          ++post_hits;
        } else {
          out.post.add(map_.map(u));
        }
        post_running = out.post.distinct() < k;
      }
    }
    out.pre_split_count = pre_hits;
    out.post_split_count = post_hits;
    out.extra_draws = out.pre.total_draws() - out.post.total_draws();
    out.extra_split_hits = pre_hits - post_hits;
  }

 private:
  SplitSpec split_;
  AliasTable pre_table_;
  AliasTable part_table_;
  std::size_t pre_support_;
  IndexMap map_;
};

inline CoupledSample coupled_greedy_sample(const SamplingDistribution& p, const SplitSpec& split, std::size_t k,
                                           RngStream& rng) {
  return CoupledSampler(p, split).sample(k, rng);
}

}  // namespace greedyvote
