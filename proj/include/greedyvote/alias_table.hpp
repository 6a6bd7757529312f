#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "greedyvote/errors.hpp"
#include "greedyvote/rng.hpp"
#include "greedyvote/weights.hpp"

namespace greedyvote {

/// Walker/Vose alias table: O(n) build, O(1) draw. Immutable after construction.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> probs) {
    const std::size_t n = probs.size();
    if (n == 0) throw InvalidParameter("alias table needs at least one outcome");
    const double total = compensated_sum(probs);
    if (!(total > 0.0)) throw InvalidParameter("alias table needs positive total mass");

    accept_.assign(n, 1.0);
    alias_.resize(n);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      alias_[i] = static_cast<std::uint32_t>(i);
      scaled[i] = probs[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      accept_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // Leftovers are 1 up to rounding.
    for (std::uint32_t i : large) accept_[i] = 1.0;
    std::size_t heaviest = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (probs[i] > probs[heaviest]) heaviest = i;
    for (std::uint32_t i : small) {
      // A zero-probability outcome must never be returned by its own column.
      if (probs[i] > 0.0) {
        accept_[i] = 1.0;
      } else {
        accept_[i] = 0.0;
        alias_[i] = static_cast<std::uint32_t>(heaviest);
      }
    }
  }

  explicit AliasTable(const SamplingDistribution& p) : AliasTable(p.probs()) {}

  std::size_t size() const { return accept_.size(); }

  std::size_t draw(RngStream& rng) const {
    const std::size_t column = rng.uniform_index(accept_.size());
    return rng.uniform01() < accept_[column] ? column : alias_[column];
  }

 private:
  std::vector<double> accept_;
  std::vector<std::uint32_t> alias_;
};

/// Draws one node index with probability p_i.
inline std::size_t draw_one(const AliasTable& table, RngStream& rng) { return table.draw(rng); }

}  // namespace greedyvote
