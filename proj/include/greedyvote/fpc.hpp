#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "greedyvote/errors.hpp"
#include "greedyvote/parallel.hpp"
#include "greedyvote/rng.hpp"
#include "greedyvote/sampler.hpp"
#include "greedyvote/weights.hpp"

namespace greedyvote {

struct FpcConfig {
  std::size_t k = 20;
  double theta = 0.5;  // first-round threshold
  double beta = 0.3;   // later thresholds are Unif[beta, 1 - beta]
  std::size_t max_rounds = 100;
  std::size_t finality_l = 2;  // consecutive unanimous rounds needed to finalize
  WeightFunction scheme_f = WeightFunction::identity();
  WeightFunction scheme_g = WeightFunction::constant_one();
  std::size_t threads = 1;

  void validate() const {
    if (k == 0) throw InvalidParameter("fpc: k must be >= 1");
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidParameter("fpc: theta must lie in [0, 1]");
    if (!(beta >= 0.0 && beta <= 0.5)) throw InvalidParameter("fpc: beta must lie in [0, 0.5]");
    if (finality_l == 0) throw InvalidParameter("fpc: finality_l must be >= 1");
    if (max_rounds == 0) throw InvalidParameter("fpc: max_rounds must be >= 1");
  }
};

struct FpcTrace {
  std::vector<std::vector<std::uint8_t>> opinions_by_round;  // row 0 holds the initial opinions
  std::vector<double> thresholds;                            // U_t for rounds t = 2, 3, ...; round 1 uses theta
  std::optional<std::size_t> consensus_round;
  double final_agreement = 0.0;

  double ones_fraction(std::size_t round) const {
    const auto& row = opinions_by_round.at(round);
    const auto ones = std::count(row.begin(), row.end(), std::uint8_t{1});
    return static_cast<double>(ones) / static_cast<double>(row.size());
  }
};

/// Multiplicity-weighted mean opinion of a greedy sample, each entry weighted by g(m_j) A(j).
inline double mean_opinion(const GreedySample& sample, std::span<const std::uint8_t> opinions, WeightFunction g,
                           const WeightDistribution& weights) {
  if (sample.entries().empty()) throw DegenerateSample("mean opinion of an empty sample");
  CompensatedSum num, den;
  for (const auto& e : sample.entries()) {
    const double wgt = g(weights[e.node]) * static_cast<double>(e.count);
    den.add(wgt);
    if (opinions[e.node]) num.add(wgt);
  }
  if (!(den.value() > 0.0)) throw DegenerateSample("g vanishes on every sampled node");
  return std::min(1.0, num.value() / den.value());
}

/// Synchronous FPC: every node reads the opinions of round t - 1 and writes round t.
/// Round t's shared threshold comes from stream 2^63 | t; node x in round t samples from stream (t << 32) | x.
inline FpcTrace run_fpc(const FpcConfig& config, const WeightDistribution& weights,
                        const std::vector<std::uint8_t>& initial_opinions, std::uint64_t seed) {
  config.validate();
  const std::size_t n = weights.size();
  if (initial_opinions.size() != n) throw InvalidParameter("fpc: need one initial opinion per node");
  for (auto s : initial_opinions)
    if (s > 1) throw InvalidParameter("fpc: opinions must be 0 or 1");
  if (n > (std::size_t{1} << 32)) throw InvalidParameter("fpc: too many nodes");

  const auto p = sampling_distribution(weights, config.scheme_f);
  const GreedySampler sampler(p);
  sampler.check_k(config.k);

  FpcTrace trace;
  trace.opinions_by_round.push_back(initial_opinions);
  std::size_t streak = 0;
  constexpr std::size_t chunk = 256;

  for (std::size_t t = 1; t <= config.max_rounds; ++t) {
    double threshold = config.theta;
    if (t >= 2) {
      RngStream shared(seed, (std::uint64_t{1} << 63) | t);
      threshold = config.beta + (1.0 - 2.0 * config.beta) * shared.uniform01();
      trace.thresholds.push_back(threshold);
    }
    const auto& prev = trace.opinions_by_round.back();
    std::vector<std::uint8_t> next(n);
    parallel_for_chunks((n + chunk - 1) / chunk, config.threads, [&](std::size_t c) {
      GreedySample sample;
      for (std::size_t x = c * chunk; x < std::min(n, (c + 1) * chunk); ++x) {
        RngStream rng(seed, (static_cast<std::uint64_t>(t) << 32) | x);
        sampler.sample_into(sample, config.k, rng);
        const double eta = mean_opinion(sample, prev, config.scheme_g, weights);
        if (t == 1)
          next[x] = eta >= threshold ? 1 : 0;
        else if (eta > threshold)
          next[x] = 1;
        else if (eta < threshold)
          next[x] = 0;
        else
          next[x] = prev[x];
      }
    });
    const bool unanimous = std::all_of(next.begin(), next.end(), [&](std::uint8_t s) { return s == next[0]; });
    const bool same_as_prev = t >= 2 && next == prev;
    streak = unanimous ? (same_as_prev ? streak + 1 : 1) : 0;
    trace.opinions_by_round.push_back(std::move(next));
    if (streak >= config.finality_l) {
      trace.consensus_round = t;
      break;
    }
  }
  const double ones = trace.ones_fraction(trace.opinions_by_round.size() - 1);
  trace.final_agreement = std::max(ones, 1.0 - ones);
  return trace;
}

}  // namespace greedyvote
