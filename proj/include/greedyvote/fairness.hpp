#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "greedyvote/errors.hpp"
#include "greedyvote/parallel.hpp"
#include "greedyvote/rng.hpp"
#include "greedyvote/sampler.hpp"
#include "greedyvote/weights.hpp"

namespace greedyvote {

/// Monte Carlo estimate of a mean with a normal-approximation 95% interval.
struct GainEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t n_runs = 0;
  std::optional<std::vector<double>> retained_samples;
};

struct MonteCarloOptions {
  std::size_t threads = 1;  // 0 = hardware concurrency
  bool retain_samples = false;
  std::size_t retain_cap = 1000000;
  std::size_t chunk_size = 4096;
  std::uint64_t stream_base = 0;  // stream id of the first chunk
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Keeps per-run values: all of them up to `cap`, otherwise the `cap` runs with the smallest
/// hash priorities (a uniform sample without replacement that does not depend on thread timing).
class SampleRetainer {
 public:
  SampleRetainer(std::uint64_t n_runs, std::size_t cap, std::uint64_t seed)
      : n_runs_(n_runs), cap_(cap), seed_(seed), direct_(n_runs <= cap) {
    if (direct_) values_.assign(static_cast<std::size_t>(n_runs), 0.0);
  }

  /// Thread-safe for distinct run indices.
  void put(std::uint64_t run, double value) {
    if (direct_) {
      values_[static_cast<std::size_t>(run)] = value;
      return;
    }
    const std::uint64_t priority = splitmix64(seed_ ^ splitmix64(run));
    std::lock_guard<std::mutex> lock(mutex_);
    if (heap_.size() < cap_) {
      heap_.push({priority, run, value});
    } else if (priority < std::get<0>(heap_.top())) {
      heap_.pop();
      heap_.push({priority, run, value});
    }
  }

  std::vector<double> take() {
    if (direct_) return std::move(values_);
    std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> kept;
    kept.reserve(heap_.size());
    while (!heap_.empty()) {
      kept.push_back(heap_.top());
      heap_.pop();
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return std::get<1>(a) < std::get<1>(b); });
    std::vector<double> out;
    out.reserve(kept.size());
    for (const auto& t : kept) out.push_back(std::get<2>(t));
    return out;
  }

 private:
  using Item = std::tuple<std::uint64_t, std::uint64_t, double>;
  struct ByPriority {
    bool operator()(const Item& a, const Item& b) const { return std::get<0>(a) < std::get<0>(b); }
  };

  std::uint64_t n_runs_;
  std::size_t cap_;
  std::uint64_t seed_;
  bool direct_;
  std::vector<double> values_;
  std::mutex mutex_;
  std::priority_queue<Item, std::vector<Item>, ByPriority> heap_;
};

inline GainEstimate finish_estimate(const RunningStats& stats) {
  GainEstimate out;
  out.n_runs = stats.n;
  out.mean = stats.mean;
  out.std_error = stats.n > 0 ? std::sqrt(stats.variance() / static_cast<double>(stats.n)) : 0.0;
  out.ci_low = out.mean - 1.96 * out.std_error;
  out.ci_high = out.mean + 1.96 * out.std_error;
  return out;
}

}  // namespace detail

/// Runs `per_run(rng)` n_runs times and aggregates the returned values.
///
/// Runs are cut into fixed-size chunks; chunk c draws from RngStream(seed, stream_base + c)
/// and chunk statistics are merged in chunk order, so results are bit-identical for any
/// thread count. `make_worker()` is called once per chunk and must return a callable
/// `double(RngStream&)`.
template <class MakeWorker>
GainEstimate monte_carlo_mean(std::uint64_t n_runs, std::uint64_t seed, const MonteCarloOptions& opts, MakeWorker&& make_worker) {
  if (n_runs == 0) throw InvalidParameter("n_runs must be >= 1");
  const std::size_t chunk = std::max<std::size_t>(opts.chunk_size, 1);
  const std::size_t chunks = static_cast<std::size_t>((n_runs + chunk - 1) / chunk);
  std::vector<RunningStats> partial(chunks);
  std::optional<detail::SampleRetainer> retainer;
  if (opts.retain_samples) retainer.emplace(n_runs, opts.retain_cap, seed ^ 0x5EEDF00Dull);

  parallel_for_chunks(chunks, opts.threads, [&](std::size_t c) {
    auto run_once = make_worker();
    RngStream rng(seed, opts.stream_base + c);
    const std::uint64_t first = static_cast<std::uint64_t>(c) * chunk;
    const std::uint64_t last = std::min<std::uint64_t>(n_runs, first + chunk);
    RunningStats stats;
    for (std::uint64_t run = first; run < last; ++run) {
      const double x = run_once(rng);
      stats.add(x);
      if (retainer) retainer->put(run, x);
    }
    partial[c] = stats;
  });

  GainEstimate out = detail::finish_estimate(pairwise_merge(std::move(partial)));
  if (retainer) out.retained_samples = retainer->take();
  return out;
}

/// Monte Carlo estimate of V_k(i) = E[A_k(i) / v_k].
inline GainEstimate estimate_voting_power(const SamplingDistribution& p, std::size_t k, std::size_t node,
                                          std::uint64_t n_runs, std::uint64_t seed, const MonteCarloOptions& opts = {}) {
  if (node >= p.size()) throw InvalidParameter("node index out of range");
  const GreedySampler sampler(p);
  sampler.check_k(k);
  return monte_carlo_mean(n_runs, seed, opts, [&] {
    return [&sampler, k, node, sample = GreedySample{}](RngStream& rng) mutable {
      sampler.sample_into(sample, k, rng);
      return static_cast<double>(sample.count(node)) / static_cast<double>(sample.total_draws());
    };
  });
}

/// Monte Carlo estimate of sum_j V(i_j) - V(i) for the given split.
///
/// Coupled mode draws both samples from one stream (identity f only). Independent mode
/// draws the pre-split and post-split samples separately, which works for any f.
inline GainEstimate estimate_split_gain(const WeightDistribution& w, WeightFunction f, std::size_t k,
                                        const SplitSpec& split, std::uint64_t n_runs, std::uint64_t seed, bool coupled,
                                        const MonteCarloOptions& opts = {}) {
  const auto p = sampling_distribution(w, f);
  if (coupled) {
    if (!f.is_identity())
      throw UnsupportedConfiguration("coupled split-gain estimation requires the identity sampling weight function");
    const CoupledSampler sampler(p, split);
    if (k == 0 || k > p.support_size()) throw InvalidParameter("k must lie in [1, support size]");
    return monte_carlo_mean(n_runs, seed, opts, [&] {
      return [&sampler, k, sample = CoupledSample{}](RngStream& rng) mutable {
        sampler.sample_into(sample, k, rng);
        return sample.gain();
      };
    });
  }
  const auto [split_w, map] = apply_split(w, split);
  const auto q = sampling_distribution(split_w, f);
  const GreedySampler pre(p);
  const GreedySampler post(q);
  pre.check_k(k);
  post.check_k(k);
  const std::size_t i = split.node;
  const IndexMap parts = map;
  return monte_carlo_mean(n_runs, seed, opts, [&] {
    return [&pre, &post, k, i, parts, a = GreedySample{}, b = GreedySample{}](RngStream& rng) mutable {
      pre.sample_into(a, k, rng);
      post.sample_into(b, k, rng);
      std::uint64_t hits = 0;
      for (std::size_t j = 0; j < parts.r; ++j) hits += b.count(parts.part(j));
      return static_cast<double>(hits) / static_cast<double>(b.total_draws()) -
             static_cast<double>(a.count(i)) / static_cast<double>(a.total_draws());
    };
  });
}

/// Split-gain experiment on a Zipf network; the defaults split the heaviest node in two equal parts.
struct GainExperiment {
  double s = 1.1;
  std::size_t n = 1000;
  std::size_t k = 20;
  WeightFunction f = WeightFunction::identity();
  std::optional<std::size_t> node;  // heaviest when empty
  std::vector<double> fractions{0.5, 0.5};
  bool coupled = true;
};

enum class SweepAxis { network_size, sample_k, split_r, zipf_s };

inline std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::network_size:
      return "network_size";
    case SweepAxis::sample_k:
      return "sample_k";
    case SweepAxis::split_r:
      return "split_r";
    case SweepAxis::zipf_s:
      return "zipf_s";
  }
  return "network_size";
}

inline SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "network_size" || text == "n") return SweepAxis::network_size;
  if (text == "sample_k" || text == "k") return SweepAxis::sample_k;
  if (text == "split_r" || text == "r") return SweepAxis::split_r;
  if (text == "zipf_s" || text == "s") return SweepAxis::zipf_s;
  throw InvalidParameter("unknown sweep axis '" + text + "'");
}

struct SweepPoint {
  double axis_value;
  GainEstimate estimate;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::network_size;
  std::vector<SweepPoint> points;
};

inline GainEstimate run_gain_experiment(const GainExperiment& e, std::uint64_t n_runs, std::uint64_t seed,
                                        const MonteCarloOptions& opts = {}) {
  const auto w = zipf_weights({e.s, e.n});
  const SplitSpec split{e.node.value_or(w.heaviest()), e.fractions};
  return estimate_split_gain(w, e.f, e.k, split, n_runs, seed, e.coupled, opts);
}

namespace detail {

inline std::size_t positive_integer_axis(double value, const char* what) {
  if (!(value >= 1.0) || value != std::floor(value) || value > 1e12)
    throw InvalidParameter(std::string(what) + " axis values must be positive integers");
  return static_cast<std::size_t>(value);
}

}  // namespace detail

/// One split-gain estimate per axis value. Point t uses streams starting at t << 32, so
/// every point is reproducible on its own from the master seed.
inline SweepResult sweep_gain(const GainExperiment& base, SweepAxis axis, const std::vector<double>& values,
                              std::uint64_t n_runs, std::uint64_t seed, const MonteCarloOptions& opts = {}) {
  if (values.empty()) throw InvalidParameter("sweep needs at least one axis value");
  for (std::size_t t = 1; t < values.size(); ++t)
    if (!(values[t] > values[t - 1])) throw InvalidParameter("sweep axis values must be strictly increasing");
  SweepResult out;
  out.axis = axis;
  for (std::size_t t = 0; t < values.size(); ++t) {
    GainExperiment e = base;
    switch (axis) {
      case SweepAxis::network_size:
        e.n = detail::positive_integer_axis(values[t], "network_size");
        break;
      case SweepAxis::sample_k:
        e.k = detail::positive_integer_axis(values[t], "sample_k");
        break;
      case SweepAxis::split_r:
        e.fractions = SplitSpec::equal(0, detail::positive_integer_axis(values[t], "split_r")).fractions;
        break;
      case SweepAxis::zipf_s:
        if (!(values[t] >= 0.0)) throw InvalidParameter("zipf_s axis values must be >= 0");
        e.s = values[t];
        break;
    }
    MonteCarloOptions point_opts = opts;
    point_opts.stream_base = opts.stream_base + (static_cast<std::uint64_t>(t) << 32);
    out.points.push_back({values[t], run_gain_experiment(e, n_runs, seed, point_opts)});
  }
  return out;
}

}  // namespace greedyvote
