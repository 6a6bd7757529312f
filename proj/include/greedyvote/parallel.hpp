#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace greedyvote {

/// Count, mean and sum of squared deviations; merged with Chan's pairwise update.
struct RunningStats {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  static RunningStats merge(const RunningStats& a, const RunningStats& b) {
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    RunningStats out;
    out.n = a.n + b.n;
    const double na = static_cast<double>(a.n);
    const double nb = static_cast<double>(b.n);
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * nb / static_cast<double>(out.n);
    out.m2 = a.m2 + b.m2 + delta * delta * na * nb / static_cast<double>(out.n);
    return out;
  }

  /// Sample variance (n - 1 denominator); zero for fewer than two values.
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

/// Merges in a fixed balanced tree over the input order, so the result depends only on the inputs.
inline RunningStats pairwise_merge(std::vector<RunningStats> parts) {
  if (parts.empty()) return {};
  while (parts.size() > 1) {
    std::vector<RunningStats> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(RunningStats::merge(parts[i], parts[i + 1]));
    if (parts.size() % 2 == 1) next.push_back(parts.back());
    parts.swap(next);
  }
  return parts.front();
}

inline std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls body(chunk) for chunk in [0, chunks) on up to `threads` workers.
/// The first exception thrown by any chunk is rethrown after all workers finish.
template <class Body>
void parallel_for_chunks(std::size_t chunks, std::size_t threads, Body&& body) {
  threads = std::min(resolve_threads(threads), std::max<std::size_t>(chunks, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        body(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace greedyvote
