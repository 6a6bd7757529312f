#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "greedyvote/errors.hpp"
#include "greedyvote/weights.hpp"

namespace greedyvote {

struct DensityPoint {
  double x;
  double density;
};

struct QqPoint {
  double theoretical;
  double sample;
};

namespace detail {

struct MeanSd {
  double mean;
  double sd;
};

inline MeanSd mean_sd(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = compensated_sum(xs) / n;
  CompensatedSum ss;
  for (double x : xs) ss.add((x - mean) * (x - mean));
  const double var = xs.size() > 1 ? ss.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var)};
}

}  // namespace detail

/// Silverman's rule of thumb, 1.06 sd n^{-1/5}.
inline double silverman_bandwidth(std::span<const double> samples) {
  if (samples.empty()) throw InvalidParameter("kde: samples must be non-empty");
  const double sd = detail::mean_sd(samples).sd;
  if (!(sd > 0.0)) throw InvalidParameter("kde: zero sample variance; pass an explicit bandwidth");
  return 1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2);
}

/// `points` evenly spaced values covering [min - 5h, max + 5h].
inline std::vector<double> default_grid(std::span<const double> samples, double h, std::size_t points = 512) {
  if (samples.empty()) throw InvalidParameter("kde: samples must be non-empty");
  if (points < 2) throw InvalidParameter("kde: grid needs at least two points");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const double a = *lo - 5.0 * h;
  const double b = *hi + 5.0 * h;
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

/// Gaussian-kernel density estimate evaluated on `grid`.
/// Kernels further than 10h from a grid point are skipped (their weight is below 1e-21).
inline std::vector<DensityPoint> kde_density(std::span<const double> samples, std::optional<double> bandwidth,
                                             std::span<const double> grid) {
  if (samples.empty()) throw InvalidParameter("kde: samples must be non-empty");
  double h = 0.0;
  if (bandwidth) {
    h = *bandwidth;
    if (!std::isfinite(h) || !(h > 0.0)) throw InvalidParameter("kde: bandwidth must be > 0");
  } else {
    h = silverman_bandwidth(samples);
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * M_PI));
  std::vector<DensityPoint> out;
  out.reserve(grid.size());
  for (double x : grid) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - 10.0 * h);
    const auto hi = std::upper_bound(lo, sorted.end(), x + 10.0 * h);
    CompensatedSum acc;
    for (auto it = lo; it != hi; ++it) {
      const double z = (x - *it) / h;
      acc.add(std::exp(-0.5 * z * z));
    }
    out.push_back({x, norm * acc.value()});
  }
  return out;
}

inline double trapezoid_integral(std::span<const DensityPoint> curve) {
  CompensatedSum acc;
  for (std::size_t i = 1; i < curve.size(); ++i)
    acc.add(0.5 * (curve[i].density + curve[i - 1].density) * (curve[i].x - curve[i - 1].x));
  return acc.value();
}

/// Standardized order statistics against standard normal quantiles at (i - 0.5) / n.
inline std::vector<QqPoint> qq_points(std::span<const double> samples) {
  if (samples.size() < 2) throw InvalidParameter("qq: need at least two samples");
  const auto [mean, sd] = detail::mean_sd(samples);
  if (!(sd > 0.0)) throw InvalidParameter("qq: zero sample variance");
  std::vector<double> z(samples.begin(), samples.end());
  std::sort(z.begin(), z.end());
  const boost::math::normal_distribution<double> normal;
  const double n = static_cast<double>(z.size());
  std::vector<QqPoint> out;
  out.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double q = boost::math::quantile(normal, (static_cast<double>(i) + 0.5) / n);
    out.push_back({q, (z[i] - mean) / sd});
  }
  return out;
}

}  // namespace greedyvote
