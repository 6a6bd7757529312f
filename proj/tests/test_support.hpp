#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cstddef>
#include <vector>

namespace greedyvote::testing {

struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
  double critical = 0.0;  // upper quantile at the requested level
  bool passes() const { return statistic < critical; }
};

/// Goodness of fit of observed counts against probabilities. Cells whose expected count is
/// below `min_expected` are pooled (together with any mass not covered by `probs`).
inline ChiSquare chi_square_gof(const std::vector<double>& observed, const std::vector<double>& probs, double n,
                                double level = 0.01, double min_expected = 5.0) {
  ChiSquare out;
  double pooled_obs = 0.0, pooled_exp = 0.0, covered_obs = 0.0, covered_prob = 0.0;
  std::size_t cells = 0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    const double e = probs[c] * n;
    covered_obs += observed[c];
    covered_prob += probs[c];
    if (e < min_expected) {
      pooled_obs += observed[c];
      pooled_exp += e;
      continue;
    }
    out.statistic += (observed[c] - e) * (observed[c] - e) / e;
    ++cells;
  }
  pooled_obs += n - covered_obs;
  pooled_exp += (1.0 - covered_prob) * n;
  if (pooled_exp >= min_expected) {
    out.statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  } else if (cells > 0) {
    // Too little pooled mass to form its own cell; observed pooled counts must still be rare.
    out.statistic += pooled_obs > 10.0 * (pooled_exp + 1.0) ? 1e9 : 0.0;
  }
  out.dof = cells > 1 ? cells - 1 : 1;
  out.critical = boost::math::quantile(boost::math::complement(boost::math::chi_squared(static_cast<double>(out.dof)), level));
  return out;
}

/// Two-sample chi-square on histograms with equal totals; sparse cells are pooled.
inline ChiSquare chi_square_two_sample(const std::vector<double>& a, const std::vector<double>& b, double level = 0.01,
                                       double min_cell = 10.0) {
  ChiSquare out;
  double pa = 0.0, pb = 0.0;
  std::size_t cells = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c] + b[c] < min_cell) {
      pa += a[c];
      pb += b[c];
      continue;
    }
    out.statistic += (a[c] - b[c]) * (a[c] - b[c]) / (a[c] + b[c]);
    ++cells;
  }
  if (pa + pb > 0.0) {
    out.statistic += (pa - pb) * (pa - pb) / (pa + pb);
    ++cells;
  }
  out.dof = cells > 1 ? cells - 1 : 1;
  out.critical = boost::math::quantile(boost::math::complement(boost::math::chi_squared(static_cast<double>(out.dof)), level));
  return out;
}

}  // namespace greedyvote::testing
