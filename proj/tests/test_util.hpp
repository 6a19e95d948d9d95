#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testutil {

// Kolmogorov distance between a sample and a reference CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double m = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    worst = std::max(worst, std::abs(f - (i + 1) / m));
    worst = std::max(worst, std::abs(f - i / m));
  }
  return worst;
}

// Wilson-Hilferty approximation to the chi-square 99th percentile.
inline double chi2_crit_1pct(int df) {
  const double z = 2.3263478740408408;
  const double a = 2.0 / (9.0 * df);
  const double t = 1.0 - a + z * std::sqrt(a);
  return df * t * t * t;
}

// Exact minimizer of sum w_j (ybar_j - y_j)^2 over monotone y in [0,1]^J by
// enumerating consecutive-block partitions (J <= ~16); each block takes its
// clamped weighted mean. Independent of the PAVA code path.
inline Eigen::ArrayXd isotonic_bruteforce(const Eigen::ArrayXd& ybar, const Eigen::ArrayXd& w) {
  const int j = static_cast<int>(ybar.size());
  Eigen::ArrayXd best;
  double best_obj = 1e300;
  const int cuts = 1 << (j - 1);
  for (int mask = 0; mask < cuts; ++mask) {
    Eigen::ArrayXd y(j);
    int start = 0;
    bool feasible = true;
    double prev = -1.0;
    for (int k = 0; k < j; ++k) {
      const bool boundary = k == j - 1 || (mask >> k) & 1;
      if (!boundary) continue;
      double num = 0.0, den = 0.0;
      for (int t = start; t <= k; ++t) {
        num += w(t) * ybar(t);
        den += w(t);
      }
      const double val = std::clamp(num / den, 0.0, 1.0);
      if (val < prev - 1e-15) {
        feasible = false;
        break;
      }
      for (int t = start; t <= k; ++t) y(t) = val;
      prev = val;
      start = k + 1;
    }
    if (!feasible) continue;
    const double obj = (w * (ybar - y).square()).sum();
    if (obj < best_obj) {
      best_obj = obj;
      best = y;
    }
  }
  return best;
}

}  // namespace testutil
