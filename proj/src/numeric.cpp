#include "auction/numeric.hpp"

#include <algorithm>

namespace auction {

void gauss_legendre(int n, Eigen::ArrayXd& nodes, Eigen::ArrayXd& weights) {
  // Newton iteration on Legendre polynomials, symmetric pairs; standard gauleg.
  nodes.resize(n);
  weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p0 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    // map from [-1,1] to [0,1]
    nodes(i) = 0.5 * (1.0 - z);
    nodes(n - 1 - i) = 0.5 * (1.0 + z);
    const double w = 1.0 / ((1.0 - z * z) * pp * pp);
    weights(i) = w;
    weights(n - 1 - i) = w;
  }
}

MonotoneCubic::MonotoneCubic(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) : x_(x), y_(y) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || y.size() != n) throw NumericError("MonotoneCubic: need >= 2 matching knots");
  for (int i = 0; i + 1 < n; ++i)
    if (!(x(i + 1) > x(i))) throw NumericError("MonotoneCubic: abscissae must increase");
  Eigen::ArrayXd h(n - 1), delta(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    h(i) = x(i + 1) - x(i);
    delta(i) = (y(i + 1) - y(i)) / h(i);
  }
  d_.resize(n);
  // three-point endpoint slopes with the usual monotonicity clamps
  const auto edge_slope = [](double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return d;
  };
  d_(0) = n == 2 ? delta(0) : edge_slope(h(0), h(1), delta(0), delta(1));
  d_(n - 1) = n == 2 ? delta(n - 2)
                     : edge_slope(h(n - 2), h(n - 3), delta(n - 2), delta(n - 3));
  for (int i = 1; i + 1 < n; ++i) {
    if (delta(i - 1) * delta(i) <= 0.0) {
      d_(i) = 0.0;
    } else {
      const double w1 = 2.0 * h(i) + h(i - 1);
      const double w2 = h(i) + 2.0 * h(i - 1);
      d_(i) = (w1 + w2) / (w1 / delta(i - 1) + w2 / delta(i));
    }
  }
}

int MonotoneCubic::interval(double x) const {
  const int n = static_cast<int>(x_.size());
  const double* begin = x_.data();
  int k = static_cast<int>(std::upper_bound(begin, begin + n, x) - begin) - 1;
  return std::clamp(k, 0, n - 2);
}

double MonotoneCubic::operator()(double x) const {
  x = std::clamp(x, x_min(), x_max());
  const int k = interval(x);
  const double h = x_(k + 1) - x_(k);
  const double t = (x - x_(k)) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * y_(k) + h10 * h * d_(k) + h01 * y_(k + 1) + h11 * h * d_(k + 1);
}

double MonotoneCubic::derivative(double x) const {
  x = std::clamp(x, x_min(), x_max());
  const int k = interval(x);
  const double h = x_(k + 1) - x_(k);
  const double t = (x - x_(k)) / h;
  const double g00 = 6 * t * t - 6 * t;
  const double g10 = 3 * t * t - 4 * t + 1;
  const double g01 = -6 * t * t + 6 * t;
  const double g11 = 3 * t * t - 2 * t;
  return g00 * y_(k) / h + g10 * d_(k) + g01 * y_(k + 1) / h + g11 * d_(k + 1);
}

double MonotoneCubic::inverse(double y, double x_tol) const {
  if (y <= y_min()) return x_min();
  if (y >= y_max()) return x_max();
  const int n = static_cast<int>(y_.size());
  const double* begin = y_.data();
  int k = static_cast<int>(std::upper_bound(begin, begin + n, y) - begin) - 1;
  k = std::clamp(k, 0, n - 2);
  return bisect([&](double x) { return (*this)(x)-y; }, x_(k), x_(k + 1), x_tol);
}

}  // namespace auction
