#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "auction/errors.hpp"

namespace auction {

namespace detail {
// Gauss(7)/Kronrod(15) nodes on [0,1]-half, {abscissa, G7 weight, K15 weight}.
inline constexpr double kGk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

template <class Func>
double gk15_panel(const Func& f, double a, double b, double& err) {
  const double c = 0.5 * (a + b);
  const double m = b - c;
  const double y0 = f(c);
  double g7 = kGk15[0][1] * y0;
  double k15 = kGk15[0][2] * y0;
  for (int i = 1; i < 8; ++i) {
    const double dx = m * kGk15[i][0];
    const double yi = f(c + dx) + f(c - dx);
    g7 += kGk15[i][1] * yi;
    k15 += kGk15[i][2] * yi;
  }
  g7 *= m;
  k15 *= m;
  err = std::abs(g7 - k15);
  return k15;
}
}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over [a,b]. Panels are split until
// the local error estimate meets rel_tol (against the running total) or
// abs_tol. Smooth integrands finish in one or two panels.
template <class Func>
double integrate(const Func& f, double a, double b, double rel_tol = 1e-9,
                 double abs_tol = 1e-14, int max_panels = 4000) {
  if (a == b) return 0.0;
  struct Panel {
    double a, b, value, error;
  };
  std::vector<Panel> stack;
  stack.reserve(64);
  double err0;
  double v0 = detail::gk15_panel(f, a, b, err0);
  stack.push_back({a, b, v0, err0});
  double total = v0;
  double sum = 0.0;
  int panels = 1;
  while (!stack.empty()) {
    Panel top = stack.back();
    stack.pop_back();
    if (top.error <= rel_tol * std::abs(total) || top.error <= abs_tol ||
        (top.b - top.a) <= std::abs(top.a + top.b) * 1e-15) {
      sum += top.value;
      continue;
    }
    if (panels >= max_panels)
      throw NumericError("integrate: panel budget exhausted before tolerance was met");
    const double mid = 0.5 * (top.a + top.b);
    double el, er;
    const double vl = detail::gk15_panel(f, top.a, mid, el);
    const double vr = detail::gk15_panel(f, mid, top.b, er);
    total += vl + vr - top.value;
    panels += 2;
    stack.push_back({top.a, mid, vl, el});
    stack.push_back({mid, top.b, vr, er});
  }
  return sum;
}

// Integrate across known interior breakpoints (kinks or jumps of f).
template <class Func>
double integrate_segments(const Func& f, double a, double b, const std::vector<double>& breaks,
                          double rel_tol = 1e-9, double abs_tol = 1e-14) {
  double sum = 0.0;
  double left = a;
  for (double t : breaks) {
    if (t <= left || t >= b) continue;
    sum += integrate(f, left, t, rel_tol, abs_tol);
    left = t;
  }
  sum += integrate(f, left, b, rel_tol, abs_tol);
  return sum;
}

// n-point Gauss-Legendre rule mapped to [0,1].
void gauss_legendre(int n, Eigen::ArrayXd& nodes, Eigen::ArrayXd& weights);

// Bisection on [lo,hi]; f(lo) and f(hi) must have opposite signs (zero allowed).
template <class Func>
double bisect(const Func& f, double lo, double hi, double x_tol = 1e-10, int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw NumericError("bisect: root not bracketed");
  for (int i = 0; i < max_iter && (hi - lo) > x_tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (fhi > 0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

// Golden-section minimizer on [lo,hi] for a unimodal f.
template <class Func>
double golden_min(const Func& f, double lo, double hi, double x_tol = 1e-7) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > x_tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

// Shape-preserving piecewise-cubic interpolant (Fritsch-Butland slopes).
// Monotone data give a monotone interpolant with a nonnegative derivative,
// which is what the grid marginals and tabulated bid curves need.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

  double operator()(double x) const;
  double derivative(double x) const;
  // inverse of a strictly increasing interpolant
  double inverse(double y, double x_tol = 1e-12) const;

  double x_min() const { return x_(0); }
  double x_max() const { return x_(x_.size() - 1); }
  double y_min() const { return y_(0); }
  double y_max() const { return y_(y_.size() - 1); }

 private:
  int interval(double x) const;
  Eigen::ArrayXd x_, y_, d_;
};

}  // namespace auction
