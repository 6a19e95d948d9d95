#include "auction/copula.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "auction/errors.hpp"
#include "auction/numeric.hpp"

namespace auction {

namespace {

constexpr double kFrankIndependenceCutoff = 1e-6;

void check_unit(double x, double y, const char* who) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
    throw std::domain_error(std::string(who) + ": arguments must lie in [0,1]");
}

// Frank pieces. With A := e^{-t} + e^{-t(x+y)} - e^{-tx} - e^{-ty} (negative
// for t>0 on the unit square),
//   C(x,y)   = -(1/t) [ln|A| - ln(1-e^{-t})].
// |A| factors as e^{-tx}(1-e^{-ty}) + e^{-ty}(1-e^{-t(1-y)}), all terms
// positive, so the log form below stays stable for large t.
double frank_log_abs_a(double t, double x, double y) {
  const double t1 = -t * x + std::log1p(-std::exp(-t * y));
  const double t2 = -t * y + std::log1p(-std::exp(-t * (1.0 - y)));
  const double hi = std::max(t1, t2);
  return hi + std::log(std::exp(t1 - hi) + std::exp(t2 - hi));
}

double frank_cdf(double t, double x, double y) {
  const double log_abs_d = std::log1p(-std::exp(-t));
  return -(frank_log_abs_a(t, x, y) - log_abs_d) / t;
}

// Joe pieces: a = (1-x)^t, b = (1-y)^t, T = a + b - a*b, C = 1 - T^{1/t}.
struct JoeParts {
  double a, b, big_t, lx, ly;
};

JoeParts joe_parts(double t, double x, double y) {
  JoeParts p;
  p.lx = std::log1p(-x);
  p.ly = std::log1p(-y);
  p.a = std::exp(t * p.lx);
  p.b = std::exp(t * p.ly);
  p.big_t = p.a + p.b - p.a * p.b;
  return p;
}

}  // namespace

CopulaModel CopulaModel::frank(double theta) {
  if (!(theta >= 0.0))
    throw std::domain_error("frank copula: negative dependence (theta < 0) is not supported");
  return {CopulaFamily::Frank, theta};
}

CopulaModel CopulaModel::joe(double theta) {
  if (!(theta >= 1.0)) throw std::domain_error("joe copula: requires theta >= 1");
  return {CopulaFamily::Joe, theta};
}

CopulaModel CopulaModel::make(CopulaFamily family, double theta) {
  switch (family) {
    case CopulaFamily::Independence: return independence();
    case CopulaFamily::Comonotone: return comonotone();
    case CopulaFamily::Frank: return frank(theta);
    case CopulaFamily::Joe: return joe(theta);
  }
  throw std::domain_error("unknown copula family");
}

double CopulaModel::theta() const {
  if (!has_theta()) throw std::domain_error("copula family carries no theta parameter");
  return theta_;
}

bool CopulaModel::frank_as_independence() const {
  return family_ == CopulaFamily::Frank && theta_ < kFrankIndependenceCutoff;
}

double CopulaModel::cdf(double x, double y) const {
  check_unit(x, y, "copula cdf");
  if (x == 0.0 || y == 0.0) return 0.0;
  if (x == 1.0) return y;
  if (y == 1.0) return x;
  switch (family_) {
    case CopulaFamily::Independence: return x * y;
    case CopulaFamily::Comonotone: return std::min(x, y);
    case CopulaFamily::Frank:
      if (frank_as_independence()) return x * y;
      return frank_cdf(theta_, x, y);
    case CopulaFamily::Joe: {
      if (theta_ == 1.0) return x * y;
      const JoeParts p = joe_parts(theta_, x, y);
      return 1.0 - std::exp(std::log(p.big_t) / theta_);
    }
  }
  return 0.0;
}

CopulaPartials CopulaModel::partials(double x, double y) const {
  check_unit(x, y, "copula partials");
  switch (family_) {
    case CopulaFamily::Independence: return {y, x, 1.0, 0.0, 0.0};
    case CopulaFamily::Comonotone:
      // C2 is the conditional CDF 1(x >= y); the tie goes to 1 so it stays a
      // right-continuous CDF. The mixed partials vanish off the diagonal.
      return {x <= y ? 1.0 : 0.0, x >= y ? 1.0 : 0.0, 0.0, 0.0, 0.0};
    case CopulaFamily::Frank: {
      if (frank_as_independence()) return {y, x, 1.0, 0.0, 0.0};
      const double t = theta_;
      const double ex = std::exp(-t * x);
      const double ey = std::exp(-t * y);
      const double et = std::exp(-t);
      const double abs_a = ex * (1.0 - ey) + ey * (1.0 - std::exp(-t * (1.0 - y)));
      if (abs_a <= 0.0) throw std::domain_error("frank partials: undefined at this boundary");
      const double c1 = ex * (1.0 - ey) / abs_a;
      const double c2 = ey * (1.0 - ex) / abs_a;
      const double c21 = t * ex * ey * (1.0 - et) / (abs_a * abs_a);
      const double c22 = -t * ey * (1.0 - ex) * (ex - et) / (abs_a * abs_a);
      // dC/dtheta from C = -(1/t)(ln|A| - ln|D|), with A' and D' explicit.
      const double a_val = -abs_a;
      const double d_val = et - 1.0;
      const double a_prime =
          -et - (x + y) * std::exp(-t * (x + y)) + x * ex + y * ey;
      const double d_prime = -et;
      const double log_ratio = std::log(abs_a) - std::log(1.0 - et);
      const double dtheta = log_ratio / (t * t) - (a_prime / a_val - d_prime / d_val) / t;
      return {c1, c2, c21, c22, dtheta};
    }
    case CopulaFamily::Joe: {
      if (theta_ == 1.0) return {y, x, 1.0, 0.0, 0.0};
      if (x >= 1.0 || y >= 1.0)
        throw std::domain_error("joe partials: undefined at the upper boundary");
      const double t = theta_;
      const JoeParts p = joe_parts(t, x, y);
      const double log_t = std::log(p.big_t);
      const double pow_1t_1 = std::exp((1.0 / t - 1.0) * log_t);
      const double pow_1t_2 = std::exp((1.0 / t - 2.0) * log_t);
      const double one_x = std::exp((t - 1.0) * p.lx);  // (1-x)^{t-1}
      const double one_y = std::exp((t - 1.0) * p.ly);
      const double c1 = pow_1t_1 * one_x * (1.0 - p.b);
      const double c2 = pow_1t_1 * one_y * (1.0 - p.a);
      const double c21 =
          one_x * one_y * pow_1t_2 * ((t - 1.0) * (1.0 - p.a) * (1.0 - p.b) + t * p.big_t);
      const double c22 = (t - 1.0) * (1.0 - p.a) * std::exp((t - 2.0) * p.ly) * pow_1t_2 *
                         ((1.0 - p.a) * p.b - p.big_t);
      const double t_theta = p.a * p.lx + p.b * p.ly - (p.a * p.lx * p.b + p.a * p.b * p.ly);
      const double dtheta =
          -std::exp(log_t / t) * (t_theta / (t * p.big_t) - log_t / (t * t));
      return {c1, c2, c21, c22, dtheta};
    }
  }
  throw std::domain_error("unknown copula family");
}

double CopulaModel::c2(double x, double y) const {
  switch (family_) {
    case CopulaFamily::Independence: return x;
    case CopulaFamily::Comonotone: return x >= y ? 1.0 : 0.0;
    case CopulaFamily::Frank: {
      if (frank_as_independence()) return x;
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      const double t = theta_;
      const double ex = std::exp(-t * x);
      const double ey = std::exp(-t * y);
      const double abs_a = ex * (1.0 - ey) + ey * (1.0 - std::exp(-t * (1.0 - y)));
      return ey * (1.0 - ex) / abs_a;
    }
    case CopulaFamily::Joe: {
      if (theta_ == 1.0) return x;
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      const JoeParts p = joe_parts(theta_, x, y);
      return std::exp((1.0 / theta_ - 1.0) * std::log(p.big_t) + (theta_ - 1.0) * p.ly) *
             (1.0 - p.a);
    }
  }
  throw std::domain_error("unknown copula family");
}

double CopulaModel::q_inverse(double z, double y) const {
  if (!(y > 0.0 && y <= 1.0)) throw std::domain_error("q_inverse: y must lie in (0,1]");
  if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("q_inverse: z must lie in [0,1]");
  switch (family_) {
    case CopulaFamily::Independence: return z;
    case CopulaFamily::Comonotone: return z * y;  // C(x,y)/y = x/y below the kink
    default: break;
  }
  if (frank_as_independence()) return z;
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double x = bisect([&](double xx) { return cdf(xx, y) / y - z; }, 0.0, 1.0, 1e-10);
  if (std::abs(cdf(x, y) / y - z) > 1e-7)
    throw NumericError("q_inverse: bisection residual exceeds tolerance");
  return x;
}

double CopulaModel::c2_inverse(double u, double s) const {
  if (!(u > 0.0 && u < 1.0 && s > 0.0 && s < 1.0))
    throw std::domain_error("c2_inverse: arguments must lie in (0,1)");
  switch (family_) {
    case CopulaFamily::Independence: return u;
    case CopulaFamily::Comonotone: return s;  // cost rank pinned to the signal rank
    case CopulaFamily::Frank: {
      if (frank_as_independence()) return u;
      const double t = theta_;
      const double ey = std::exp(-t * s);
      const double tail = ey * (1.0 - std::exp(-t * (1.0 - s)));
      // C2(x,s) = ey(1-e^{-tx}) / (e^{-tx}(1-ey) + tail), solved for x in closed
      // form would be possible, but bisection is uniform across families.
      double lo = 0.0, hi = 1.0;
      for (int i = 0; i < 60 && (hi - lo) > 1e-10; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double ex = std::exp(-t * mid);
        const double val = ey * (1.0 - ex) / (ex * (1.0 - ey) + tail);
        (val < u ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    case CopulaFamily::Joe: {
      if (theta_ == 1.0) return u;
      double lo = 0.0, hi = 1.0;
      for (int i = 0; i < 60 && (hi - lo) > 1e-10; ++i) {
        const double mid = 0.5 * (lo + hi);
        (c2(mid, s) < u ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  throw std::domain_error("unknown copula family");
}

double CopulaModel::spearman_rho() const {
  switch (family_) {
    case CopulaFamily::Independence: return 0.0;
    case CopulaFamily::Comonotone: return 1.0;
    default: break;
  }
  // magic-static init: spearman_rho is called from worker threads
  static const std::pair<Eigen::ArrayXd, Eigen::ArrayXd> rule = [] {
    Eigen::ArrayXd nodes, weights;
    gauss_legendre(64, nodes, weights);
    return std::make_pair(nodes, weights);
  }();
  const Eigen::ArrayXd& nodes = rule.first;
  const Eigen::ArrayXd& weights = rule.second;
  double acc = 0.0;
  for (int i = 0; i < nodes.size(); ++i) {
    double row = 0.0;
    for (int j = 0; j < nodes.size(); ++j) row += weights(j) * cdf(nodes(i), nodes(j));
    acc += weights(i) * row;
  }
  return 12.0 * acc - 3.0;
}

double theta_from_rho(CopulaFamily family, double rho) {
  if (family != CopulaFamily::Frank && family != CopulaFamily::Joe)
    throw std::domain_error("theta_from_rho: only Frank and Joe carry a theta");
  const double lo = family == CopulaFamily::Frank ? 1e-6 : 1.0 + 1e-9;
  const double hi = 250.0;
  const double rho_lo = CopulaModel::make(family, lo).spearman_rho();
  const double rho_hi = CopulaModel::make(family, hi).spearman_rho();
  if (!(rho >= rho_lo && rho <= rho_hi))
    throw NumericError("theta_from_rho: requested rho outside the attainable range");
  return bisect(
      [&](double t) { return CopulaModel::make(family, t).spearman_rho() - rho; }, lo, hi, 1e-9);
}

std::string family_name(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Independence: return "independence";
    case CopulaFamily::Comonotone: return "comonotone";
    case CopulaFamily::Frank: return "frank";
    case CopulaFamily::Joe: return "joe";
  }
  return "unknown";
}

CopulaFamily family_from_name(const std::string& name) {
  if (name == "independence") return CopulaFamily::Independence;
  if (name == "comonotone") return CopulaFamily::Comonotone;
  if (name == "frank") return CopulaFamily::Frank;
  if (name == "joe") return CopulaFamily::Joe;
  throw ConfigError("unknown copula family: " + name);
}

}  // namespace auction
