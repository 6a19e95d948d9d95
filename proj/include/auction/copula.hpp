#pragma once

#include <string>

namespace auction {

enum class CopulaFamily { Independence, Comonotone, Frank, Joe };

struct CopulaPartials {
  double c1;      // dC/dx
  double c2;      // dC/dy, the conditional CDF of x given the signal y
  double c21;     // d2C/dxdy, the copula density
  double c22;     // d2C/dy2, negative under the good-news property
  double dtheta;  // dC/dtheta, nonnegative for positively ordered families
};

// One-parameter dependence family between the cost rank and the signal rank.
// Frank and Joe are the estimable families; Independence and Comonotone are
// the uninformative and perfectly-informative limits.
class CopulaModel {
 public:
  static CopulaModel independence() { return {CopulaFamily::Independence, 0.0}; }
  static CopulaModel comonotone() { return {CopulaFamily::Comonotone, 0.0}; }
  static CopulaModel frank(double theta);
  static CopulaModel joe(double theta);
  static CopulaModel make(CopulaFamily family, double theta);

  CopulaFamily family() const { return family_; }
  double theta() const;
  bool has_theta() const {
    return family_ == CopulaFamily::Frank || family_ == CopulaFamily::Joe;
  }
  CopulaModel with_theta(double theta) const { return make(family_, theta); }

  double cdf(double x, double y) const;
  CopulaPartials partials(double x, double y) const;
  double c2(double x, double y) const;

  // x solving C(x,y)/y = z, the Q-inverse of the identification equations.
  double q_inverse(double z, double y) const;

  // x solving C2(x,s) = u; inverse conditional CDF used to draw costs.
  double c2_inverse(double u, double s) const;

  // rho = 12 * int C(u,v) du dv - 3, by 64x64 tensor Gauss-Legendre.
  double spearman_rho() const;

 private:
  CopulaModel(CopulaFamily f, double t) : family_(f), theta_(t) {}
  bool frank_as_independence() const;

  CopulaFamily family_;
  double theta_;
};

// Inverse of the monotone map theta -> spearman_rho, by bisection.
double theta_from_rho(CopulaFamily family, double rho);

std::string family_name(CopulaFamily f);
CopulaFamily family_from_name(const std::string& name);

}  // namespace auction
