#pragma once

#include <Eigen/Core>
#include <string>

#include "auction/numeric.hpp"

namespace auction {

enum class MarginalKind { Uniform, ScaledBeta, GridMonotone };

// Marginal private-cost law F on a compact support [lower, upper]. Costs are
// fractions of the engineer's estimate throughout. Parametric kinds drive
// simulation designs; GridMonotone carries estimated CDFs back into the
// equilibrium machinery via shape-preserving interpolation.
class ValueDistribution {
 public:
  static ValueDistribution uniform(double lower, double upper);
  static ValueDistribution scaled_beta(double alpha, double beta, double lower, double upper);
  static ValueDistribution grid_monotone(const Eigen::ArrayXd& v, const Eigen::ArrayXd& F);
  static ValueDistribution grid_from_csv(const std::string& path);

  double cdf(double v) const;
  double pdf(double v) const;
  double quantile(double u) const;

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  MarginalKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  // smallest density seen on a fine support grid; a value near zero breaks
  // the bounded-below requirement and construction warns once on stderr
  double min_density() const { return min_density_; }
  bool density_floor_ok() const { return min_density_ >= kDensityFloor; }

  void grid_to_csv(const std::string& path) const;
  const Eigen::ArrayXd& grid_v() const;
  const Eigen::ArrayXd& grid_f() const;

  static constexpr double kDensityFloor = 1e-8;

 private:
  ValueDistribution(MarginalKind kind, double lower, double upper);
  void scan_density();
  double unit_cdf(double x) const;   // CDF on the unit interval for Beta
  double unit_pdf(double x) const;

  MarginalKind kind_;
  double lower_, upper_;
  double alpha_ = 0.0, beta_ = 0.0;
  MonotoneCubic interp_;   // GridMonotone only
  Eigen::ArrayXd knots_v_, knots_f_;
  double min_density_ = 0.0;
};

}  // namespace auction
