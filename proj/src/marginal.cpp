#include "auction/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "auction/errors.hpp"

namespace auction {

namespace {

// Regularized incomplete beta via the Lentz continued fraction.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction failed to converge");
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

ValueDistribution::ValueDistribution(MarginalKind kind, double lower, double upper)
    : kind_(kind), lower_(lower), upper_(upper) {
  if (!(upper > lower)) throw ConfigError("value distribution: upper must exceed lower");
}

ValueDistribution ValueDistribution::uniform(double lower, double upper) {
  ValueDistribution d(MarginalKind::Uniform, lower, upper);
  d.min_density_ = 1.0 / (upper - lower);
  return d;
}

ValueDistribution ValueDistribution::scaled_beta(double alpha, double beta, double lower,
                                                 double upper) {
  if (!(alpha > 0.0 && beta > 0.0))
    throw ConfigError("scaled beta: shape parameters must be positive");
  ValueDistribution d(MarginalKind::ScaledBeta, lower, upper);
  d.alpha_ = alpha;
  d.beta_ = beta;
  d.scan_density();
  return d;
}

ValueDistribution ValueDistribution::grid_monotone(const Eigen::ArrayXd& v,
                                                   const Eigen::ArrayXd& F) {
  if (v.size() < 2 || v.size() != F.size())
    throw ConfigError("grid marginal: need >= 2 matching (v,F) knots");
  for (int i = 0; i + 1 < v.size(); ++i)
    if (!(v(i + 1) > v(i) && F(i + 1) > F(i)))
      throw ConfigError("grid marginal: knots must be strictly increasing in v and F");
  if (std::abs(F(0)) > 1e-9 || std::abs(F(F.size() - 1) - 1.0) > 1e-9)
    throw ConfigError("grid marginal: F must run from 0 to 1 over the support");
  ValueDistribution d(MarginalKind::GridMonotone, v(0), v(v.size() - 1));
  Eigen::ArrayXd f = F;
  f(0) = 0.0;
  f(F.size() - 1) = 1.0;
  d.knots_v_ = v;
  d.knots_f_ = f;
  d.interp_ = MonotoneCubic(v, f);
  d.scan_density();
  return d;
}

void ValueDistribution::scan_density() {
  // interior midpoints: shapes like Beta(2,2) vanish exactly at the support
  // edges without breaking anything downstream
  constexpr int kScan = 512;
  double lo = 1e300;
  for (int i = 0; i < kScan; ++i) {
    const double v = lower_ + (upper_ - lower_) * (i + 0.5) / kScan;
    lo = std::min(lo, pdf(v));
  }
  min_density_ = lo;
  if (!(lo >= kDensityFloor))
    std::cerr << "warning: marginal density falls to " << lo
              << " on its support; the bounded-below assumption is violated\n";
}

double ValueDistribution::unit_cdf(double x) const { return reg_inc_beta(alpha_, beta_, x); }

double ValueDistribution::unit_pdf(double x) const {
  if (x <= 0.0 || x >= 1.0) {
    // one-sided limits; infinite-endpoint shapes are reported as a large value
    x = std::clamp(x, 1e-12, 1.0 - 1e-12);
  }
  const double ln_b = std::lgamma(alpha_ + beta_) - std::lgamma(alpha_) - std::lgamma(beta_);
  return std::exp(ln_b + (alpha_ - 1.0) * std::log(x) + (beta_ - 1.0) * std::log1p(-x));
}

double ValueDistribution::cdf(double v) const {
  if (v < lower_ - 1e-12 || v > upper_ + 1e-12)
    throw std::domain_error("marginal cdf: argument outside the support");
  v = std::clamp(v, lower_, upper_);
  switch (kind_) {
    case MarginalKind::Uniform: return (v - lower_) / (upper_ - lower_);
    case MarginalKind::ScaledBeta: return unit_cdf((v - lower_) / (upper_ - lower_));
    case MarginalKind::GridMonotone: return std::clamp(interp_(v), 0.0, 1.0);
  }
  return 0.0;
}

double ValueDistribution::pdf(double v) const {
  if (v < lower_ - 1e-12 || v > upper_ + 1e-12)
    throw std::domain_error("marginal pdf: argument outside the support");
  v = std::clamp(v, lower_, upper_);
  const double scale = upper_ - lower_;
  switch (kind_) {
    case MarginalKind::Uniform: return 1.0 / scale;
    case MarginalKind::ScaledBeta: return unit_pdf((v - lower_) / scale) / scale;
    case MarginalKind::GridMonotone: return std::max(0.0, interp_.derivative(v));
  }
  return 0.0;
}

double ValueDistribution::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("quantile: u must lie in [0,1]");
  if (u == 0.0) return lower_;
  if (u == 1.0) return upper_;
  switch (kind_) {
    case MarginalKind::Uniform: return lower_ + u * (upper_ - lower_);
    case MarginalKind::ScaledBeta: {
      const double x =
          bisect([&](double t) { return unit_cdf(t) - u; }, 0.0, 1.0, 1e-13);
      return lower_ + x * (upper_ - lower_);
    }
    case MarginalKind::GridMonotone: return interp_.inverse(u);
  }
  return lower_;
}

const Eigen::ArrayXd& ValueDistribution::grid_v() const {
  if (kind_ != MarginalKind::GridMonotone)
    throw std::domain_error("grid knots only exist for grid marginals");
  return knots_v_;
}

const Eigen::ArrayXd& ValueDistribution::grid_f() const {
  if (kind_ != MarginalKind::GridMonotone)
    throw std::domain_error("grid knots only exist for grid marginals");
  return knots_f_;
}

ValueDistribution ValueDistribution::grid_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open marginal CSV: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("v,F", 0) != 0)
    throw ConfigError("marginal CSV must start with a 'v,F' header: " + path);
  std::vector<double> vs, fs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b))
      throw ConfigError("marginal CSV: malformed row at line " + std::to_string(line_no));
    vs.push_back(std::stod(a));
    fs.push_back(std::stod(b));
  }
  Eigen::ArrayXd v = Eigen::Map<Eigen::ArrayXd>(vs.data(), vs.size());
  Eigen::ArrayXd f = Eigen::Map<Eigen::ArrayXd>(fs.data(), fs.size());
  return grid_monotone(v, f);
}

void ValueDistribution::grid_to_csv(const std::string& path) const {
  const Eigen::ArrayXd& v = grid_v();
  const Eigen::ArrayXd& f = grid_f();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write marginal CSV: " + path);
  out << "v,F\n";
  char buf[64];
  for (int i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", v(i), f(i));
    out << buf;
  }
}

}  // namespace auction
