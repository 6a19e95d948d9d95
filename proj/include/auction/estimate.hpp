#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "auction/copula.hpp"
#include "auction/simulate.hpp"

namespace auction {

enum class BidFormat { Hard, Soft };  // the estimable award rules

// m(p,n): probability that a potential bidder entered, conditional on the
// auction clearing the two-bid observation rule.
double conditional_entry_mean(double p, int n);

// Solves m(p,n) = r_hat for p. n = 2 is unidentified and throws.
double invert_entry_probability(double r_hat, int n, bool clamp_out_of_range = false);

// Sample analogue of E[N*/N | N=n] inverted through m(.,n).
double estimate_entry_probability(const AuctionDataset& data, int n);

// triweight kernel (35/32)(1-u^2)^3 on [-1,1]
double triweight(double u);

// rule-of-thumb bandwidth 3.15 * sd * m^{-1/5}; the inference variant swaps
// the exponent for -1/5 + 1/17
double rot_bandwidth(const Eigen::ArrayXd& bids, bool undersmooth);

// Boundary-adaptive kernel density: plain triweight estimator away from the
// sample extremes, local-linear equivalent kernel within one bandwidth of
// them. The equivalent kernel reduces to the plain one on full support.
class BoundaryKernelDensity {
 public:
  BoundaryKernelDensity(Eigen::ArrayXd sorted_sample, double bandwidth);
  double operator()(double x) const;
  // uncorrected estimator; nonnegative fallback where the equivalent kernel's
  // negative lobe empties the corrected estimate
  double plain(double x) const;
  double bandwidth() const { return h_; }
  double sample_min() const { return x_(0); }
  double sample_max() const { return x_(x_.size() - 1); }

 private:
  Eigen::ArrayXd x_;  // ascending
  double h_;
};

// fraction of the ascending sample that is <= x
double ecdf(const Eigen::ArrayXd& sorted_sample, double x);

// Inverse bidding adjustments eta_n(p, y) with y = G(b|n); the pseudo cost is
// b - eta / ((n-1) g(b|n)).
double eta_hard(double p, double y, int n);
double eta_soft(double p, double y, int n);

// Pseudo costs for one n-cell of bids (ascending), plus the fraction of
// adjacent order-statistic inversions as a monotonicity diagnostic.
struct PseudoCosts {
  Eigen::ArrayXd values;  // aligned with the ascending bid order
  double inversion_fraction = 0.0;
};
PseudoCosts pseudo_costs(const Eigen::ArrayXd& sorted_bids, double p_hat, int n,
                         BidFormat format, const BoundaryKernelDensity& density);

// F*(v | p_n) estimate: empirical CDF of the cell's pseudo costs.
double fhat_star(const Eigen::ArrayXd& sorted_pseudo_costs, double v);

// Exact solution of min sum_j w_j (ybar_j - y_j)^2 over 0 <= y_1 <= ... <= 1
// by weighted pool-adjacent-violators plus clamping.
Eigen::ArrayXd isotonic_regression(const Eigen::ArrayXd& ybar, const Eigen::ArrayXd& w);

// Inner step of the GMM: concentrate the marginal-CDF grid out of
// sum_{n,j} (Q_{nj} - y_j)^2 W_{nj}. Rows index n-cells, columns the v-grid.
Eigen::ArrayXd isotonic_inner(const Eigen::MatrixXd& q, const Eigen::MatrixXd& w);
double gmm_objective(const Eigen::MatrixXd& q, const Eigen::MatrixXd& w,
                     const Eigen::ArrayXd& y);

struct EstimateOptions {
  BidFormat format = BidFormat::Hard;
  CopulaFamily family = CopulaFamily::Frank;
  double theta_lo = 0.1;
  double theta_hi = 20.0;
  double theta_step = 0.1;
  int bootstrap_replicates = 200;
  std::uint64_t seed = 1;
  bool undersmooth = false;
  int grid_points = 19;
  int min_bids_per_cell = 30;
};

struct CellDiagnostics {
  int n = 0;
  int auctions = 0;
  int bids = 0;
  double r_hat = 0.0;      // mean of N*/N
  double p_hat = 0.0;
  double bid_sd = 0.0;
  double bandwidth = 0.0;
  double inversion_fraction = 0.0;
};

struct EstimationResult {
  std::map<int, double> p_hat;
  double theta_hat = 0.0;
  double theta_se = 0.0;
  double rho_hat = 0.0;
  double rho_ci_lo = 0.0, rho_ci_hi = 0.0;
  Eigen::ArrayXd v_grid;
  Eigen::ArrayXd f_grid;  // averaged-Q marginal CDF at the grid
  std::map<int, double> kappa_hat;
  double support_lo = 0.0, support_hi = 0.0;  // min and max pseudo cost
  double objective = 0.0;
  double theta_tilde = 0.0;  // preliminary identity-weight estimate
  int bootstrap_replicates = 0;
  bool undersmooth = false;
  std::vector<CellDiagnostics> cells;
  std::vector<std::string> warnings;
};

// Two-step semiparametric GMM: entry probabilities from N*/N, pseudo costs
// through the estimated inverse bidding function, preliminary theta under
// identity weights, bootstrap inverse-variance weights, profiled theta search
// with an isotonic inner step, then the averaged marginal CDF and plug-in
// entry costs. Bootstrap percentiles give the theta SE and the rho CI.
EstimationResult gmm_estimate(const AuctionDataset& data, const EstimateOptions& opts);

// Estimated marginal as a grid distribution on the estimated support, for
// feeding estimates back into equilibrium and counterfactual runs. Tied or
// boundary-touching grid values are dropped to keep the knots strictly
// increasing.
ValueDistribution estimated_marginal(const EstimationResult& res);

// Diagonal GMM weights: inverse bootstrap variance of Q(Fhat*(v_j|p_n), p_n;
// theta_tilde) under auction resampling within each n-cell.
Eigen::MatrixXd bootstrap_weights(const AuctionDataset& data, int replicates,
                                  double theta_tilde, const EstimateOptions& opts,
                                  const Eigen::ArrayXd& v_grid);

}  // namespace auction
