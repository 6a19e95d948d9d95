#include "auction/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "auction/errors.hpp"
#include "auction/numeric.hpp"
#include "auction/parallel.hpp"
#include "auction/rng.hpp"

namespace auction {

double conditional_entry_mean(double p, int n) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("conditional_entry_mean: p in [0,1]");
  if (n < 2) throw std::domain_error("conditional_entry_mean: n >= 2");
  if (p == 0.0) return 2.0 / n;  // continuous limit as entry vanishes
  const double l = std::log1p(-p);
  const double num = p * (-std::expm1((n - 1) * l));
  const double den = -std::expm1(n * l) - n * p * std::exp((n - 1) * l);
  return num / den;
}

double invert_entry_probability(double r_hat, int n, bool clamp_out_of_range) {
  if (n == 2)
    throw UnidentifiedError(
        "entry probability with n=2 is unidentified: both bidders must enter for the "
        "auction to be observed");
  if (n < 2) throw std::domain_error("invert_entry_probability: n >= 3 required");
  constexpr double kEdge = 1e-9;
  if (r_hat >= 1.0 - 1e-12) {
    if (r_hat > 1.0 + 1e-9 && !clamp_out_of_range)
      throw NumericError("invert_entry_probability: mean N*/N above 1");
    return 1.0;
  }
  const double floor = conditional_entry_mean(kEdge, n);
  if (r_hat <= floor) {
    if (clamp_out_of_range) return kEdge;
    throw NumericError("invert_entry_probability: mean N*/N below the attainable range");
  }
  return bisect([&](double p) { return conditional_entry_mean(p, n) - r_hat; }, kEdge,
                1.0 - kEdge, 1e-12);
}

double estimate_entry_probability(const AuctionDataset& data, int n) {
  double sum = 0.0;
  long count = 0;
  for (const AuctionRecord& rec : data.records) {
    if (rec.n != n) continue;
    sum += static_cast<double>(rec.n_active) / rec.n;
    ++count;
  }
  if (count == 0)
    throw ConfigError("estimate_entry_probability: no auctions with n = " + std::to_string(n));
  return invert_entry_probability(sum / count, n);
}

double triweight(double u) {
  if (u <= -1.0 || u >= 1.0) return 0.0;
  const double t = 1.0 - u * u;
  return (35.0 / 32.0) * t * t * t;
}

double rot_bandwidth(const Eigen::ArrayXd& bids, bool undersmooth) {
  const long m = bids.size();
  if (m < 2) throw NumericError("rot_bandwidth: need at least two observations");
  const double mean = bids.mean();
  const double sd = std::sqrt((bids - mean).square().sum() / (m - 1));
  const double expo = undersmooth ? (-1.0 / 5.0 + 1.0 / 17.0) : (-1.0 / 5.0);
  return 3.15 * sd * std::pow(static_cast<double>(m), expo);
}

namespace {

// antiderivative of u^k (35/32)(1-u^2)^3 for k = 0,1,2
double triweight_moment_prim(int k, double t) {
  const double t1 = std::pow(t, k + 1) / (k + 1);
  const double t3 = std::pow(t, k + 3) / (k + 3);
  const double t5 = std::pow(t, k + 5) / (k + 5);
  const double t7 = std::pow(t, k + 7) / (k + 7);
  return (35.0 / 32.0) * (t1 - 3.0 * t3 + 3.0 * t5 - t7);
}

double triweight_moment(int k, double a, double b) {
  return triweight_moment_prim(k, b) - triweight_moment_prim(k, a);
}

}  // namespace

BoundaryKernelDensity::BoundaryKernelDensity(Eigen::ArrayXd sorted_sample, double bandwidth)
    : x_(std::move(sorted_sample)), h_(bandwidth) {
  if (x_.size() < 2) throw NumericError("kernel density: need at least two observations");
  if (!(h_ > 0.0)) throw NumericError("kernel density: bandwidth must be positive");
  for (long i = 0; i + 1 < x_.size(); ++i)
    if (x_(i) > x_(i + 1)) throw NumericError("kernel density: sample must be sorted");
}

double BoundaryKernelDensity::operator()(double x) const {
  const long m = x_.size();
  const double a = std::max(-1.0, (x - sample_max()) / h_);
  const double b = std::min(1.0, (x - sample_min()) / h_);
  if (!(b - a > 1e-12)) return 0.0;
  const double s0 = triweight_moment(0, a, b);
  const double s1 = triweight_moment(1, a, b);
  const double s2 = triweight_moment(2, a, b);
  const double denom = s0 * s2 - s1 * s1;
  if (!(denom > 0.0)) return 0.0;
  // only data within one bandwidth contribute
  const double* first = x_.data();
  const double* last = first + m;
  const double* lo = std::lower_bound(first, last, x - h_);
  const double* hi = std::upper_bound(first, last, x + h_);
  double acc = 0.0;
  for (const double* it = lo; it != hi; ++it) {
    const double u = (x - *it) / h_;
    acc += (s2 - s1 * u) * triweight(u);
  }
  return acc / (denom * m * h_);
}

double BoundaryKernelDensity::plain(double x) const {
  const long m = x_.size();
  const double* first = x_.data();
  const double* last = first + m;
  const double* lo = std::lower_bound(first, last, x - h_);
  const double* hi = std::upper_bound(first, last, x + h_);
  double acc = 0.0;
  for (const double* it = lo; it != hi; ++it) acc += triweight((x - *it) / h_);
  return acc / (m * h_);
}

double ecdf(const Eigen::ArrayXd& sorted_sample, double x) {
  const double* first = sorted_sample.data();
  const double* last = first + sorted_sample.size();
  return static_cast<double>(std::upper_bound(first, last, x) - first) / sorted_sample.size();
}

double eta_hard(double p, double y, int n) {
  if (!(p > 0.0 && p <= 1.0) || !(y >= 0.0 && y <= 1.0))
    throw std::domain_error("eta_hard: p in (0,1], y in [0,1]");
  const double t = 1.0 - p * y;
  const double none = std::pow(1.0 - p, n - 1);
  if (none == 0.0) return t / p;
  return (t - none / std::pow(std::max(t, 1e-300), n - 2)) / p;
}

double eta_soft(double p, double y, int n) {
  if (!(p > 0.0 && p <= 1.0) || !(y >= 0.0 && y <= 1.0))
    throw std::domain_error("eta_soft: p in (0,1], y in [0,1]");
  const double t = std::max(1.0 - p * y, 1e-300);
  const double none = std::pow(1.0 - p, n - 1);
  const double num = std::pow(t, n - 1) - none * y;
  const double den = (n - 1) * p * std::pow(t, n - 2) + none;
  return (n - 1) * num / den;
}

PseudoCosts pseudo_costs(const Eigen::ArrayXd& sorted_bids, double p_hat, int n,
                         BidFormat format, const BoundaryKernelDensity& density) {
  constexpr double kDensityFloor = 1e-8;
  const long m = sorted_bids.size();
  PseudoCosts out;
  out.values.resize(m);
  for (long k = 0; k < m; ++k) {
    const double b = sorted_bids(k);
    const double y = ecdf(sorted_bids, b);
    double g = density(b);
    // the local-linear correction can turn negative at a boundary point over a
    // data gap; the plain estimate is positive at any observed bid
    if (!(g >= kDensityFloor)) g = density.plain(b);
    if (!(g >= kDensityFloor))
      throw NumericError("pseudo_costs: bid density underflow, bid outside effective support");
    const double eta =
        format == BidFormat::Hard ? eta_hard(p_hat, y, n) : eta_soft(p_hat, y, n);
    out.values(k) = b - eta / ((n - 1) * g);
  }
  long inversions = 0;
  for (long k = 0; k + 1 < m; ++k)
    if (out.values(k + 1) < out.values(k)) ++inversions;
  out.inversion_fraction = m > 1 ? static_cast<double>(inversions) / (m - 1) : 0.0;
  return out;
}

double fhat_star(const Eigen::ArrayXd& sorted_pseudo_costs, double v) {
  return ecdf(sorted_pseudo_costs, v);
}

Eigen::ArrayXd isotonic_regression(const Eigen::ArrayXd& ybar, const Eigen::ArrayXd& w) {
  const long j = ybar.size();
  if (w.size() != j) throw NumericError("isotonic_regression: mismatched sizes");
  for (long k = 0; k < j; ++k)
    if (!(w(k) > 0.0)) throw NumericError("isotonic_regression: degenerate zero weight");
  // weighted pool-adjacent-violators over a block stack
  std::vector<double> value(j), weight(j);
  std::vector<long> size(j);
  long top = 0;
  for (long k = 0; k < j; ++k) {
    value[top] = ybar(k);
    weight[top] = w(k);
    size[top] = 1;
    ++top;
    while (top > 1 && value[top - 2] >= value[top - 1]) {
      const double wsum = weight[top - 2] + weight[top - 1];
      value[top - 2] = (weight[top - 2] * value[top - 2] + weight[top - 1] * value[top - 1]) / wsum;
      weight[top - 2] = wsum;
      size[top - 2] += size[top - 1];
      --top;
    }
  }
  Eigen::ArrayXd y(j);
  long pos = 0;
  for (long blk = 0; blk < top; ++blk)
    for (long rep = 0; rep < size[blk]; ++rep) y(pos++) = value[blk];
  // common box bounds clip without breaking optimality of the separable problem
  return y.min(1.0).max(0.0);
}

Eigen::ArrayXd isotonic_inner(const Eigen::MatrixXd& q, const Eigen::MatrixXd& w) {
  const long j = q.cols();
  Eigen::ArrayXd ybar(j), wsum(j);
  for (long c = 0; c < j; ++c) {
    const double ws = w.col(c).sum();
    if (!(ws > 0.0)) throw NumericError("isotonic_inner: zero total weight at a grid point");
    wsum(c) = ws;
    ybar(c) = (w.col(c).array() * q.col(c).array()).sum() / ws;
  }
  return isotonic_regression(ybar, wsum);
}

double gmm_objective(const Eigen::MatrixXd& q, const Eigen::MatrixXd& w,
                     const Eigen::ArrayXd& y) {
  double acc = 0.0;
  for (long c = 0; c < q.cols(); ++c)
    acc += (w.col(c).array() * (q.col(c).array() - y(c)).square()).sum();
  return acc;
}

namespace {

struct Cell {
  int n = 0;
  std::vector<const AuctionRecord*> auctions;  // canonical (content-sorted) order
  Eigen::ArrayXd sorted_bids;
  double r_hat = 0.0;
  double p_hat = 0.0;
  double bid_sd = 0.0;
  double bandwidth = 0.0;
  Eigen::ArrayXd sorted_pseudo;
  double inversion_fraction = 0.0;
};

bool record_content_less(const AuctionRecord* a, const AuctionRecord* b) {
  if (a->n_active != b->n_active) return a->n_active < b->n_active;
  return std::lexicographical_compare(a->bids.begin(), a->bids.end(), b->bids.begin(),
                                      b->bids.end());
}

Eigen::ArrayXd collect_sorted_bids(const std::vector<const AuctionRecord*>& recs) {
  std::vector<double> bids;
  for (const AuctionRecord* r : recs) bids.insert(bids.end(), r->bids.begin(), r->bids.end());
  std::sort(bids.begin(), bids.end());
  return Eigen::Map<Eigen::ArrayXd>(bids.data(), bids.size());
}

double mean_active_share(const std::vector<const AuctionRecord*>& recs) {
  double sum = 0.0;
  for (const AuctionRecord* r : recs) sum += static_cast<double>(r->n_active) / r->n;
  return sum / recs.size();
}

// everything past the entry probability: bandwidth, density, pseudo costs
void finish_cell(Cell& cell, const EstimateOptions& opts) {
  const Eigen::ArrayXd& bids = cell.sorted_bids;
  const double mean = bids.mean();
  cell.bid_sd = std::sqrt((bids - mean).square().sum() / (bids.size() - 1));
  cell.bandwidth = rot_bandwidth(bids, opts.undersmooth);
  const BoundaryKernelDensity kde(bids, cell.bandwidth);
  PseudoCosts pc = pseudo_costs(bids, cell.p_hat, cell.n, opts.format, kde);
  cell.inversion_fraction = pc.inversion_fraction;
  std::sort(pc.values.data(), pc.values.data() + pc.values.size());
  cell.sorted_pseudo = std::move(pc.values);
}

std::vector<Cell> build_cells(const AuctionDataset& data, const EstimateOptions& opts,
                              std::vector<std::string>* warnings) {
  std::map<int, std::vector<const AuctionRecord*>> by_n;
  for (const AuctionRecord& rec : data.records) by_n[rec.n].push_back(&rec);
  std::vector<Cell> cells;
  for (auto& [n, recs] : by_n) {
    long bid_count = 0;
    for (const AuctionRecord* r : recs) bid_count += static_cast<long>(r->bids.size());
    if (n == 2) {
      if (warnings)
        warnings->push_back("auctions with n=2 carry no entry information and were dropped");
      continue;
    }
    if (bid_count < opts.min_bids_per_cell) {
      if (warnings)
        warnings->push_back("cell n=" + std::to_string(n) + " has fewer than " +
                            std::to_string(opts.min_bids_per_cell) + " bids and was dropped");
      continue;
    }
    // canonical order makes the bootstrap invariant to input shuffling
    std::sort(recs.begin(), recs.end(), record_content_less);
    Cell cell;
    cell.n = n;
    cell.auctions = std::move(recs);
    cell.sorted_bids = collect_sorted_bids(cell.auctions);
    cell.r_hat = mean_active_share(cell.auctions);
    cell.p_hat = invert_entry_probability(cell.r_hat, n);
    finish_cell(cell, opts);
    cells.push_back(std::move(cell));
  }
  return cells;
}

Eigen::MatrixXd q_matrix(const std::vector<double>& p_hat,
                         const std::vector<const Eigen::ArrayXd*>& sorted_pseudo,
                         const Eigen::ArrayXd& v_grid, CopulaFamily family, double theta) {
  const CopulaModel copula = CopulaModel::make(family, theta);
  const long cells = static_cast<long>(p_hat.size());
  Eigen::MatrixXd q(cells, v_grid.size());
  for (long i = 0; i < cells; ++i)
    for (long j = 0; j < v_grid.size(); ++j)
      q(i, j) = copula.q_inverse(fhat_star(*sorted_pseudo[i], v_grid(j)), p_hat[i]);
  return q;
}

Eigen::MatrixXd q_matrix(const std::vector<Cell>& cells, const Eigen::ArrayXd& v_grid,
                         CopulaFamily family, double theta) {
  std::vector<double> p;
  std::vector<const Eigen::ArrayXd*> pseudo;
  for (const Cell& c : cells) {
    p.push_back(c.p_hat);
    pseudo.push_back(&c.sorted_pseudo);
  }
  return q_matrix(p, pseudo, v_grid, family, theta);
}

struct Replicate {
  std::vector<double> p_hat;
  std::vector<Eigen::ArrayXd> sorted_pseudo;
};

Replicate resample_cells(const std::vector<Cell>& cells, const EstimateOptions& opts,
                         std::uint64_t replicate_index) {
  Replicate rep;
  rep.p_hat.reserve(cells.size());
  rep.sorted_pseudo.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& cell = cells[i];
    const std::size_t m = cell.auctions.size();
    CounterRng rng(opts.seed, CounterRng::substream(0xB007 + i, replicate_index));
    std::vector<const AuctionRecord*> picked(m);
    for (std::size_t k = 0; k < m; ++k) picked[k] = cell.auctions[rng.below(m)];
    Cell draw;
    draw.n = cell.n;
    draw.auctions = std::move(picked);
    draw.sorted_bids = collect_sorted_bids(draw.auctions);
    draw.r_hat = mean_active_share(draw.auctions);
    draw.p_hat = invert_entry_probability(draw.r_hat, cell.n, /*clamp_out_of_range=*/true);
    finish_cell(draw, opts);
    rep.p_hat.push_back(draw.p_hat);
    rep.sorted_pseudo.push_back(std::move(draw.sorted_pseudo));
  }
  return rep;
}

struct BootstrapOutput {
  Eigen::MatrixXd weights;
  std::vector<Replicate> replicates;
};

BootstrapOutput run_bootstrap(const std::vector<Cell>& cells, int replicates,
                              double theta_tilde, const EstimateOptions& opts,
                              const Eigen::ArrayXd& v_grid) {
  if (replicates < 200)
    throw ConfigError("bootstrap: at least 200 replicates are required for the weights");
  for (const Cell& c : cells)
    if (c.auctions.size() < 2)
      throw UnidentifiedError("bootstrap: an n-cell with fewer than 2 auctions cannot be "
                              "resampled");
  BootstrapOutput out;
  out.replicates.resize(replicates);
  std::vector<Eigen::MatrixXd> q_draws(replicates);
  parallel_for(0, replicates, [&](long b) {
    Replicate rep = resample_cells(cells, opts, static_cast<std::uint64_t>(b));
    std::vector<const Eigen::ArrayXd*> pseudo;
    for (const auto& arr : rep.sorted_pseudo) pseudo.push_back(&arr);
    q_draws[b] = q_matrix(rep.p_hat, pseudo, v_grid, opts.family, theta_tilde);
    out.replicates[b] = std::move(rep);
  });
  const long rows = static_cast<long>(cells.size());
  const long cols = v_grid.size();
  out.weights.resize(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      double mean = 0.0;
      for (int b = 0; b < replicates; ++b) mean += q_draws[b](i, j);
      mean /= replicates;
      double var = 0.0;
      for (int b = 0; b < replicates; ++b) {
        const double d = q_draws[b](i, j) - mean;
        var += d * d;
      }
      var /= (replicates - 1);
      out.weights(i, j) = 1.0 / std::max(var, 1e-12);  // variance floor guard
    }
  }
  return out;
}

double profile_objective(const std::vector<Cell>& cells, const Eigen::ArrayXd& v_grid,
                         const Eigen::MatrixXd& w, CopulaFamily family, double theta) {
  const Eigen::MatrixXd q = q_matrix(cells, v_grid, family, theta);
  return gmm_objective(q, w, isotonic_inner(q, w));
}

// coarse-grid argmin refined by golden section inside the bracketing cell
template <class Objective>
double minimize_on_grid(const Objective& f, double lo, double hi, double step) {
  int best = 0;
  double best_val = 0.0;
  std::vector<double> grid;
  for (double t = lo; t <= hi + 1e-12; t += step) grid.push_back(std::min(t, hi));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double val = f(grid[k]);
    if (k == 0 || val < best_val) {
      best_val = val;
      best = static_cast<int>(k);
    }
  }
  const double bl = grid[std::max(0, best - 1)];
  const double bh = grid[std::min<int>(static_cast<int>(grid.size()) - 1, best + 1)];
  if (bh <= bl) return grid[best];
  return golden_min(f, bl, bh, 1e-6);
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const std::size_t k = static_cast<std::size_t>(pos);
  if (k + 1 >= values.size()) return values.back();
  const double frac = pos - k;
  return values[k] * (1.0 - frac) + values[k + 1] * frac;
}

}  // namespace

ValueDistribution estimated_marginal(const EstimationResult& res) {
  std::vector<double> v = {res.support_lo};
  std::vector<double> f = {0.0};
  for (int j = 0; j < res.v_grid.size(); ++j) {
    const double fj = res.f_grid(j);
    if (fj <= f.back() + 1e-10 || fj >= 1.0 - 1e-10) continue;
    if (res.v_grid(j) <= v.back() || res.v_grid(j) >= res.support_hi) continue;
    v.push_back(res.v_grid(j));
    f.push_back(fj);
  }
  v.push_back(res.support_hi);
  f.push_back(1.0);
  return ValueDistribution::grid_monotone(
      Eigen::Map<Eigen::ArrayXd>(v.data(), v.size()),
      Eigen::Map<Eigen::ArrayXd>(f.data(), f.size()));
}

Eigen::MatrixXd bootstrap_weights(const AuctionDataset& data, int replicates,
                                  double theta_tilde, const EstimateOptions& opts,
                                  const Eigen::ArrayXd& v_grid) {
  const std::vector<Cell> cells = build_cells(data, opts, nullptr);
  if (cells.empty()) throw UnidentifiedError("bootstrap_weights: no usable n-cells");
  return run_bootstrap(cells, replicates, theta_tilde, opts, v_grid).weights;
}

EstimationResult gmm_estimate(const AuctionDataset& data, const EstimateOptions& opts) {
  EstimationResult res;
  res.bootstrap_replicates = opts.bootstrap_replicates;
  res.undersmooth = opts.undersmooth;
  std::vector<Cell> cells = build_cells(data, opts, &res.warnings);
  if (cells.size() < 2)
    throw UnidentifiedError(
        "gmm_estimate: need at least two n-cells with identified entry probabilities");

  double max_gap = 0.0;
  for (std::size_t a = 0; a < cells.size(); ++a)
    for (std::size_t b = a + 1; b < cells.size(); ++b)
      max_gap = std::max(max_gap, std::abs(cells[a].p_hat - cells[b].p_hat));
  if (max_gap <= 0.01)
    res.warnings.push_back(
        "weak identification: entry probabilities differ by at most 0.01 across n");

  double theta_lo = opts.theta_lo;
  const double theta_hi = opts.theta_hi;
  if (opts.family == CopulaFamily::Joe && theta_lo < 1.0) {
    theta_lo = 1.0 + 1e-9;
    res.warnings.push_back("joe copula: theta grid truncated at its lower bound of 1");
  }
  if (!(theta_hi > theta_lo) || !(opts.theta_step > 0.0))
    throw ConfigError("gmm_estimate: malformed theta grid");

  // pooled pseudo costs give the support estimate and the v grid
  std::vector<double> pooled;
  for (const Cell& c : cells)
    pooled.insert(pooled.end(), c.sorted_pseudo.data(),
                  c.sorted_pseudo.data() + c.sorted_pseudo.size());
  std::sort(pooled.begin(), pooled.end());
  res.support_lo = pooled.front();
  res.support_hi = pooled.back();
  const auto pooled_quantile = [&](double q) {
    const double pos = q * (pooled.size() - 1);
    const std::size_t k = static_cast<std::size_t>(pos);
    if (k + 1 >= pooled.size()) return pooled.back();
    return pooled[k] * (1.0 - (pos - k)) + pooled[k + 1] * (pos - k);
  };
  const int j_points = std::max(2, opts.grid_points);
  const double v_lo = pooled_quantile(0.05);
  const double v_hi = pooled_quantile(0.95);
  if (!(v_hi > v_lo))
    throw NumericError("gmm_estimate: degenerate pseudo-cost distribution");
  res.v_grid.resize(j_points);
  for (int j = 0; j < j_points; ++j)
    res.v_grid(j) = v_lo + (v_hi - v_lo) * j / (j_points - 1);

  // step 0: preliminary theta under identity weights
  const Eigen::MatrixXd identity_w =
      Eigen::MatrixXd::Ones(static_cast<long>(cells.size()), j_points);
  const double coarse = std::max(opts.theta_step, (theta_hi - theta_lo) / 40.0);
  res.theta_tilde = minimize_on_grid(
      [&](double t) { return profile_objective(cells, res.v_grid, identity_w, opts.family, t); },
      theta_lo, theta_hi, coarse);

  // step 1: bootstrap weights at the preliminary theta
  BootstrapOutput boot =
      run_bootstrap(cells, opts.bootstrap_replicates, res.theta_tilde, opts, res.v_grid);

  // step 2: profiled theta on the fine grid
  std::vector<double> grid, grid_obj;
  for (double t = theta_lo; t <= theta_hi + 1e-12; t += opts.theta_step)
    grid.push_back(std::min(t, theta_hi));
  grid_obj.resize(grid.size());
  parallel_for(0, static_cast<long>(grid.size()), [&](long k) {
    grid_obj[k] = profile_objective(cells, res.v_grid, boot.weights, opts.family, grid[k]);
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (grid_obj[k] < grid_obj[best]) best = k;
  const double spread = *std::max_element(grid_obj.begin(), grid_obj.end()) -
                        *std::min_element(grid_obj.begin(), grid_obj.end());
  if (spread < 1e-10)
    res.warnings.push_back("flat objective: theta is not identified on this grid");
  {
    const double bl = grid[best == 0 ? 0 : best - 1];
    const double bh = grid[std::min(grid.size() - 1, best + 1)];
    res.theta_hat =
        bh > bl ? golden_min(
                      [&](double t) {
                        return profile_objective(cells, res.v_grid, boot.weights, opts.family, t);
                      },
                      bl, bh, 1e-6)
                : grid[best];
  }
  res.objective = profile_objective(cells, res.v_grid, boot.weights, opts.family, res.theta_hat);

  // averaged marginal CDF on the grid; each term is nondecreasing in v, so the
  // average is a CDF without further projection
  const CopulaModel fitted = CopulaModel::make(opts.family, res.theta_hat);
  res.f_grid.resize(j_points);
  for (int j = 0; j < j_points; ++j) {
    double acc = 0.0;
    for (const Cell& c : cells)
      acc += fitted.q_inverse(fhat_star(c.sorted_pseudo, res.v_grid(j)), c.p_hat);
    res.f_grid(j) = acc / cells.size();
  }

  // plug-in entry costs: the averaged-Q marginal CDF is a step function, so
  // the integral is an exact sum over its constancy intervals
  {
    std::vector<double> breaks = pooled;
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::vector<double> f_mid(breaks.size() + 1);
    std::vector<double> edges(breaks.size() + 2);
    edges[0] = res.support_lo;
    for (std::size_t k = 0; k < breaks.size(); ++k) edges[k + 1] = breaks[k];
    edges[breaks.size() + 1] = res.support_hi;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double mid = 0.5 * (edges[k] + edges[k + 1]);
      double acc = 0.0;
      for (const Cell& c : cells)
        acc += fitted.q_inverse(fhat_star(c.sorted_pseudo, mid), c.p_hat);
      f_mid[k] = acc / cells.size();
    }
    for (const Cell& c : cells) {
      double kappa = 0.0;
      const double none = std::pow(1.0 - c.p_hat, c.n - 1);
      for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double width = edges[k + 1] - edges[k];
        if (width <= 0.0) continue;
        const double f_val = f_mid[k];
        const double cv = fitted.cdf(f_val, c.p_hat);
        const double lam = 1.0 - cv;
        const double c2 = fitted.c2(f_val, c.p_hat);
        double win = std::pow(lam, c.n - 1) - none;
        if (opts.format == BidFormat::Soft) win = std::pow(lam, c.n - 1) - none * cv / c.p_hat;
        kappa += c2 * win * width;
      }
      res.kappa_hat[c.n] = kappa;
    }
  }

  for (const Cell& c : cells) {
    res.p_hat[c.n] = c.p_hat;
    CellDiagnostics d;
    d.n = c.n;
    d.auctions = static_cast<int>(c.auctions.size());
    d.bids = static_cast<int>(c.sorted_bids.size());
    d.r_hat = c.r_hat;
    d.p_hat = c.p_hat;
    d.bid_sd = c.bid_sd;
    d.bandwidth = c.bandwidth;
    d.inversion_fraction = c.inversion_fraction;
    res.cells.push_back(d);
  }

  // bootstrap percentile SE for theta and CI for rho, reusing the replicates
  {
    const int b_count = opts.bootstrap_replicates;
    std::vector<double> theta_b(b_count), rho_b(b_count);
    const double coarse_b = std::max(opts.theta_step, (theta_hi - theta_lo) / 20.0);
    parallel_for(0, b_count, [&](long b) {
      const Replicate& rep = boot.replicates[b];
      std::vector<const Eigen::ArrayXd*> pseudo;
      for (const auto& arr : rep.sorted_pseudo) pseudo.push_back(&arr);
      const auto obj = [&](double t) {
        const Eigen::MatrixXd q = q_matrix(rep.p_hat, pseudo, res.v_grid, opts.family, t);
        return gmm_objective(q, boot.weights, isotonic_inner(q, boot.weights));
      };
      theta_b[b] = minimize_on_grid(obj, theta_lo, theta_hi, coarse_b);
      rho_b[b] = CopulaModel::make(opts.family, theta_b[b]).spearman_rho();
    });
    double mean = std::accumulate(theta_b.begin(), theta_b.end(), 0.0) / b_count;
    double var = 0.0;
    for (double t : theta_b) var += (t - mean) * (t - mean);
    res.theta_se = std::sqrt(var / (b_count - 1));
    res.rho_hat = fitted.spearman_rho();
    res.rho_ci_lo = percentile(rho_b, 0.025);
    res.rho_ci_hi = percentile(rho_b, 0.975);
  }

  return res;
}

}  // namespace auction
