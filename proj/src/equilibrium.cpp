#include "auction/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "auction/errors.hpp"

namespace auction {

namespace {

constexpr double kQuadRelTol = 1e-9;
constexpr double kRootTol = 1e-10;
constexpr double kResidualTol = 1e-9;
constexpr double kDerivStep = 1e-4;

double ipow(double x, int k) {
  double r = 1.0;
  for (; k > 0; k >>= 1, x *= x)
    if (k & 1) r *= x;
  return r;
}

}  // namespace

void AuctionEnvironment::validate() const {
  if (n < 2) throw ConfigError("environment: need at least two potential bidders");
  if (!(kappa > 0.0)) throw ConfigError("environment: entry cost must be positive");
  if (!(kappa < values.upper() - values.lower()))
    throw ConfigError("environment: entry cost exceeds the support width");
  if (is_reserve()) {
    const double r = reserve();
    if (!(r > values.lower() && r <= values.upper()))
      throw ConfigError("environment: reserve price must lie in (lower, upper]");
  }
}

AuctionEnvironment AuctionEnvironment::with_theta(double theta) const {
  AuctionEnvironment e = *this;
  e.copula = copula.with_theta(theta);
  return e;
}

AuctionEnvironment AuctionEnvironment::with_format(const AuctionFormat& f) const {
  AuctionEnvironment e = *this;
  e.format = f;
  return e;
}

std::string format_name(const AuctionFormat& f) {
  if (std::holds_alternative<HardBidRequirement>(f)) return "hard";
  if (std::holds_alternative<SoftBidRequirement>(f)) return "soft";
  return "reserve";
}

double f_star(const AuctionEnvironment& env, double p, double v) {
  const double x = env.values.cdf(v);
  if (p < 1e-9) return env.copula.c2(x, 0.0);
  return env.copula.cdf(x, p) / p;
}

double big_lambda(const AuctionEnvironment& env, double p, double v) {
  return 1.0 - env.copula.cdf(env.values.cdf(v), p);
}

namespace {

// win probability of an active bidder with cost v; hard/soft subtract the
// formats' no-rival terms from Lambda^{n-1}
double win_prob_impl(const AuctionEnvironment& env, double p, double v) {
  const int n = env.n;
  const double lam = big_lambda(env, p, v);
  if (env.is_reserve()) return v <= env.reserve() ? ipow(lam, n - 1) : 0.0;
  const double base = ipow(lam, n - 1);
  const double none = ipow(1.0 - p, n - 1);
  const double h =
      env.is_hard() ? base - none : base - none * f_star(env, p, v);
  return std::max(0.0, h);
}

}  // namespace

double win_prob(const AuctionEnvironment& env, double p, double v) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("win_prob: p must lie in [0,1]");
  if (v < env.values.lower() - 1e-12 || v > env.values.upper() + 1e-12)
    throw std::domain_error("win_prob: cost outside the support");
  return win_prob_impl(env, p, std::clamp(v, env.values.lower(), env.values.upper()));
}

double bid(const AuctionEnvironment& env, double p, double v) {
  const double hi = env.bidding_upper();
  if (v < env.values.lower() - 1e-12 || v > hi + 1e-12)
    throw std::domain_error("bid: cost outside the bidding range");
  v = std::clamp(v, env.values.lower(), hi);
  if (!env.is_reserve() && !(p > 0.0))
    throw NumericError("bid: requires a positive entry probability under bid requirements");
  if (hi - v < 1e-13 * std::max(1.0, hi)) return hi;  // boundary bid(v-bar) = v-bar
  const double hv = win_prob_impl(env, p, v);
  if (hv <= 0.0)
    throw NumericError("bid: zero win probability at an interior cost (entry too low)");
  const double shade =
      integrate([&](double u) { return win_prob_impl(env, p, u); }, v, hi, kQuadRelTol);
  return v + shade / hv;
}

double bid_derivative(const AuctionEnvironment& env, double p, double v) {
  // beta'(v) = -H'(v) (beta(v) - v) / H(v), from the bidding first-order condition
  const int n = env.n;
  const double x = env.values.cdf(v);
  const double f = env.values.pdf(v);
  const CopulaPartials cp = env.copula.partials(x, p);
  const double lam = 1.0 - env.copula.cdf(x, p);
  double h_prime = -(n - 1) * ipow(lam, n - 2) * cp.c1 * f;
  if (env.is_soft()) h_prime -= ipow(1.0 - p, n - 1) * cp.c1 * f / std::max(p, 1e-12);
  const double hv = win_prob_impl(env, p, v);
  if (hv <= 0.0) throw NumericError("bid_derivative: zero win probability");
  return -h_prime * (bid(env, p, v) - v) / hv;
}

BidFunction::BidFunction(const AuctionEnvironment& env, double p, int grid_points) {
  const double lo = env.values.lower();
  const double hi = env.bidding_upper();
  Eigen::ArrayXd v(grid_points), b(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    v(i) = lo + (hi - lo) * i / (grid_points - 1);
    b(i) = bid(env, p, v(i));
  }
  // enforce strict increase against float-level flats near the top
  for (int i = 1; i < grid_points; ++i)
    if (b(i) <= b(i - 1)) b(i) = b(i - 1) + 1e-15 * std::max(1.0, std::abs(b(i - 1)));
  curve_ = MonotoneCubic(v, b);
}

double entry_revenue(const AuctionEnvironment& env, double p, double s) {
  if (!(p >= 0.0 && p <= 1.0 && s >= 0.0 && s <= 1.0))
    throw std::domain_error("entry_revenue: p and s must lie in [0,1]");
  const double lo = env.values.lower();
  const double hi = env.bidding_upper();
  const auto integrand = [&](double v) {
    const double c2 = env.copula.c2(env.values.cdf(v), s);
    if (env.is_reserve()) return c2 * ipow(big_lambda(env, p, v), env.n - 1);
    return c2 * win_prob_impl(env, p, v);
  };
  return integrate(integrand, lo, hi, kQuadRelTol);
}

double entrant_profit(const AuctionEnvironment& env, double p, double s) {
  return entry_revenue(env, p, s) - env.kappa;
}

double marginal_revenue(const AuctionEnvironment& env, double p) {
  return entry_revenue(env, p, p);
}

EquilibriumSolution solve_entry(const AuctionEnvironment& env, int scan_points) {
  env.validate();
  const auto profit = [&](double p) { return entrant_profit(env, p, p); };

  EquilibriumSolution sol;
  const int m = std::max(scan_points, 16);
  double prev_p = 1.0 / m;
  double prev_f = profit(prev_p);
  for (int k = 2; k <= m; ++k) {
    const double pk = static_cast<double>(k) / m;
    const double fk = profit(pk);
    if ((prev_f > 0.0) != (fk > 0.0) || prev_f == 0.0) {
      double root = prev_f == 0.0
                        ? prev_p
                        : bisect(profit, prev_p, pk, kRootTol);
      if (std::abs(profit(root)) > kResidualTol)
        throw NumericError("solve_entry: root residual exceeds tolerance");
      sol.roots.push_back({root, prev_f > 0.0});
    }
    prev_p = pk;
    prev_f = fk;
  }

  // a zero profit exactly on a grid point reports from both adjacent cells
  std::vector<EquilibriumRoot> dedup;
  for (const EquilibriumRoot& r : sol.roots) {
    if (!dedup.empty() && std::abs(dedup.back().p - r.p) < 1e-7)
      dedup.back().stable = dedup.back().stable || r.stable;
    else
      dedup.push_back(r);
  }
  sol.roots = std::move(dedup);

  const double at_one = prev_f;
  double best_stable = -1.0;
  for (const auto& r : sol.roots)
    if (r.stable) best_stable = std::max(best_stable, r.p);

  if (best_stable > 0.0) {
    sol.selected_p = best_stable;
    sol.corner = EntryCorner::None;
    sol.full_entry_ambiguous = at_one > 0.0;
  } else if (at_one > 0.0) {
    sol.selected_p = 1.0;
    sol.corner = EntryCorner::FullEntry;
  } else {
    sol.selected_p = 0.0;
    sol.corner = EntryCorner::NoEntry;
  }
  if (env.is_reserve() && sol.roots.size() > 1) sol.reserve_multiplicity_violation = true;
  return sol;
}

QuasiConcavityReport check_quasiconcavity(const AuctionEnvironment& env, int grid_size) {
  if (env.is_reserve())
    throw std::domain_error("check_quasiconcavity: meant for the bid-requirement formats");
  const auto profit = [&](double p) { return entrant_profit(env, p, p); };
  QuasiConcavityReport rep;
  const double h = kDerivStep;
  int last_sign = 0;
  rep.decreasing_from = h;
  for (int i = 0; i < grid_size; ++i) {
    const double p = h + (1.0 - 2.0 * h) * i / (grid_size - 1);
    const double d = (profit(p + h) - profit(p - h)) / (2.0 * h);
    const int sign = d > 1e-11 ? 1 : (d < -1e-11 ? -1 : 0);
    if (sign != 0) {
      if (last_sign != 0 && sign != last_sign) ++rep.sign_changes;
      if (sign > 0) rep.decreasing_from = p;
      last_sign = sign;
    }
  }
  return rep;
}

}  // namespace auction
