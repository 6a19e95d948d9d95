#include "auction/outcomes.hpp"

#include <cmath>

#include "auction/equilibrium.hpp"
#include "auction/errors.hpp"

namespace auction {

namespace {

constexpr double kQuadRelTol = 1e-9;

double ipow(double x, int k) {
  double r = 1.0;
  for (; k > 0; k >>= 1, x *= x)
    if (k & 1) r *= x;
  return r;
}

// n * int Lambda^{n-1} (1 - (n-1)/n Lambda) dv over [lo, hi]; the common core
// of every expected-winning-bid expression
double winning_bid_core(const AuctionEnvironment& env, double p, double lo, double hi) {
  const int n = env.n;
  return n * integrate(
                 [&](double v) {
                   const double lam = big_lambda(env, p, v);
                   return ipow(lam, n - 1) * (1.0 - (n - 1.0) / n * lam);
                 },
                 lo, hi, kQuadRelTol);
}

}  // namespace

double prob_at_least_two(double p, int n) {
  return 1.0 - ipow(1.0 - p, n) - n * p * ipow(1.0 - p, n - 1);
}

double failure_probability(const AuctionEnvironment& env, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("failure_probability: p in [0,1]");
  const int n = env.n;
  if (env.is_hard()) return ipow(1.0 - p, n) + n * p * ipow(1.0 - p, n - 1);
  if (env.is_soft()) return ipow(1.0 - p, n) + 0.5 * n * p * ipow(1.0 - p, n - 1);
  const double q = env.copula.cdf(env.values.cdf(env.reserve()), p);
  return ipow(1.0 - q, n);
}

double prob_bidding(const AuctionEnvironment& env, double p) {
  if (!env.is_reserve()) return p;
  return env.copula.cdf(env.values.cdf(env.reserve()), p);
}

double expected_winning_bid(const AuctionEnvironment& env, double p) {
  const double fail = failure_probability(env, p);
  if (fail >= 1.0 - 1e-12)
    throw NumericError("expected_winning_bid: undefined, the auction fails with certainty");
  const int n = env.n;
  const double lo = env.values.lower();
  const double vbar = env.values.upper();
  if (env.is_hard()) {
    const double succ = prob_at_least_two(p, n);
    return (winning_bid_core(env, p, lo, vbar) + lo - vbar * (1.0 - succ)) / succ;
  }
  if (env.is_soft()) {
    // n p int beta H_soft dF*, integrated by parts with the bidding FOC:
    //   lo + n int L^{n-1} - (n-1) int L^n + (n-1) vbar (1-p)^n
    //   + (n (1-p)^{n-1} / p) [ int (L - L^2/2) dv - (vbar-lo) + (vbar (1-p)^2 - lo)/2 ]
    // all over the success probability
    const double succ = 1.0 - fail;
    const double none = ipow(1.0 - p, n - 1);
    const double sole_scale = n * none / std::max(p, 1e-300);
    const double core = integrate(
        [&](double v) {
          const double lam = big_lambda(env, p, v);
          return n * ipow(lam, n - 1) - (n - 1.0) * ipow(lam, n) +
                 sole_scale * (lam - 0.5 * lam * lam);
        },
        lo, vbar, kQuadRelTol);
    const double constants =
        lo + (n - 1.0) * vbar * ipow(1.0 - p, n) +
        sole_scale * (0.5 * (vbar * ipow(1.0 - p, 2) - lo) - (vbar - lo));
    return (core + constants) / succ;
  }
  const double r = env.reserve();
  const double succ = 1.0 - fail;
  return (winning_bid_core(env, p, lo, r) + lo - r * fail) / succ;
}

double unconditional_cost(const AuctionEnvironment& env, double p) {
  if (!env.is_hard())
    throw std::domain_error("unconditional_cost: defined for the hard bid requirement only");
  return winning_bid_core(env, p, env.values.lower(), env.values.upper()) + env.values.lower();
}

OutcomeReport outcome_report(const AuctionEnvironment& env, double p) {
  OutcomeReport rep;
  rep.p = p;
  rep.prob_bidding = prob_bidding(env, p);
  rep.prob_failure = failure_probability(env, p);
  if (rep.prob_failure < 1.0 - 1e-12) rep.expected_winning_bid = expected_winning_bid(env, p);
  return rep;
}

namespace {

double interior_equilibrium(const AuctionEnvironment& env) {
  const EquilibriumSolution sol = solve_entry(env);
  if (sol.corner != EntryCorner::None || sol.selected_p <= 0.0)
    throw NumericError(
        "decompose_theta_effect: no interior stable equilibrium inside the stencil");
  return sol.selected_p;
}

}  // namespace

ThetaEffectDecomposition decompose_theta_effect(const AuctionEnvironment& env, double h_theta,
                                                double h_p) {
  const double theta = env.copula.theta();
  const AuctionEnvironment up = env.with_theta(theta + h_theta);
  const AuctionEnvironment dn = env.with_theta(theta - h_theta);

  ThetaEffectDecomposition out;
  out.p_star = interior_equilibrium(env);
  const double p_up = interior_equilibrium(up);
  const double p_dn = interior_equilibrium(dn);

  out.information =
      (expected_winning_bid(up, out.p_star) - expected_winning_bid(dn, out.p_star)) /
      (2.0 * h_theta);
  const double dk_dp =
      (expected_winning_bid(env, out.p_star + h_p) - expected_winning_bid(env, out.p_star - h_p)) /
      (2.0 * h_p);
  const double dp_dtheta = (p_up - p_dn) / (2.0 * h_theta);
  out.cutoff = dk_dp * dp_dtheta;
  out.total = out.information + out.cutoff;
  out.full_difference =
      (expected_winning_bid(up, p_up) - expected_winning_bid(dn, p_dn)) / (2.0 * h_theta);
  return out;
}

}  // namespace auction
