#pragma once

#include <optional>

#include "auction/environment.hpp"

namespace auction {

// Pr[N* >= 2 | p, n] under binomial entry.
double prob_at_least_two(double p, int n);

// Probability the format's award condition fails at entry probability p:
// fewer than two bids (hard), a sole bid losing to the government draw in
// expectation (soft), or no bid below the reserve.
double failure_probability(const AuctionEnvironment& env, double p);

// Probability that a potential bidder ends up submitting a bid; equals p
// except under a reserve price, where costs above r never turn into bids.
double prob_bidding(const AuctionEnvironment& env, double p);

// Expected winning bid conditional on the award condition being met.
// Throws NumericError when failure is certain and the value is undefined.
double expected_winning_bid(const AuctionEnvironment& env, double p);

// Hard format only: expected procurement cost when a failed auction is
// resolved at the outside option v-bar.
double unconditional_cost(const AuctionEnvironment& env, double p);

struct OutcomeReport {
  double p = 0.0;
  double prob_bidding = 0.0;
  double prob_failure = 1.0;
  std::optional<double> expected_winning_bid;  // empty exactly when failure is certain
};

OutcomeReport outcome_report(const AuctionEnvironment& env, double p);

struct ThetaEffectDecomposition {
  double information = 0.0;  // dK/dtheta holding the entry probability fixed
  double cutoff = 0.0;       // (dK/dp) * (dp*/dtheta)
  double total = 0.0;        // information + cutoff
  double full_difference = 0.0;  // direct central difference of theta -> K(p*(theta); theta)
  double p_star = 0.0;
};

// Central-difference split of the signal-informativeness effect on the
// conditional expected winning bid. Requires an interior stable equilibrium
// at theta and at theta +/- h.
ThetaEffectDecomposition decompose_theta_effect(const AuctionEnvironment& env,
                                                double h_theta = 1e-3, double h_p = 1e-4);

}  // namespace auction
