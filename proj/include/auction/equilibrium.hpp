#pragma once

#include <vector>

#include "auction/environment.hpp"
#include "auction/numeric.hpp"

namespace auction {

// F*(v|p) = C(F(v),p)/p, the cost law conditional on entry; continuous limit
// C2(F(v),0) as p -> 0.
double f_star(const AuctionEnvironment& env, double p, double v);

// Lambda(v|p) = 1 - C(F(v),p): a rival either stays out or draws a worse cost.
double big_lambda(const AuctionEnvironment& env, double p, double v);

// Probability that an active bidder with cost v wins under the format rules.
double win_prob(const AuctionEnvironment& env, double p, double v);

// Equilibrium bid of a cost-v entrant when rivals enter with probability p.
double bid(const AuctionEnvironment& env, double p, double v);

// Derivative of the bidding function in v (used for model-implied bid PDFs).
double bid_derivative(const AuctionEnvironment& env, double p, double v);

// Tabulated bid curve for bulk evaluation (simulation); shape-preserving
// interpolation of `bid` on a dense cost grid, invertible.
class BidFunction {
 public:
  BidFunction(const AuctionEnvironment& env, double p, int grid_points = 513);
  double operator()(double v) const { return curve_(v); }
  double inverse(double b) const { return curve_.inverse(b); }
  double min_bid() const { return curve_.y_min(); }
  double max_bid() const { return curve_.y_max(); }

 private:
  MonotoneCubic curve_;
};

// Expected revenue from entering for a bidder with signal rank s, before the
// entry cost; profit is revenue minus kappa.
double entry_revenue(const AuctionEnvironment& env, double p, double s);
double entrant_profit(const AuctionEnvironment& env, double p, double s);
// marginal entrant: s = p
double marginal_revenue(const AuctionEnvironment& env, double p);

struct EquilibriumRoot {
  double p;
  bool stable;  // profit crosses zero from above
};

enum class EntryCorner { None, FullEntry, NoEntry };

struct EquilibriumSolution {
  std::vector<EquilibriumRoot> roots;  // interior zero-profit points, ascending
  double selected_p = 0.0;
  EntryCorner corner = EntryCorner::None;
  // profit at p=1 is positive although an interior stable root was selected
  bool full_entry_ambiguous = false;
  // a reserve-price environment produced several roots (profit should be monotone)
  bool reserve_multiplicity_violation = false;
};

// Scans the marginal entrant's profit on a uniform grid over (0,1], refines
// each sign change by bisection, and keeps the largest stable root. With no
// stable root the entry probability is 0 unless full entry is profitable.
EquilibriumSolution solve_entry(const AuctionEnvironment& env, int scan_points = 2000);

struct QuasiConcavityReport {
  int sign_changes = 0;       // of the numerical derivative of p -> profit(p)
  double decreasing_from = 0; // profit is non-increasing from here on
};

QuasiConcavityReport check_quasiconcavity(const AuctionEnvironment& env, int grid_size = 400);

}  // namespace auction
