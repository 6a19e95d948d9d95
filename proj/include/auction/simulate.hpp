#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "auction/environment.hpp"

namespace auction {

struct AuctionRecord {
  int n = 0;
  int n_active = 0;
  std::vector<double> bids;  // one per active bidder, in bidder order
  // latent draws, populated only when requested by a test harness
  bool has_latent = false;
  std::vector<double> signals;        // all n potential bidders
  std::vector<double> costs;          // NaN for non-entrants
  std::vector<double> bidder_bids;    // NaN when no bid was submitted
  std::vector<std::uint8_t> entered;  // entry flags, all n
};

struct AuctionDataset {
  std::vector<AuctionRecord> records;
  std::uint64_t seed = 0;
  std::string fingerprint;  // environments and equilibrium entry rates
};

// F^{-1}(x) with x solving C2(x, s) = u: a private cost drawn conditional on
// the signal rank s.
double conditional_cost_draw(const CopulaModel& copula, const ValueDistribution& values,
                             double s, double u);

struct SimulateOptions {
  int auctions_per_env = 1000;
  std::uint64_t seed = 1;
  bool with_latent = false;
};

// Draws auctions at each environment's solved equilibrium and keeps one with
// at least two active bidders, resampling rejected draws. Deterministic in
// the seed: every auction attempt owns a counter-RNG substream.
AuctionDataset simulate_dataset(const std::vector<AuctionEnvironment>& envs,
                                const SimulateOptions& opts);

// Same, but at externally supplied entry probabilities (one per environment).
AuctionDataset simulate_dataset_at(const std::vector<AuctionEnvironment>& envs,
                                   const std::vector<double>& entry_probs,
                                   const SimulateOptions& opts);

struct MonteCarloOutcomes {
  long auctions = 0;
  long successes = 0;
  double failure_prob = 1.0;
  double failure_se = 0.0;
  double mean_winning_bid = 0.0;  // conditional on success
  double winning_bid_se = 0.0;
};

// Full-outcome Monte Carlo at a fixed entry probability, failures included;
// the cross-check oracle for the analytic failure and winning-bid formulas.
MonteCarloOutcomes simulate_outcomes(const AuctionEnvironment& env, double p, long n_auctions,
                                     std::uint64_t seed);

// bid CSV: auction_id,n,n_active,bid (one row per bid)
void write_bids_csv(const AuctionDataset& ds, const std::string& path);
AuctionDataset read_bids_csv(const std::string& path);
// latent CSV: auction_id,n,bidder,signal,entered,cost,bid
void write_latent_csv(const AuctionDataset& ds, const std::string& path);

}  // namespace auction
