#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "auction/equilibrium.hpp"
#include "auction/errors.hpp"
#include "auction/estimate.hpp"
#include "auction/rng.hpp"
#include "auction/simulate.hpp"
#include "test_util.hpp"

using namespace auction;

namespace {

AuctionEnvironment design_env(int n, double kappa) {
  return {n, kappa, HardBidRequirement{}, ValueDistribution::scaled_beta(2.0, 2.0, 0.5, 1.5),
          CopulaModel::frank(5.54)};
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("conditional cost draws: degenerate families") {
  const ValueDistribution vals = ValueDistribution::uniform(0.5, 1.5);
  const CopulaModel indep = CopulaModel::independence();
  for (double s : {0.2, 0.8})
    for (double u : {0.3, 0.6})
      CHECK(conditional_cost_draw(indep, vals, s, u) == doctest::Approx(vals.quantile(u)));
  const CopulaModel como = CopulaModel::comonotone();
  for (double u : {0.1, 0.5, 0.9})
    CHECK(conditional_cost_draw(como, vals, 0.37, u) == doctest::Approx(vals.quantile(0.37)));
}

TEST_CASE("conditional cost draws follow the conditional CDF") {
  const ValueDistribution vals = ValueDistribution::scaled_beta(2.0, 2.0, 0.5, 1.5);
  const CopulaModel frank = CopulaModel::frank(5.54);
  const double s = 0.3;
  CounterRng rng(1234);
  std::vector<double> draws(100000);
  for (double& d : draws) d = conditional_cost_draw(frank, vals, s, rng.uniform());
  const double ks = testutil::ks_distance(
      draws, [&](double v) { return frank.c2(vals.cdf(v), s); });
  CHECK(ks < 0.01);
}

TEST_CASE("full entry keeps every auction") {
  AuctionEnvironment env{2, 0.1, HardBidRequirement{}, ValueDistribution::uniform(0.0, 1.0),
                         CopulaModel::independence()};
  SimulateOptions opts;
  opts.auctions_per_env = 50;
  opts.seed = 5;
  const AuctionDataset ds = simulate_dataset({env}, opts);
  REQUIRE(ds.records.size() == 50);
  for (const AuctionRecord& rec : ds.records) CHECK(rec.n_active == rec.n);
}

TEST_CASE("retained entry shares match the conditional formula") {
  const AuctionEnvironment env = design_env(9, 0.02);
  const double p = 0.186;
  SimulateOptions opts;
  opts.auctions_per_env = 10000;
  opts.seed = 11;
  const AuctionDataset ds = simulate_dataset_at({env}, {p}, opts);
  double sum = 0.0, sum2 = 0.0;
  for (const AuctionRecord& rec : ds.records) {
    const double share = static_cast<double>(rec.n_active) / rec.n;
    sum += share;
    sum2 += share * share;
  }
  const double m = static_cast<double>(ds.records.size());
  const double mean = sum / m;
  const double se = std::sqrt((sum2 / m - mean * mean) / m);
  const double expect = conditional_entry_mean(p, 9);
  CHECK(expect == doctest::Approx(0.2885).epsilon(1e-3));
  CHECK(std::abs(mean - expect) < 3.0 * se);
}

TEST_CASE("simulated bids follow the model bid distribution") {
  const AuctionEnvironment env = design_env(8, 0.02);
  const double p = 0.30;
  SimulateOptions opts;
  opts.auctions_per_env = 4000;
  opts.seed = 21;
  const AuctionDataset ds = simulate_dataset_at({env}, {p}, opts);
  std::vector<double> bids;
  for (const AuctionRecord& rec : ds.records)
    bids.insert(bids.end(), rec.bids.begin(), rec.bids.end());
  REQUIRE(bids.size() > 9000);
  const BidFunction beta(env, p);
  const double ks = testutil::ks_distance(
      bids, [&](double b) { return f_star(env, p, beta.inverse(b)); });
  CHECK(ks < 0.02);
}

TEST_CASE("active-bidder counts follow the truncated binomial") {
  const AuctionEnvironment env = design_env(8, 0.02);
  const double p = 0.30;
  SimulateOptions opts;
  opts.auctions_per_env = 10000;
  opts.seed = 31;
  const AuctionDataset ds = simulate_dataset_at({env}, {p}, opts);
  std::vector<long> counts(env.n + 1, 0);
  for (const AuctionRecord& rec : ds.records) ++counts[rec.n_active];
  // binomial pmf truncated to >= 2
  std::vector<double> pmf(env.n + 1, 0.0);
  double tail = 0.0;
  for (int k = 2; k <= env.n; ++k) {
    double c = 1.0;
    for (int t = 0; t < k; ++t) c *= static_cast<double>(env.n - t) / (t + 1);
    pmf[k] = c * std::pow(p, k) * std::pow(1.0 - p, env.n - k);
    tail += pmf[k];
  }
  double chi2 = 0.0;
  int bins = 0;
  double obs_pool = 0.0, exp_pool = 0.0;
  for (int k = 2; k <= env.n; ++k) {
    const double expect = opts.auctions_per_env * pmf[k] / tail;
    obs_pool += counts[k];
    exp_pool += expect;
    if (exp_pool >= 5.0) {  // pool sparse tail cells
      chi2 += (obs_pool - exp_pool) * (obs_pool - exp_pool) / exp_pool;
      ++bins;
      obs_pool = exp_pool = 0.0;
    }
  }
  if (exp_pool > 0.0) {
    chi2 += (obs_pool - exp_pool) * (obs_pool - exp_pool) / exp_pool;
    ++bins;
  }
  CHECK(chi2 < testutil::chi2_crit_1pct(bins - 1));
}

TEST_CASE("latent entrant costs follow the entry-conditional law") {
  const AuctionEnvironment env = design_env(8, 0.02);
  const double p = 0.30;
  SimulateOptions opts;
  opts.auctions_per_env = 4000;
  opts.seed = 41;
  opts.with_latent = true;
  const AuctionDataset ds = simulate_dataset_at({env}, {p}, opts);
  std::vector<double> costs;
  for (const AuctionRecord& rec : ds.records)
    for (int i = 0; i < rec.n; ++i)
      if (rec.entered[i]) costs.push_back(rec.costs[i]);
  const double ks =
      testutil::ks_distance(costs, [&](double v) { return f_star(env, p, v); });
  CHECK(ks < 0.02);
}

TEST_CASE("equal seeds give byte-identical datasets") {
  const AuctionEnvironment env = design_env(8, 0.02);
  SimulateOptions opts;
  opts.auctions_per_env = 200;
  opts.seed = 77;
  const AuctionDataset a = simulate_dataset_at({env}, {0.3}, opts);
  const AuctionDataset b = simulate_dataset_at({env}, {0.3}, opts);
  REQUIRE(a.records.size() == b.records.size());
  write_bids_csv(a, "sim_a.csv");
  write_bids_csv(b, "sim_b.csv");
  CHECK(file_bytes("sim_a.csv") == file_bytes("sim_b.csv"));
  std::remove("sim_a.csv");
  std::remove("sim_b.csv");
  SimulateOptions other = opts;
  other.seed = 78;
  const AuctionDataset c = simulate_dataset_at({env}, {0.3}, other);
  CHECK(c.records[0].bids != a.records[0].bids);
}

TEST_CASE("runaway rejection is detected up front") {
  AuctionEnvironment env{2, 0.05, HardBidRequirement{}, ValueDistribution::uniform(0.0, 1.0),
                         CopulaModel::independence()};
  SimulateOptions opts;
  opts.auctions_per_env = 10;
  CHECK_THROWS_AS(simulate_dataset_at({env}, {0.005}, opts), NumericError);
}

TEST_CASE("bid csv round trip") {
  const AuctionEnvironment env = design_env(6, 0.02);
  SimulateOptions opts;
  opts.auctions_per_env = 60;
  opts.seed = 13;
  const AuctionDataset ds = simulate_dataset_at({env}, {0.35}, opts);
  write_bids_csv(ds, "sim_rt.csv");
  const AuctionDataset back = read_bids_csv("sim_rt.csv");
  REQUIRE(back.records.size() == ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    CHECK(back.records[i].n == ds.records[i].n);
    CHECK(back.records[i].n_active == ds.records[i].n_active);
    REQUIRE(back.records[i].bids.size() == ds.records[i].bids.size());
    for (std::size_t k = 0; k < ds.records[i].bids.size(); ++k)
      CHECK(back.records[i].bids[k] == ds.records[i].bids[k]);
  }
  std::remove("sim_rt.csv");
}

TEST_CASE("reserve-format simulation only records bids below the reserve") {
  AuctionEnvironment env{8, 0.02, ReservePrice{1.0},
                         ValueDistribution::scaled_beta(2.0, 2.0, 0.5, 1.5),
                         CopulaModel::frank(5.54)};
  SimulateOptions opts;
  opts.auctions_per_env = 300;
  opts.seed = 3;
  opts.with_latent = true;
  const AuctionDataset ds = simulate_dataset_at({env}, {0.5}, opts);
  for (const AuctionRecord& rec : ds.records) {
    CHECK(rec.n_active >= 2);
    for (int i = 0; i < rec.n; ++i)
      if (rec.entered[i] && rec.costs[i] > 1.0) CHECK(std::isnan(rec.bidder_bids[i]));
    for (double b : rec.bids) CHECK(b <= 1.0 + 1e-12);
  }
}
