#include "auction/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "auction/equilibrium.hpp"
#include "auction/errors.hpp"
#include "auction/outcomes.hpp"
#include "auction/parallel.hpp"
#include "auction/rng.hpp"

namespace auction {

double conditional_cost_draw(const CopulaModel& copula, const ValueDistribution& values,
                             double s, double u) {
  if (!(s > 0.0 && s < 1.0 && u > 0.0 && u < 1.0))
    throw std::domain_error("conditional_cost_draw: s and u must lie in (0,1)");
  return values.quantile(copula.c2_inverse(u, s));
}

namespace {

constexpr double kMinRetention = 1e-4;

double retention_probability(const AuctionEnvironment& env, double p) {
  // probability that an attempt produces >= 2 bids
  const double q = env.is_reserve() ? prob_bidding(env, p) : p;
  return prob_at_least_two(q, env.n);
}

// One auction attempt; returns true if it clears the two-bid observation rule.
bool draw_auction(const AuctionEnvironment& env, double p, const BidFunction& beta,
                  CounterRng& rng, bool with_latent, AuctionRecord& rec) {
  const int n = env.n;
  rec.n = n;
  rec.bids.clear();
  rec.has_latent = with_latent;
  if (with_latent) {
    rec.signals.assign(n, 0.0);
    rec.costs.assign(n, std::numeric_limits<double>::quiet_NaN());
    rec.bidder_bids.assign(n, std::numeric_limits<double>::quiet_NaN());
    rec.entered.assign(n, 0);
  }
  const double r = env.is_reserve() ? env.reserve() : 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = rng.uniform();
    if (with_latent) rec.signals[i] = s;
    if (s > p) continue;
    const double u = rng.uniform();
    const double cost = conditional_cost_draw(env.copula, env.values, s, u);
    if (with_latent) {
      rec.entered[i] = 1;
      rec.costs[i] = cost;
    }
    if (env.is_reserve() && cost > r) continue;  // entered but priced out of bidding
    const double b = beta(cost);
    if (with_latent) rec.bidder_bids[i] = b;
    rec.bids.push_back(b);
  }
  rec.n_active = static_cast<int>(rec.bids.size());
  return rec.n_active >= 2;
}

}  // namespace

AuctionDataset simulate_dataset_at(const std::vector<AuctionEnvironment>& envs,
                                   const std::vector<double>& entry_probs,
                                   const SimulateOptions& opts) {
  if (envs.size() != entry_probs.size())
    throw ConfigError("simulate: one entry probability per environment required");
  AuctionDataset ds;
  ds.seed = opts.seed;
  std::ostringstream fp;
  for (std::size_t e = 0; e < envs.size(); ++e) {
    const AuctionEnvironment& env = envs[e];
    const double p = entry_probs[e];
    if (!(p > 0.0 && p <= 1.0))
      throw NumericError("simulate: entry probability must be positive");
    if (retention_probability(env, p) < kMinRetention)
      throw NumericError("simulate: retention probability below 1e-4, rejection would run away");
    fp << format_name(env.format) << ":n=" << env.n << ":p=" << p << ";";
    const BidFunction beta(env, p);
    long attempts = 0;
    int kept = 0;
    AuctionRecord rec;
    while (kept < opts.auctions_per_env) {
      CounterRng rng(opts.seed, CounterRng::substream(e, attempts));
      ++attempts;
      if (!draw_auction(env, p, beta, rng, opts.with_latent, rec)) continue;
      ds.records.push_back(rec);
      ++kept;
    }
  }
  ds.fingerprint = fp.str();
  return ds;
}

AuctionDataset simulate_dataset(const std::vector<AuctionEnvironment>& envs,
                                const SimulateOptions& opts) {
  std::vector<double> probs;
  probs.reserve(envs.size());
  for (const auto& env : envs) {
    const EquilibriumSolution sol = solve_entry(env);
    if (!(sol.selected_p > 0.0))
      throw NumericError("simulate: environment has no positive-entry equilibrium");
    probs.push_back(sol.selected_p);
  }
  return simulate_dataset_at(envs, probs, opts);
}

MonteCarloOutcomes simulate_outcomes(const AuctionEnvironment& env, double p, long n_auctions,
                                     std::uint64_t seed) {
  const int n = env.n;
  const BidFunction beta(env, p);
  const double r = env.is_reserve() ? env.reserve() : 0.0;

  struct Chunk {
    long successes = 0;
    double sum_bid = 0.0;
    double sum_bid2 = 0.0;
  };
  constexpr long kChunk = 8192;  // fixed granularity keeps sums thread-count independent
  const long n_chunks = (n_auctions + kChunk - 1) / kChunk;
  std::vector<Chunk> chunks(n_chunks);

  parallel_for(0, n_chunks, [&](long c) {
    Chunk acc;
    const long hi = std::min(n_auctions, (c + 1) * kChunk);
    for (long a = c * kChunk; a < hi; ++a) {
      CounterRng rng(seed, CounterRng::substream(0x5157, a));
      int actives = 0;
      double min_cost = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        const double s = rng.uniform();
        if (s > p) continue;
        const double cost = conditional_cost_draw(env.copula, env.values, s, rng.uniform());
        if (env.is_reserve() && cost > r) continue;  // no bid submitted
        ++actives;
        min_cost = std::min(min_cost, cost);
      }
      bool success = false;
      if (env.is_reserve() || env.is_hard()) {
        success = env.is_reserve() ? actives >= 1 : actives >= 2;
      } else {
        if (actives >= 2) {
          success = true;
        } else if (actives == 1) {
          // sole bidder races a government cost drawn from F*(.|p); ties go
          // to the bidder
          const double z = rng.uniform();
          const double gov = env.values.quantile(env.copula.q_inverse(z, p));
          success = min_cost <= gov;
        }
      }
      if (success) {
        const double winning = beta(min_cost);
        ++acc.successes;
        acc.sum_bid += winning;
        acc.sum_bid2 += winning * winning;
      }
    }
    chunks[c] = acc;
  });

  MonteCarloOutcomes out;
  out.auctions = n_auctions;
  double sum = 0.0, sum2 = 0.0;
  for (const Chunk& c : chunks) {
    out.successes += c.successes;
    sum += c.sum_bid;
    sum2 += c.sum_bid2;
  }
  const double fail = 1.0 - static_cast<double>(out.successes) / n_auctions;
  out.failure_prob = fail;
  out.failure_se = std::sqrt(fail * (1.0 - fail) / n_auctions);
  if (out.successes > 1) {
    out.mean_winning_bid = sum / out.successes;
    const double var =
        std::max(0.0, (sum2 - sum * sum / out.successes) / (out.successes - 1));
    out.winning_bid_se = std::sqrt(var / out.successes);
  }
  return out;
}

void write_bids_csv(const AuctionDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write bid CSV: " + path);
  out << "auction_id,n,n_active,bid\n";
  char buf[96];
  for (std::size_t id = 0; id < ds.records.size(); ++id) {
    const AuctionRecord& rec = ds.records[id];
    for (double b : rec.bids) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.17g\n", id, rec.n, rec.n_active, b);
      out << buf;
    }
  }
}

void write_latent_csv(const AuctionDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write latent CSV: " + path);
  out << "auction_id,n,bidder,signal,entered,cost,bid\n";
  char buf[160];
  for (std::size_t id = 0; id < ds.records.size(); ++id) {
    const AuctionRecord& rec = ds.records[id];
    if (!rec.has_latent)
      throw ConfigError("latent CSV requested but the dataset carries no latent draws");
    for (int i = 0; i < rec.n; ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.17g,%d,", id, rec.n, i, rec.signals[i],
                    static_cast<int>(rec.entered[i]));
      out << buf;
      if (rec.entered[i]) {
        std::snprintf(buf, sizeof(buf), "%.17g,", rec.costs[i]);
        out << buf;
        if (!std::isnan(rec.bidder_bids[i])) {
          std::snprintf(buf, sizeof(buf), "%.17g\n", rec.bidder_bids[i]);
          out << buf;
        } else {
          out << "\n";
        }
      } else {
        out << ",\n";
      }
    }
  }
}

AuctionDataset read_bids_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open bid CSV: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("auction_id,n,n_active,bid", 0) != 0)
    throw ConfigError("bid CSV must start with the auction_id,n,n_active,bid header");
  AuctionDataset ds;
  std::map<long, std::size_t> index;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string f0, f1, f2, f3;
    if (!std::getline(row, f0, ',') || !std::getline(row, f1, ',') ||
        !std::getline(row, f2, ',') || !std::getline(row, f3))
      throw ConfigError("bid CSV: malformed row at line " + std::to_string(line_no));
    long id;
    int n, n_active;
    double b;
    try {
      id = std::stol(f0);
      n = std::stoi(f1);
      n_active = std::stoi(f2);
      b = std::stod(f3);
    } catch (const std::exception&) {
      throw ConfigError("bid CSV: unparsable value at line " + std::to_string(line_no));
    }
    auto [it, fresh] = index.try_emplace(id, ds.records.size());
    if (fresh) {
      AuctionRecord rec;
      rec.n = n;
      rec.n_active = n_active;
      ds.records.push_back(rec);
    }
    AuctionRecord& rec = ds.records[it->second];
    if (rec.n != n || rec.n_active != n_active)
      throw ConfigError("bid CSV: inconsistent n or n_active within auction " + f0);
    rec.bids.push_back(b);
  }
  for (const AuctionRecord& rec : ds.records) {
    if (static_cast<int>(rec.bids.size()) != rec.n_active)
      throw ConfigError("bid CSV: bid rows do not match n_active for some auction");
    if (rec.n_active < 2) throw ConfigError("bid CSV: auctions must have at least two bids");
    if (rec.n_active > rec.n) throw ConfigError("bid CSV: more actives than potential bidders");
  }
  return ds;
}

}  // namespace auction
