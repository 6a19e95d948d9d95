#include <map>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "auction/config.hpp"
#include "auction/errors.hpp"
#include "auction/estimate.hpp"
#include "auction/equilibrium.hpp"
#include "auction/outcomes.hpp"
#include "auction/parallel.hpp"
#include "auction/simulate.hpp"

namespace {

using auction::AuctionEnvironment;
using nlohmann::json;

constexpr const char* kVersion = "auction 0.1.0";

std::string build_fingerprint() {
  std::ostringstream out;
  out << kVersion << " (" <<
#if defined(__clang__)
      "clang " << __clang_major__ << "." << __clang_minor__
#elif defined(__GNUC__)
      "gcc " << __GNUC__ << "." << __GNUC_MINOR__
#else
      "unknown compiler"
#endif
      << ", c++" << (__cplusplus / 100 % 100) << ")";
  return out.str();
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string base_dir_of(const std::string& path) {
  return std::filesystem::path(path).parent_path().string();
}

int run_equilibrium(const std::string& config_path, const std::string& out_json,
                    const std::string& out_profit, int profit_points) {
  const json cfg = auction::load_json_file(config_path);
  auction::reject_unknown_keys(cfg, {"n", "kappa", "format", "values", "copula", "scan_points"},
                               "equilibrium config");
  const AuctionEnvironment env = auction::environment_from_json(cfg, base_dir_of(config_path));
  const int scan = cfg.value("scan_points", 2000);
  const auction::EquilibriumSolution sol = auction::solve_entry(env, scan);

  auction::atomic_write(out_json, auction::solution_to_json(sol).dump(2) + "\n");
  if (!out_profit.empty()) {
    std::ostringstream csv;
    csv << "p,profit\n";
    for (int i = 1; i <= profit_points; ++i) {
      const double p = static_cast<double>(i) / profit_points;
      csv << format_double(p) << "," << format_double(auction::entrant_profit(env, p, p))
          << "\n";
    }
    auction::atomic_write(out_profit, csv.str());
  }
  std::cout << "equilibrium: selected_p=" << sol.selected_p << " roots=" << sol.roots.size()
            << "\n";
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_csv,
                 const std::string& latent_csv) {
  const json cfg = auction::load_json_file(config_path);
  auction::reject_unknown_keys(
      cfg, {"markets", "format", "values", "copula", "auctions_per_n", "seed"},
      "simulate config");
  for (const char* key : {"markets", "format", "values", "copula", "auctions_per_n", "seed"})
    if (!cfg.contains(key))
      throw auction::ConfigError(std::string("simulate config: missing \"") + key + "\"");
  const auto values = auction::values_from_json(cfg["values"], base_dir_of(config_path));
  const auto copula = auction::copula_from_json(cfg["copula"]);
  const auto format = auction::format_from_json(cfg["format"]);
  std::vector<AuctionEnvironment> envs;
  for (const json& market : cfg["markets"]) {
    auction::reject_unknown_keys(market, {"n", "kappa"}, "simulate market");
    AuctionEnvironment env{market["n"].get<int>(), market["kappa"].get<double>(), format,
                           values, copula};
    env.validate();
    envs.push_back(std::move(env));
  }
  auction::SimulateOptions opts;
  opts.auctions_per_env = cfg["auctions_per_n"].get<int>();
  opts.seed = cfg["seed"].get<std::uint64_t>();
  opts.with_latent = !latent_csv.empty();
  const auction::AuctionDataset ds = auction::simulate_dataset(envs, opts);
  auction::write_bids_csv(ds, out_csv);
  if (!latent_csv.empty()) auction::write_latent_csv(ds, latent_csv);
  std::cout << "simulate: auctions=" << ds.records.size() << " -> " << out_csv << "\n";
  return 0;
}

int run_estimate(const std::string& data_csv, const std::string& format,
                 const std::string& family, const std::string& theta_grid, int bootstrap,
                 std::uint64_t seed, const std::string& bandwidth, const std::string& out_json,
                 const std::string& out_fgrid, const std::string& out_cells) {
  auction::EstimateOptions opts;
  if (format == "hard")
    opts.format = auction::BidFormat::Hard;
  else if (format == "soft")
    opts.format = auction::BidFormat::Soft;
  else
    throw auction::ConfigError("estimate: --format must be hard or soft");
  opts.family = auction::family_from_name(family);
  if (opts.family != auction::CopulaFamily::Frank && opts.family != auction::CopulaFamily::Joe)
    throw auction::ConfigError("estimate: --copula must be frank or joe");
  if (bandwidth == "rot")
    opts.undersmooth = false;
  else if (bandwidth == "undersmooth")
    opts.undersmooth = true;
  else
    throw auction::ConfigError("estimate: --bandwidth must be rot or undersmooth");
  if (std::sscanf(theta_grid.c_str(), "%lf:%lf:%lf", &opts.theta_lo, &opts.theta_hi,
                  &opts.theta_step) != 3)
    throw auction::ConfigError("estimate: --theta-grid must be lo:hi:step");
  opts.bootstrap_replicates = bootstrap;
  opts.seed = seed;

  const auction::AuctionDataset ds = auction::read_bids_csv(data_csv);
  const auction::EstimationResult res = auction::gmm_estimate(ds, opts);

  auction::atomic_write(out_json, auction::estimation_to_json(res).dump(2) + "\n");
  if (!out_fgrid.empty()) {
    std::ostringstream csv;
    csv << "v,F\n";
    for (int j = 0; j < res.v_grid.size(); ++j)
      csv << format_double(res.v_grid(j)) << "," << format_double(res.f_grid(j)) << "\n";
    auction::atomic_write(out_fgrid, csv.str());
  }
  if (!out_cells.empty()) {
    std::ostringstream csv;
    csv << "n,auctions,bids,r_hat,p_hat,bid_sd,bandwidth,inversion_fraction,kappa_hat\n";
    for (const auto& c : res.cells)
      csv << c.n << "," << c.auctions << "," << c.bids << "," << format_double(c.r_hat) << ","
          << format_double(c.p_hat) << "," << format_double(c.bid_sd) << ","
          << format_double(c.bandwidth) << "," << format_double(c.inversion_fraction) << ","
          << format_double(res.kappa_hat.at(c.n)) << "\n";
    auction::atomic_write(out_cells, csv.str());
  }
  std::cout << "estimate: theta_hat=" << res.theta_hat << " rho_hat=" << res.rho_hat << "\n";
  return 0;
}

int run_counterfactual(const std::string& config_path, const std::string& out_csv) {
  const json cfg = auction::load_json_file(config_path);
  auction::reject_unknown_keys(
      cfg, {"formats", "reserve", "values", "copula_family", "n", "kappa", "theta", "rho",
            "scan_points"},
      "counterfactual config");
  const auto values = auction::values_from_json(cfg["values"], base_dir_of(config_path));
  const auto family = auction::family_from_name(cfg["copula_family"].get<std::string>());

  const auto expand_axis = [&](const json& axis, const std::string& where) {
    std::vector<double> out;
    if (axis.is_array()) {
      out = axis.get<std::vector<double>>();
    } else if (axis.is_object()) {
      auction::reject_unknown_keys(axis, {"from", "to", "step"}, where);
      const double from = axis["from"].get<double>();
      const double to = axis["to"].get<double>();
      const double step = axis["step"].get<double>();
      if (!(step > 0.0)) throw auction::ConfigError(where + ": step must be positive");
      for (double t = from; t <= to + 1e-12; t += step) out.push_back(std::min(t, to));
    } else {
      out.push_back(axis.get<double>());
    }
    return out;
  };

  std::vector<int> ns;
  for (double v : expand_axis(cfg["n"], "counterfactual n")) ns.push_back(static_cast<int>(v));
  const std::vector<double> kappas = expand_axis(cfg["kappa"], "counterfactual kappa");
  std::vector<double> thetas;
  if (cfg.contains("theta") == cfg.contains("rho"))
    throw auction::ConfigError("counterfactual: provide exactly one of \"theta\" or \"rho\"");
  if (cfg.contains("theta")) {
    thetas = expand_axis(cfg["theta"], "counterfactual theta");
  } else {
    for (double rho : expand_axis(cfg["rho"], "counterfactual rho"))
      thetas.push_back(auction::theta_from_rho(family, rho));
  }

  std::vector<auction::AuctionFormat> formats;
  for (const json& f : cfg["formats"]) {
    const std::string name = f.get<std::string>();
    if (name == "hard")
      formats.emplace_back(auction::HardBidRequirement{});
    else if (name == "soft")
      formats.emplace_back(auction::SoftBidRequirement{});
    else if (name == "reserve")
      formats.emplace_back(auction::ReservePrice{cfg.value("reserve", 1.0)});
    else
      throw auction::ConfigError("counterfactual: unknown format \"" + name + "\"");
  }
  const int scan = cfg.value("scan_points", 2000);

  struct Combo {
    auction::AuctionFormat format;
    int n;
    double kappa, theta, rho;
  };
  std::vector<Combo> combos;
  for (const auto& format : formats)
    for (int n : ns)
      for (double kappa : kappas)
        for (double theta : thetas) combos.push_back({format, n, kappa, theta, 0.0});
  // rho is a pure function of theta; fill it once per theta
  {
    std::map<double, double> rho_of;
    for (double theta : thetas)
      rho_of[theta] = auction::CopulaModel::make(family, theta).spearman_rho();
    for (Combo& c : combos) c.rho = rho_of[c.theta];
  }

  std::vector<std::string> rows(combos.size());
  auction::parallel_for(0, static_cast<long>(combos.size()), [&](long i) {
    const Combo& c = combos[i];
    AuctionEnvironment env{c.n, c.kappa, c.format, values,
                           auction::CopulaModel::make(family, c.theta)};
    env.validate();
    const auto sol = auction::solve_entry(env, scan);
    const auto rep = auction::outcome_report(env, sol.selected_p);
    std::ostringstream row;
    row << auction::format_name(c.format) << "," << c.n << "," << format_double(c.kappa) << ","
        << format_double(c.theta) << "," << format_double(c.rho) << "," << format_double(rep.p)
        << "," << format_double(rep.prob_bidding) << "," << format_double(rep.prob_failure)
        << ",";
    if (rep.expected_winning_bid) row << format_double(*rep.expected_winning_bid);
    row << "\n";
    rows[i] = row.str();
  });

  std::ostringstream csv;
  csv << "format,n,kappa,theta,rho,p,prob_bidding,prob_failure,expected_winning_bid\n";
  for (const std::string& row : rows) csv << row;
  auction::atomic_write(out_csv, csv.str());
  std::cout << "counterfactual: wrote " << out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Procurement auctions with endogenous selective entry: equilibria, "
               "simulation, estimation, counterfactuals"};
  app.set_version_flag("--version", build_fingerprint());
  app.require_subcommand(1);

  std::string config_path, out_json = "equilibrium.json", out_profit, data_csv;
  std::string out_csv = "out.csv", latent_csv;
  int profit_points = 201;

  CLI::App* eq = app.add_subcommand("equilibrium", "solve the entry equilibrium");
  eq->add_option("--config", config_path, "environment JSON")->required();
  eq->add_option("--out-json", out_json, "solution JSON path");
  eq->add_option("--out-profit", out_profit, "marginal-entrant profit curve CSV");
  eq->add_option("--points", profit_points, "profit curve resolution");

  std::string sim_out = "bids.csv";
  CLI::App* sim = app.add_subcommand("simulate", "simulate datasets at equilibrium");
  sim->add_option("--config", config_path, "simulation JSON")->required();
  sim->add_option("--out", sim_out, "bid CSV path");
  sim->add_option("--with-latent", latent_csv, "also write latent draws to this CSV");

  std::string fmt = "hard", family = "frank", theta_grid = "0.1:20:0.1", bw = "rot";
  std::string est_json = "estimate.json", out_fgrid, out_cells;
  int bootstrap = 200;
  std::uint64_t seed = 1;
  CLI::App* est = app.add_subcommand("estimate", "two-step GMM from bid data");
  est->add_option("--data", data_csv, "bid CSV (auction_id,n,n_active,bid)")->required();
  est->add_option("--format", fmt, "hard|soft");
  est->add_option("--copula", family, "frank|joe");
  est->add_option("--theta-grid", theta_grid, "lo:hi:step");
  est->add_option("--bootstrap", bootstrap, "bootstrap replicates (>= 200)");
  est->add_option("--seed", seed, "bootstrap seed");
  est->add_option("--bandwidth", bw, "rot|undersmooth");
  est->add_option("--out-json", est_json, "estimation result JSON");
  est->add_option("--out-fgrid", out_fgrid, "marginal CDF grid CSV");
  est->add_option("--out-cells", out_cells, "per-n diagnostics CSV");

  CLI::App* cf = app.add_subcommand("counterfactual", "sweep formats and primitives");
  cf->add_option("--config", config_path, "counterfactual JSON")->required();
  cf->add_option("--out", out_csv, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (eq->parsed()) return run_equilibrium(config_path, out_json, out_profit, profit_points);
    if (sim->parsed()) return run_simulate(config_path, sim_out, latent_csv);
    if (est->parsed())
      return run_estimate(data_csv, fmt, family, theta_grid, bootstrap, seed, bw, est_json,
                          out_fgrid, out_cells);
    if (cf->parsed()) return run_counterfactual(config_path, out_csv);
  } catch (const auction::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const auction::UnidentifiedError& e) {
    std::cerr << "unidentified model: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
