#include "auction/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "auction/errors.hpp"

namespace auction {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

namespace {

double require_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError(where + ": missing numeric \"" + key + "\"");
  return j[key].get<double>();
}

std::string require_string(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw ConfigError(where + ": missing string \"" + key + "\"");
  return j[key].get<std::string>();
}

}  // namespace

CopulaModel copula_from_json(const json& j) {
  reject_unknown_keys(j, {"family", "theta"}, "copula");
  const CopulaFamily family = family_from_name(require_string(j, "family", "copula"));
  if (family == CopulaFamily::Frank || family == CopulaFamily::Joe) {
    try {
      return CopulaModel::make(family, require_number(j, "theta", "copula"));
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("copula: ") + e.what());
    }
  }
  if (j.contains("theta"))
    throw ConfigError("copula: " + family_name(family) + " takes no theta");
  return CopulaModel::make(family, 0.0);
}

ValueDistribution values_from_json(const json& j, const std::string& base_dir) {
  const std::string kind = require_string(j, "kind", "values");
  if (kind == "uniform") {
    reject_unknown_keys(j, {"kind", "lower", "upper"}, "values");
    return ValueDistribution::uniform(require_number(j, "lower", "values"),
                                      require_number(j, "upper", "values"));
  }
  if (kind == "scaled_beta") {
    reject_unknown_keys(j, {"kind", "alpha", "beta", "lower", "upper"}, "values");
    return ValueDistribution::scaled_beta(
        require_number(j, "alpha", "values"), require_number(j, "beta", "values"),
        require_number(j, "lower", "values"), require_number(j, "upper", "values"));
  }
  if (kind == "grid") {
    reject_unknown_keys(j, {"kind", "csv", "v", "F"}, "values");
    if (j.contains("csv")) {
      std::filesystem::path p = j["csv"].get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      return ValueDistribution::grid_from_csv(p.string());
    }
    if (!j.contains("v") || !j.contains("F"))
      throw ConfigError("values: grid kind needs either \"csv\" or inline \"v\" and \"F\"");
    const auto vv = j["v"].get<std::vector<double>>();
    const auto ff = j["F"].get<std::vector<double>>();
    Eigen::ArrayXd v = Eigen::Map<const Eigen::ArrayXd>(vv.data(), vv.size());
    Eigen::ArrayXd f = Eigen::Map<const Eigen::ArrayXd>(ff.data(), ff.size());
    return ValueDistribution::grid_monotone(v, f);
  }
  throw ConfigError("values: unknown kind \"" + kind + "\"");
}

AuctionFormat format_from_json(const json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "hard") return HardBidRequirement{};
    if (name == "soft") return SoftBidRequirement{};
    throw ConfigError("format: expected \"hard\", \"soft\", or {\"reserve\": r}");
  }
  reject_unknown_keys(j, {"reserve"}, "format");
  if (!j.contains("reserve")) throw ConfigError("format: object form needs \"reserve\"");
  return ReservePrice{j["reserve"].get<double>()};
}

AuctionEnvironment environment_from_json(const json& j, const std::string& base_dir) {
  reject_unknown_keys(j, {"n", "kappa", "format", "values", "copula"}, "environment");
  for (const char* key : {"n", "kappa", "format", "values", "copula"})
    if (!j.contains(key))
      throw ConfigError(std::string("environment: missing \"") + key + "\"");
  AuctionEnvironment env{j["n"].get<int>(), j["kappa"].get<double>(),
                         format_from_json(j["format"]),
                         values_from_json(j["values"], base_dir),
                         copula_from_json(j["copula"])};
  env.validate();
  return env;
}

json solution_to_json(const EquilibriumSolution& sol) {
  json roots = json::array();
  for (const auto& r : sol.roots) roots.push_back({{"p", r.p}, {"stable", r.stable}});
  const char* corner = sol.corner == EntryCorner::None
                           ? "none"
                           : (sol.corner == EntryCorner::FullEntry ? "full_entry" : "no_entry");
  return json{{"roots", roots},
              {"selected_p", sol.selected_p},
              {"corner", corner},
              {"full_entry_ambiguous", sol.full_entry_ambiguous},
              {"reserve_multiplicity_violation", sol.reserve_multiplicity_violation}};
}

json estimation_to_json(const EstimationResult& res) {
  json p_hat = json::object();
  for (const auto& [n, p] : res.p_hat) p_hat[std::to_string(n)] = p;
  json kappa = json::object();
  for (const auto& [n, k] : res.kappa_hat) kappa[std::to_string(n)] = k;
  json cells = json::array();
  for (const auto& c : res.cells)
    cells.push_back({{"n", c.n},
                     {"auctions", c.auctions},
                     {"bids", c.bids},
                     {"r_hat", c.r_hat},
                     {"p_hat", c.p_hat},
                     {"bid_sd", c.bid_sd},
                     {"bandwidth", c.bandwidth},
                     {"inversion_fraction", c.inversion_fraction}});
  return json{{"p_hat", p_hat},
              {"theta_hat", res.theta_hat},
              {"theta_se", res.theta_se},
              {"theta_tilde", res.theta_tilde},
              {"rho_hat", res.rho_hat},
              {"rho_ci", {res.rho_ci_lo, res.rho_ci_hi}},
              {"v_grid", std::vector<double>(res.v_grid.data(), res.v_grid.data() + res.v_grid.size())},
              {"f_grid", std::vector<double>(res.f_grid.data(), res.f_grid.data() + res.f_grid.size())},
              {"kappa_hat", kappa},
              {"support", {res.support_lo, res.support_hi}},
              {"objective", res.objective},
              {"bootstrap_replicates", res.bootstrap_replicates},
              {"undersmooth", res.undersmooth},
              {"cells", cells},
              {"warnings", res.warnings}};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // e.what() carries the line/column diagnostic
    throw ConfigError(std::string("config parse failure in ") + path + ": " + e.what());
  }
}

void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write output file: " + tmp);
    out << contents;
    if (!out.good()) throw ConfigError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot move " + tmp + " into place: " + ec.message());
}

}  // namespace auction
