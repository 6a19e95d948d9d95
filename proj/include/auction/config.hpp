#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "auction/environment.hpp"
#include "auction/estimate.hpp"
#include "auction/outcomes.hpp"
#include "auction/equilibrium.hpp"

namespace auction {

// Strict parsers: unknown keys are rejected so config typos fail loudly.
CopulaModel copula_from_json(const nlohmann::json& j);
ValueDistribution values_from_json(const nlohmann::json& j, const std::string& base_dir = "");
AuctionFormat format_from_json(const nlohmann::json& j);
AuctionEnvironment environment_from_json(const nlohmann::json& j,
                                         const std::string& base_dir = "");

nlohmann::json solution_to_json(const EquilibriumSolution& sol);
nlohmann::json estimation_to_json(const EstimationResult& res);

nlohmann::json load_json_file(const std::string& path);

// temp file + rename, so partially written outputs never appear
void atomic_write(const std::string& path, const std::string& contents);

void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& where);

}  // namespace auction
