#pragma once

#include <string>
#include <variant>

#include "auction/copula.hpp"
#include "auction/marginal.hpp"

namespace auction {

struct HardBidRequirement {};            // award needs >= 2 bids, no reserve
struct SoftBidRequirement {};            // sole bid races a government cost draw
struct ReservePrice { double r = 1.0; }; // award needs >= 1 bid below r

using AuctionFormat = std::variant<HardBidRequirement, SoftBidRequirement, ReservePrice>;

// One market configuration: n potential bidders facing entry cost kappa,
// costs distributed per `values` and tied to signal ranks through `copula`.
struct AuctionEnvironment {
  int n;
  double kappa;
  AuctionFormat format;
  ValueDistribution values;
  CopulaModel copula;

  bool is_hard() const { return std::holds_alternative<HardBidRequirement>(format); }
  bool is_soft() const { return std::holds_alternative<SoftBidRequirement>(format); }
  bool is_reserve() const { return std::holds_alternative<ReservePrice>(format); }
  double reserve() const { return std::get<ReservePrice>(format).r; }

  // v-bar under the bid requirements, r under a reserve price
  double bidding_upper() const { return is_reserve() ? reserve() : values.upper(); }

  void validate() const;
  AuctionEnvironment with_theta(double theta) const;
  AuctionEnvironment with_format(const AuctionFormat& f) const;
};

std::string format_name(const AuctionFormat& f);

}  // namespace auction
