#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 The temarket Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------


#include "temarket/bid_offer.hpp"
#include "temarket/demand_curve.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace temarket::auction {

/// Price comparisons treat values this close as equal.
inline constexpr double kPriceTolerance = 1e-9;

/// How a demand curve is read as willingness to pay and how the straddling
/// block is handled.
enum class ClearingConvention
{
  /// Step willingness to pay; the marginal block is dispatched up to the
  /// intersection.
  kStepPartial,
  /// Willingness to pay interpolated linearly between curve points (flat up
  /// to the first point); only whole blocks left of the intersection clear.
  kInterpolatedBlock,
};

char const                       *to_string(ClearingConvention convention) noexcept;
std::optional<ClearingConvention> parse_convention(std::string const &name) noexcept;

struct SupplySegment
{
  std::string bidder_id;
  double      quantity_kw = 0.0;
  double      price_cents = 0.0;

  bool operator==(SupplySegment const &) const = default;
};

struct SupplyCurve
{
  std::string                asker_id;
  std::vector<SupplySegment> segments;
};

struct Transaction
{
  std::string bidder_id;
  double      cleared_quantity_kw  = 0.0;
  double      clearing_price_cents = 0.0;
  bool        fallback_price       = false;  ///< priced by the reserve rule

  bool operator==(Transaction const &) const = default;
};

struct ClearingResult
{
  std::string              asker_id;
  std::int64_t             timestep               = 0;
  double                   equilibrium_quantity_kw = 0.0;  ///< dispatched total
  double                   intersection_quantity_kw = 0.0;
  std::optional<double>    equilibrium_price_cents;
  std::vector<Transaction> transactions;

  bool operator==(ClearingResult const &) const = default;
};

/// Willingness to pay as seen by the clearing walk.
class WillingnessToPay
{
public:
  WillingnessToPay(curve::PriceDemandCurve const &demand, ClearingConvention convention);

  /// Limits from the left and right at cumulative quantity q; minus infinity
  /// past the last point.
  double left(double q) const noexcept;
  double right(double q) const noexcept;

  /// Largest quantity at which willingness to pay still reaches `price`.
  double reach(double price) const noexcept;

private:
  double value(double q, bool from_right) const noexcept;

  std::vector<curve::CurvePoint> points_;
  ClearingConvention             convention_;
};

/// Merges same-price offers per bidder and sorts by (price, bidder id).
/// Throws AuctionError when offers target different askers or a quantity is
/// not positive.
SupplyCurve aggregate_bids(std::vector<BidOffer> const &offers);

struct Equilibrium
{
  double                intersection_kw = 0.0;
  std::optional<double> price_cents;  ///< unset when nothing trades
  std::vector<double>   dispatch;     ///< per supply segment
};

Equilibrium find_equilibrium(SupplyCurve const &supply, curve::PriceDemandCurve const &demand,
                             ClearingConvention convention = ClearingConvention::kStepPartial);

/// Clears one asker's auction and prices each dispatched bidder at the
/// equilibrium price of the same auction without that bidder.
ClearingResult clear_spsba(std::vector<BidOffer> const &offers, curve::PriceDemandCurve const &demand,
                           ClearingConvention convention = ClearingConvention::kStepPartial);

/// {"stage":"market-clearing","sender":asker,"receiver":bidder,...}
nlohmann::ordered_json clearing_to_message(ClearingResult const &result, Transaction const &t);

struct ClearingNotice
{
  std::string  asker_id;
  std::string  bidder_id;
  std::int64_t timestep = 0;
  double       cleared_quantity_kw  = 0.0;
  double       clearing_price_cents = 0.0;
};

ClearingNotice clearing_from_message(nlohmann::ordered_json const &payload);

/// {"stage":"bid-offer","sender":bidder,"receiver":asker,...}
nlohmann::ordered_json offer_to_message(BidOffer const &offer, std::int64_t timestep);
BidOffer               offer_from_message(nlohmann::ordered_json const &payload,
                                          std::int64_t                 *timestep = nullptr);

}  // namespace temarket::auction
