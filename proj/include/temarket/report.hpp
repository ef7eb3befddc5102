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


#include "temarket/auction.hpp"
#include "temarket/bus.hpp"
#include "temarket/demand_curve.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace temarket::market {

/// One asker's view of one round.
struct AuctionRecord
{
  std::string                            asker_id;
  std::optional<curve::PriceDemandCurve> curve;  ///< unset when the asker faulted
  std::vector<BidOffer>                  offers;
  auction::ClearingResult                result;

  /// Demand left uncovered: the curve's largest quantity minus what cleared.
  double unserved_kw() const;
};

struct RoundRecord
{
  std::uint64_t              round = 0;
  std::vector<AuctionRecord> auctions;  ///< sorted by asker id
};

struct MarketReport
{
  std::string                 scenario;
  std::string                 mode;
  std::uint64_t               seed = 0;
  auction::ClearingConvention clearing = auction::ClearingConvention::kStepPartial;
  bool                        complete = true;
  std::string                 error;  ///< why the run stopped early
  std::vector<RoundRecord>    rounds;
  std::vector<std::string>    events;  ///< faults, abstentions, fallbacks
  std::vector<bus::LogEntry>  messages;
  std::vector<bus::AuditRecord> audit;

  /// round,asker,kind,bidder,quantity_kw,price_cents
  void write_csv(std::ostream &out) const;

  /// report.csv, messages.ndjson, audit.ndjson and optionally one SVG per asker.
  void write(std::string const &dir, bool svg) const;

  bus::Json summary_json() const;
};

/// Bar chart of offers, dispatch and the demand curve for one auction.
std::string auction_svg(AuctionRecord const &record);

/// Shortest decimal text that round-trips the double.
std::string format_number(double value);

}  // namespace temarket::market
