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

#include <algorithm>
#include <cmath>
#include <limits>

namespace temarket::auction {
namespace {

constexpr double kNoWillingness = -std::numeric_limits<double>::infinity();

using Json = nlohmann::ordered_json;

void require(bool ok, char const *stage, std::string const &what)
{
  if (!ok)
  {
    throw SchemaError(std::string(stage) + " payload: " + what);
  }
}

void require_header(Json const &payload, char const *stage, std::size_t fields)
{
  require(payload.is_object(), stage, "must be an object");
  require(payload.contains("stage") && payload["stage"] == stage, stage,
          std::string("stage must be \"") + stage + "\"");
  require(payload.contains("sender") && payload["sender"].is_string(), stage,
          "sender must be a string");
  require(payload.contains("receiver") && payload["receiver"].is_string(), stage,
          "receiver must be a string");
  require(payload.contains("timestep") && payload["timestep"].is_number_integer(), stage,
          "timestep must be an integer");
  require(payload.size() == fields, stage, "unexpected fields");
}

double number(Json const &payload, char const *stage, char const *key)
{
  require(payload.contains(key) && payload[key].is_number(), stage,
          std::string(key) + " must be a number");
  double const v = payload[key].get<double>();
  require(std::isfinite(v) && v >= 0.0, stage, std::string(key) + " must be finite and >= 0");
  return v;
}

}  // namespace

char const *to_string(ClearingConvention convention) noexcept
{
  switch (convention)
  {
  case ClearingConvention::kStepPartial:
    return "step-partial";
  case ClearingConvention::kInterpolatedBlock:
    return "interpolated-block";
  }
  return "unknown";
}

std::optional<ClearingConvention> parse_convention(std::string const &name) noexcept
{
  if (name == "step-partial")
  {
    return ClearingConvention::kStepPartial;
  }
  if (name == "interpolated-block")
  {
    return ClearingConvention::kInterpolatedBlock;
  }
  return std::nullopt;
}

WillingnessToPay::WillingnessToPay(curve::PriceDemandCurve const &demand,
                                   ClearingConvention             convention)
  : points_(demand.points())
  , convention_(convention)
{}

double WillingnessToPay::value(double q, bool from_right) const noexcept
{
  auto const &pts = points_;
  if (from_right ? q < pts.front().quantity_kw : q <= pts.front().quantity_kw)
  {
    return pts.front().price_cents;
  }
  for (std::size_t i = 1; i < pts.size(); ++i)
  {
    bool const covers = from_right ? pts[i].quantity_kw > q : pts[i].quantity_kw >= q;
    if (!covers)
    {
      continue;
    }
    if (convention_ == ClearingConvention::kStepPartial)
    {
      return pts[i].price_cents;
    }
    auto const &lo = pts[i - 1];
    auto const &hi = pts[i];
    double const frac = (q - lo.quantity_kw) / (hi.quantity_kw - lo.quantity_kw);
    return lo.price_cents + (hi.price_cents - lo.price_cents) * frac;
  }
  return kNoWillingness;
}

double WillingnessToPay::left(double q) const noexcept
{
  return value(q, false);
}

double WillingnessToPay::right(double q) const noexcept
{
  return value(q, true);
}

double WillingnessToPay::reach(double price) const noexcept
{
  auto const &pts  = points_;
  std::size_t last = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i)
  {
    if (pts[i].price_cents >= price - kPriceTolerance)
    {
      last = i;
    }
  }
  if (last == pts.size())
  {
    return 0.0;
  }
  if (convention_ == ClearingConvention::kStepPartial || last + 1 == pts.size())
  {
    return pts[last].quantity_kw;
  }
  auto const  &lo   = pts[last];
  auto const  &hi   = pts[last + 1];
  double const drop = std::max(lo.price_cents - price, 0.0);
  return lo.quantity_kw + drop / (lo.price_cents - hi.price_cents) * (hi.quantity_kw - lo.quantity_kw);
}

SupplyCurve aggregate_bids(std::vector<BidOffer> const &offers)
{
  SupplyCurve supply;
  for (auto const &o : offers)
  {
    if (supply.asker_id.empty())
    {
      supply.asker_id = o.asker_id;
    }
    else if (o.asker_id != supply.asker_id)
    {
      throw AuctionError("offers address different askers: '" + supply.asker_id + "' and '" +
                         o.asker_id + "'");
    }
    if (!(o.quantity_kw > 0.0) || !std::isfinite(o.quantity_kw))
    {
      throw AuctionError("offer from '" + o.bidder_id + "' must have a positive quantity");
    }
    if (!(o.price_cents >= 0.0) || !std::isfinite(o.price_cents))
    {
      throw AuctionError("offer from '" + o.bidder_id + "' must have a non-negative price");
    }
    auto same = std::find_if(supply.segments.begin(), supply.segments.end(), [&](auto const &s) {
      return s.bidder_id == o.bidder_id && s.price_cents == o.price_cents;
    });
    if (same != supply.segments.end())
    {
      same->quantity_kw += o.quantity_kw;
    }
    else
    {
      supply.segments.push_back(SupplySegment{o.bidder_id, o.quantity_kw, o.price_cents});
    }
  }
  std::stable_sort(supply.segments.begin(), supply.segments.end(),
                   [](SupplySegment const &a, SupplySegment const &b) {
                     if (a.price_cents != b.price_cents)
                     {
                       return a.price_cents < b.price_cents;
                     }
                     return a.bidder_id < b.bidder_id;
                   });
  return supply;
}

Equilibrium find_equilibrium(SupplyCurve const &supply, curve::PriceDemandCurve const &demand,
                             ClearingConvention convention)
{
  WillingnessToPay const wtp(demand, convention);
  Equilibrium            eq;
  eq.dispatch.assign(supply.segments.size(), 0.0);

  double                start = 0.0;
  std::optional<double> supply_left;
  for (std::size_t i = 0; i < supply.segments.size(); ++i)
  {
    auto const  &seg = supply.segments[i];
    double const end = start + seg.quantity_kw;
    if (seg.price_cents > wtp.right(start) + kPriceTolerance)
    {
      break;
    }
    double const cross = std::clamp(wtp.reach(seg.price_cents), start, end);
    if (seg.price_cents <= wtp.left(end) + kPriceTolerance || end - cross <= kPriceTolerance)
    {
      eq.dispatch[i] = seg.quantity_kw;
      supply_left    = seg.price_cents;
      start          = end;
      continue;
    }
    if (cross - start <= kPriceTolerance)
    {
      break;
    }
    eq.intersection_kw = cross;
    eq.price_cents     = seg.price_cents;
    if (convention == ClearingConvention::kStepPartial)
    {
      eq.dispatch[i] = cross - start;
    }
    return eq;
  }

  eq.intersection_kw = start;
  if (start > kPriceTolerance && supply_left)
  {
    eq.price_cents = std::max(*supply_left, wtp.right(start));
  }
  return eq;
}

ClearingResult clear_spsba(std::vector<BidOffer> const &offers, curve::PriceDemandCurve const &demand,
                           ClearingConvention convention)
{
  ClearingResult result;
  result.asker_id = demand.asker_id();
  result.timestep = demand.timestep();
  for (auto const &o : offers)
  {
    if (o.asker_id != demand.asker_id())
    {
      throw AuctionError("offer from '" + o.bidder_id + "' addresses '" + o.asker_id +
                         "', not '" + demand.asker_id() + "'");
    }
  }
  if (offers.empty())
  {
    return result;
  }

  SupplyCurve const supply = aggregate_bids(offers);
  Equilibrium const eq     = find_equilibrium(supply, demand, convention);
  result.intersection_quantity_kw = eq.intersection_kw;
  result.equilibrium_price_cents  = eq.price_cents;

  std::vector<std::string> bidders;
  for (auto const &seg : supply.segments)
  {
    if (std::find(bidders.begin(), bidders.end(), seg.bidder_id) == bidders.end())
    {
      bidders.push_back(seg.bidder_id);
    }
  }
  std::sort(bidders.begin(), bidders.end());

  WillingnessToPay const wtp(demand, convention);
  for (auto const &bidder : bidders)
  {
    double                cleared = 0.0;
    std::optional<double> first_start;
    double                position = 0.0;
    for (std::size_t i = 0; i < supply.segments.size(); ++i)
    {
      if (supply.segments[i].bidder_id == bidder && eq.dispatch[i] > 0.0)
      {
        cleared += eq.dispatch[i];
        if (!first_start)
        {
          first_start = position;
        }
      }
      position += supply.segments[i].quantity_kw;
    }
    if (!(cleared > 0.0))
    {
      continue;
    }

    std::vector<BidOffer> others;
    std::copy_if(offers.begin(), offers.end(), std::back_inserter(others),
                 [&](BidOffer const &o) { return o.bidder_id != bidder; });
    std::optional<double> price;
    if (!others.empty())
    {
      price = find_equilibrium(aggregate_bids(others), demand, convention).price_cents;
    }
    Transaction t;
    t.bidder_id           = bidder;
    t.cleared_quantity_kw = cleared;
    if (price)
    {
      t.clearing_price_cents = *price;
    }
    else
    {
      t.clearing_price_cents = wtp.right(*first_start);
      t.fallback_price       = true;
    }
    result.transactions.push_back(t);
  }

  for (auto const &t : result.transactions)
  {
    result.equilibrium_quantity_kw += t.cleared_quantity_kw;
  }
  return result;
}

nlohmann::ordered_json clearing_to_message(ClearingResult const &result, Transaction const &t)
{
  Json msg;
  msg["stage"]                = "market-clearing";
  msg["sender"]               = result.asker_id;
  msg["receiver"]             = t.bidder_id;
  msg["timestep"]             = result.timestep;
  msg["cleared_quantity_kw"]  = t.cleared_quantity_kw;
  msg["clearing_price_cents"] = t.clearing_price_cents;
  return msg;
}

ClearingNotice clearing_from_message(nlohmann::ordered_json const &payload)
{
  char const *stage = "market-clearing";
  require_header(payload, stage, 6);
  ClearingNotice n;
  n.asker_id             = payload["sender"].get<std::string>();
  n.bidder_id            = payload["receiver"].get<std::string>();
  n.timestep             = payload["timestep"].get<std::int64_t>();
  n.cleared_quantity_kw  = number(payload, stage, "cleared_quantity_kw");
  n.clearing_price_cents = number(payload, stage, "clearing_price_cents");
  return n;
}

nlohmann::ordered_json offer_to_message(BidOffer const &offer, std::int64_t timestep)
{
  Json msg;
  msg["stage"]       = "bid-offer";
  msg["sender"]      = offer.bidder_id;
  msg["receiver"]    = offer.asker_id;
  msg["timestep"]    = timestep;
  msg["quantity_kw"] = offer.quantity_kw;
  msg["price_cents"] = offer.price_cents;
  return msg;
}

BidOffer offer_from_message(nlohmann::ordered_json const &payload, std::int64_t *timestep)
{
  char const *stage = "bid-offer";
  require_header(payload, stage, 6);
  BidOffer o;
  o.bidder_id   = payload["sender"].get<std::string>();
  o.asker_id    = payload["receiver"].get<std::string>();
  o.quantity_kw = number(payload, stage, "quantity_kw");
  o.price_cents = number(payload, stage, "price_cents");
  if (timestep)
  {
    *timestep = payload["timestep"].get<std::int64_t>();
  }
  return o;
}

}  // namespace temarket::auction
