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

#include "temarket/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace temarket::oracle {
namespace {

using auction::ClearingConvention;

constexpr double kTol = auction::kPriceTolerance;

struct Block
{
  std::string bidder;
  double      quantity = 0.0;
  double      price    = 0.0;
  double      begin    = 0.0;  ///< cumulative quantity before the block
  double      end      = 0.0;
};

std::vector<Block> blocks_of(std::vector<BidOffer> const &offers)
{
  std::map<std::pair<double, std::string>, double> merged;
  for (auto const &o : offers)
  {
    merged[{o.price_cents, o.bidder_id}] += o.quantity_kw;
  }
  std::vector<Block> blocks;
  double             cum = 0.0;
  for (auto const &[key, q] : merged)
  {
    Block b;
    b.bidder   = key.second;
    b.quantity = q;
    b.price    = key.first;
    b.begin    = cum;
    b.end      = cum + q;
    cum        = b.end;
    blocks.push_back(b);
  }
  return blocks;
}

/// Willingness to pay strictly inside a demand step (or at q when from_right
/// is set, taking the limit from above).
double pay(std::vector<curve::CurvePoint> const &pts, ClearingConvention conv, double q)
{
  if (q < pts[0].quantity_kw)
  {
    return pts[0].price_cents;
  }
  std::size_t i = 0;
  while (i < pts.size() && !(pts[i].quantity_kw > q))
  {
    ++i;
  }
  if (i == pts.size())
  {
    return -std::numeric_limits<double>::infinity();
  }
  if (conv == ClearingConvention::kStepPartial)
  {
    return pts[i].price_cents;
  }
  double const frac = (q - pts[i - 1].quantity_kw) / (pts[i].quantity_kw - pts[i - 1].quantity_kw);
  return pts[i - 1].price_cents + (pts[i].price_cents - pts[i - 1].price_cents) * frac;
}

/// Quantity at which the demand side falls to `price`.
double inverse(std::vector<curve::CurvePoint> const &pts, ClearingConvention conv, double price)
{
  std::size_t n = 0;
  while (n < pts.size() && pts[n].price_cents >= price - kTol)
  {
    ++n;
  }
  if (n == 0)
  {
    return 0.0;
  }
  auto const &lo = pts[n - 1];
  if (conv == ClearingConvention::kStepPartial || n == pts.size())
  {
    return lo.quantity_kw;
  }
  auto const &hi = pts[n];
  return lo.quantity_kw + std::max(lo.price_cents - price, 0.0) /
                              (lo.price_cents - hi.price_cents) *
                              (hi.quantity_kw - lo.quantity_kw);
}

struct Outcome
{
  std::vector<Block>    blocks;
  std::vector<double>   dispatch;
  double                intersection = 0.0;
  std::optional<double> price;
};

Outcome enumerate(std::vector<BidOffer> const &offers, std::vector<curve::CurvePoint> const &pts,
                  ClearingConvention conv)
{
  Outcome out;
  out.blocks = blocks_of(offers);
  out.dispatch.assign(out.blocks.size(), 0.0);

  std::vector<double> marks{0.0};
  for (auto const &b : out.blocks)
  {
    marks.push_back(b.end);
    marks.push_back(inverse(pts, conv, b.price));
  }
  for (auto const &p : pts)
  {
    marks.push_back(p.quantity_kw);
  }
  std::sort(marks.begin(), marks.end());
  std::vector<double> cuts;
  for (double m : marks)
  {
    if (cuts.empty() || m - cuts.back() > kTol)
    {
      cuts.push_back(m);
    }
  }

  // Q* is the left end of the first interval that does not trade.
  double q_star = cuts.back();
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
  {
    double const mid   = 0.5 * (cuts[k] + cuts[k + 1]);
    auto const   block = std::find_if(out.blocks.begin(), out.blocks.end(),
                                      [&](Block const &b) { return b.begin < mid && mid <= b.end; });
    if (block == out.blocks.end() || block->price > pay(pts, conv, mid) + kTol)
    {
      q_star = cuts[k];
      break;
    }
  }

  // Snap Q* to a block boundary within tolerance.
  std::optional<std::size_t> boundary;  // number of whole blocks before Q*
  if (q_star <= kTol)
  {
    boundary = 0;
  }
  for (std::size_t j = 0; j < out.blocks.size(); ++j)
  {
    if (std::abs(out.blocks[j].end - q_star) <= kTol)
    {
      boundary = j + 1;
    }
  }
  if (!boundary && !out.blocks.empty() && q_star > out.blocks.back().end)
  {
    boundary = out.blocks.size();
  }

  if (boundary)
  {
    std::size_t const n = *boundary;
    for (std::size_t j = 0; j < n; ++j)
    {
      out.dispatch[j] = out.blocks[j].quantity;
    }
    out.intersection = n == 0 ? 0.0 : out.blocks[n - 1].end;
    if (n > 0 && out.intersection > kTol)
    {
      double const above = pay(pts, conv, out.intersection);
      out.price          = std::max(out.blocks[n - 1].price, above);
    }
    return out;
  }

  std::size_t j = 0;
  while (!(out.blocks[j].begin < q_star && q_star < out.blocks[j].end))
  {
    ++j;
  }
  for (std::size_t i = 0; i < j; ++i)
  {
    out.dispatch[i] = out.blocks[i].quantity;
  }
  if (conv == ClearingConvention::kStepPartial)
  {
    out.dispatch[j] = q_star - out.blocks[j].begin;
  }
  out.intersection = q_star;
  out.price        = out.blocks[j].price;
  return out;
}

}  // namespace

auction::ClearingResult clear_by_enumeration(std::vector<BidOffer> const   &offers,
                                             curve::PriceDemandCurve const &demand,
                                             ClearingConvention             convention)
{
  auction::ClearingResult result;
  result.asker_id = demand.asker_id();
  result.timestep = demand.timestep();
  if (offers.empty())
  {
    return result;
  }
  auto const &pts = demand.points();
  auto const  all = enumerate(offers, pts, convention);
  result.intersection_quantity_kw = all.intersection;
  result.equilibrium_price_cents  = all.price;

  std::map<std::string, std::pair<double, std::optional<double>>> by_bidder;
  for (std::size_t j = 0; j < all.blocks.size(); ++j)
  {
    if (!(all.dispatch[j] > 0.0))
    {
      continue;
    }
    auto &[cleared, first] = by_bidder[all.blocks[j].bidder];
    cleared += all.dispatch[j];
    if (!first)
    {
      first = all.blocks[j].begin;
    }
  }
  for (auto const &[bidder, info] : by_bidder)
  {
    std::vector<BidOffer> rest;
    for (auto const &o : offers)
    {
      if (o.bidder_id != bidder)
      {
        rest.push_back(o);
      }
    }
    auction::Transaction t;
    t.bidder_id           = bidder;
    t.cleared_quantity_kw = info.first;
    std::optional<double> second;
    if (!rest.empty())
    {
      second = enumerate(rest, pts, convention).price;
    }
    if (second)
    {
      t.clearing_price_cents = *second;
    }
    else
    {
      t.clearing_price_cents = pay(pts, convention, *info.second);
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

}  // namespace temarket::oracle
