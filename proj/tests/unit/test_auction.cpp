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
#include "temarket/oracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace temarket;
using namespace temarket::auction;

namespace {

curve::PriceDemandCurve demo_curve(std::string const &asker = "A1")
{
  return curve::PriceDemandCurve(asker, 0, {{8.0, 0.4}, {1.6, 2.0}});
}

double on_grid(std::mt19937_64 &rng, int lo, int hi)
{
  return 0.05 * std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::vector<BidOffer> random_offers(std::mt19937_64 &rng, std::string const &asker)
{
  std::vector<BidOffer> offers;
  int const             n = std::uniform_int_distribution<int>(0, 5)(rng);
  for (int i = 0; i < n; ++i)
  {
    offers.push_back(BidOffer{"B" + std::to_string(std::uniform_int_distribution<int>(1, 3)(rng)),
                              asker, on_grid(rng, 1, 20), on_grid(rng, 0, 200)});
  }
  return offers;
}

curve::PriceDemandCurve random_curve(std::mt19937_64 &rng)
{
  int const                      n = std::uniform_int_distribution<int>(1, 4)(rng);
  std::vector<curve::CurvePoint> pts;
  double                         price = on_grid(rng, 120, 200);
  double                         q     = 0.0;
  for (int i = 0; i < n; ++i)
  {
    q += on_grid(rng, 1, 20);
    pts.push_back({price, q});
    price -= on_grid(rng, 1, 40);
    if (price < 0.0)
    {
      break;
    }
  }
  return curve::PriceDemandCurve("A1", 0, pts);
}

}  // namespace

TEST(Auction, ConventionNames)
{
  EXPECT_EQ(parse_convention("step-partial"), ClearingConvention::kStepPartial);
  EXPECT_EQ(parse_convention("interpolated-block"), ClearingConvention::kInterpolatedBlock);
  EXPECT_FALSE(parse_convention("uniform").has_value());
  EXPECT_STREQ(to_string(ClearingConvention::kInterpolatedBlock), "interpolated-block");
}

TEST(Auction, AggregateMergesSamePriceOffers)
{
  auto const s = aggregate_bids({{"B2", "A1", 0.5, 6.0},
                                 {"B1", "A1", 0.2, 6.0},
                                 {"B1", "A1", 0.3, 6.0},
                                 {"B1", "A1", 0.1, 4.0}});
  EXPECT_EQ(s.asker_id, "A1");
  ASSERT_EQ(s.segments.size(), 3u);
  EXPECT_EQ(s.segments[0], (SupplySegment{"B1", 0.1, 4.0}));
  EXPECT_EQ(s.segments[1].bidder_id, "B1");
  EXPECT_NEAR(s.segments[1].quantity_kw, 0.5, 1e-15);
  EXPECT_EQ(s.segments[2], (SupplySegment{"B2", 0.5, 6.0}));
}

TEST(Auction, AggregateRejectsBadOffers)
{
  EXPECT_THROW(aggregate_bids({{"B1", "A1", 0.2, 6.0}, {"B2", "A2", 0.2, 6.0}}), AuctionError);
  EXPECT_THROW(aggregate_bids({{"B1", "A1", 0.0, 6.0}}), AuctionError);
  EXPECT_THROW(aggregate_bids({{"B1", "A1", 0.2, -1.0}}), AuctionError);
  EXPECT_THROW(clear_spsba({{"B1", "A2", 0.2, 6.0}}, demo_curve()), AuctionError);
}

TEST(Auction, WillingnessToPayConventions)
{
  WillingnessToPay const step(demo_curve(), ClearingConvention::kStepPartial);
  EXPECT_DOUBLE_EQ(step.left(0.4), 8.0);
  EXPECT_DOUBLE_EQ(step.right(0.4), 1.6);
  EXPECT_DOUBLE_EQ(step.reach(6.0), 0.4);
  EXPECT_DOUBLE_EQ(step.reach(1.0), 2.0);
  EXPECT_TRUE(std::isinf(step.right(2.0)));

  WillingnessToPay const interp(demo_curve(), ClearingConvention::kInterpolatedBlock);
  EXPECT_DOUBLE_EQ(interp.left(0.2), 8.0);
  EXPECT_NEAR(interp.left(1.2), 4.8, 1e-12);
  EXPECT_NEAR(interp.reach(7.5), 0.525, 1e-12);
}

TEST(Auction, InterpolatedBlockExcludesStraddlingBlock)
{
  auto const r = clear_spsba({{"B1", "A1", 0.45, 7.0}, {"B2", "A1", 1.2, 7.5}}, demo_curve(),
                             ClearingConvention::kInterpolatedBlock);
  EXPECT_NEAR(r.intersection_quantity_kw, 0.525, 1e-12);
  EXPECT_NEAR(r.equilibrium_quantity_kw, 0.45, 1e-12);
  ASSERT_EQ(r.transactions.size(), 1u);
  EXPECT_EQ(r.transactions[0].bidder_id, "B1");
  EXPECT_NEAR(r.transactions[0].cleared_quantity_kw, 0.45, 1e-12);
  EXPECT_DOUBLE_EQ(r.transactions[0].clearing_price_cents, 7.5);
  EXPECT_FALSE(r.transactions[0].fallback_price);
}

TEST(Auction, SoleBidderPaysReservePrice)
{
  auto const r = clear_spsba({{"B1", "A2", 0.85, 6.0}}, demo_curve("A2"),
                             ClearingConvention::kInterpolatedBlock);
  ASSERT_EQ(r.transactions.size(), 1u);
  EXPECT_NEAR(r.transactions[0].cleared_quantity_kw, 0.85, 1e-12);
  EXPECT_DOUBLE_EQ(r.transactions[0].clearing_price_cents, 8.0);
  EXPECT_TRUE(r.transactions[0].fallback_price);
}

TEST(Auction, StepPartialDispatchesMarginalBlock)
{
  auto const r = clear_spsba({{"B1", "A1", 0.3, 5.0}, {"B2", "A1", 0.5, 6.0}}, demo_curve(),
                             ClearingConvention::kStepPartial);
  EXPECT_NEAR(r.intersection_quantity_kw, 0.4, 1e-12);
  EXPECT_NEAR(r.equilibrium_quantity_kw, 0.4, 1e-12);
  ASSERT_TRUE(r.equilibrium_price_cents.has_value());
  EXPECT_DOUBLE_EQ(*r.equilibrium_price_cents, 6.0);
  ASSERT_EQ(r.transactions.size(), 2u);
  EXPECT_NEAR(r.transactions[0].cleared_quantity_kw, 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(r.transactions[0].clearing_price_cents, 6.0);
  EXPECT_NEAR(r.transactions[1].cleared_quantity_kw, 0.1, 1e-12);
  EXPECT_DOUBLE_EQ(r.transactions[1].clearing_price_cents, 8.0);
}

TEST(Auction, NoOffersMeansNoTrade)
{
  auto const r = clear_spsba({}, demo_curve());
  EXPECT_TRUE(r.transactions.empty());
  EXPECT_FALSE(r.equilibrium_price_cents.has_value());
  EXPECT_DOUBLE_EQ(r.equilibrium_quantity_kw, 0.0);
}

TEST(Auction, OffersAboveDemandDoNotClear)
{
  auto const r = clear_spsba({{"B1", "A1", 1.0, 9.0}}, demo_curve());
  EXPECT_TRUE(r.transactions.empty());
}

TEST(Auction, MatchesEnumerationOracle)
{
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i)
  {
    auto const demand = random_curve(rng);
    auto const offers = random_offers(rng, "A1");
    for (auto c : {ClearingConvention::kStepPartial, ClearingConvention::kInterpolatedBlock})
    {
      auto const solver = clear_spsba(offers, demand, c);
      auto const oracle = oracle::clear_by_enumeration(offers, demand, c);
      EXPECT_EQ(solver, oracle) << "instance " << i << " convention " << to_string(c);
    }
  }
}

TEST(Auction, ClearingInvariants)
{
  std::mt19937_64 rng(123);
  for (int i = 0; i < 300; ++i)
  {
    auto const demand = random_curve(rng);
    auto const offers = random_offers(rng, "A1");
    for (auto c : {ClearingConvention::kStepPartial, ClearingConvention::kInterpolatedBlock})
    {
      auto const r     = clear_spsba(offers, demand, c);
      double     total = 0.0;
      for (auto const &t : r.transactions)
      {
        double offered = 0.0, cheapest = 1e300;
        for (auto const &o : offers)
        {
          if (o.bidder_id == t.bidder_id)
          {
            offered += o.quantity_kw;
            cheapest = std::min(cheapest, o.price_cents);
          }
        }
        EXPECT_GT(t.cleared_quantity_kw, 0.0);
        EXPECT_LE(t.cleared_quantity_kw, offered + 1e-9);
        EXPECT_GE(t.clearing_price_cents, cheapest - 1e-9) << "individual rationality";
        total += t.cleared_quantity_kw;
      }
      EXPECT_NEAR(total, r.equilibrium_quantity_kw, 1e-9);
      EXPECT_LE(total, demand.max_quantity() + 1e-9);
      EXPECT_LE(r.equilibrium_quantity_kw, r.intersection_quantity_kw + 1e-9);
    }
  }
}

TEST(Auction, OfferOrderDoesNotMatter)
{
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i)
  {
    auto const demand   = random_curve(rng);
    auto       offers   = random_offers(rng, "A1");
    auto const expected = clear_spsba(offers, demand);
    std::shuffle(offers.begin(), offers.end(), rng);
    EXPECT_EQ(clear_spsba(offers, demand), expected);
  }
}

TEST(Auction, MessagesRoundTrip)
{
  BidOffer const offer{"B1", "A1", 0.45, 7.0};
  std::int64_t   ts  = -1;
  auto const     msg = offer_to_message(offer, 3);
  EXPECT_EQ(msg["stage"], "bid-offer");
  EXPECT_EQ(offer_from_message(msg, &ts), offer);
  EXPECT_EQ(ts, 3);

  auto const r = clear_spsba({offer}, demo_curve());
  ASSERT_EQ(r.transactions.size(), 1u);
  auto const notice = clearing_from_message(clearing_to_message(r, r.transactions[0]));
  EXPECT_EQ(notice.asker_id, "A1");
  EXPECT_EQ(notice.bidder_id, "B1");
  EXPECT_DOUBLE_EQ(notice.cleared_quantity_kw, r.transactions[0].cleared_quantity_kw);
  EXPECT_DOUBLE_EQ(notice.clearing_price_cents, r.transactions[0].clearing_price_cents);

  auto bad           = msg;
  bad["quantity_kw"] = "lots";
  EXPECT_THROW(offer_from_message(bad), SchemaError);
  auto wrong     = msg;
  wrong["stage"] = "demand-bid";
  EXPECT_THROW(offer_from_message(wrong), SchemaError);
}

TEST(Auction, ScenarioOneSupplyCurve)
{
  auto const s = aggregate_bids({{"B2", "A1", 0.3, 7.0}, {"B1", "A1", 1.3, 4.0}});
  ASSERT_EQ(s.segments.size(), 2u);
  EXPECT_EQ(s.segments[0], (SupplySegment{"B1", 1.3, 4.0}));
  EXPECT_EQ(s.segments[1], (SupplySegment{"B2", 0.3, 7.0}));
  EXPECT_EQ(aggregate_bids({{"B1", "A1", 0.2, 1.0}}).segments.size(), 1u);
  auto const tie = aggregate_bids({{"B2", "A1", 0.2, 5.0}, {"B1", "A1", 0.2, 5.0}});
  EXPECT_EQ(tie.segments[0].bidder_id, "B1");
}

TEST(Auction, StepIntersectionExamples)
{
  using C          = ClearingConvention;
  auto const s3    = clear_spsba({{"B1", "A1", 0.45, 7.0}, {"B2", "A1", 1.2, 7.5}}, demo_curve(),
                                 C::kStepPartial);
  EXPECT_NEAR(s3.intersection_quantity_kw, 0.4, 1e-12);
  ASSERT_EQ(s3.transactions.size(), 1u);
  EXPECT_EQ(s3.transactions[0].bidder_id, "B1");
  EXPECT_NEAR(s3.transactions[0].cleared_quantity_kw, 0.4, 1e-12);
  EXPECT_DOUBLE_EQ(s3.transactions[0].clearing_price_cents, 7.5);

  auto const limited = clear_spsba({{"B1", "A1", 0.6, 1.0}, {"B2", "A1", 0.4, 1.2}}, demo_curve(),
                                   C::kStepPartial);
  EXPECT_NEAR(limited.intersection_quantity_kw, 1.0, 1e-12);
  EXPECT_NEAR(limited.equilibrium_quantity_kw, 1.0, 1e-12);

  auto const cheap = clear_spsba({{"B1", "A1", 0.2, 1.0}}, demo_curve(), C::kStepPartial);
  ASSERT_EQ(cheap.transactions.size(), 1u);
  EXPECT_NEAR(cheap.transactions[0].cleared_quantity_kw, 0.2, 1e-12);
}

TEST(Auction, StepSoleBidderUsesReserve)
{
  auto const r = clear_spsba({{"B2", "A1", 0.9, 6.0}}, demo_curve(), ClearingConvention::kStepPartial);
  ASSERT_EQ(r.transactions.size(), 1u);
  EXPECT_NEAR(r.transactions[0].cleared_quantity_kw, 0.4, 1e-12);
  EXPECT_TRUE(r.transactions[0].fallback_price);
  EXPECT_DOUBLE_EQ(r.transactions[0].clearing_price_cents, 8.0);
}
