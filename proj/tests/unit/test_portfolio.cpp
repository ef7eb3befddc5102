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
#include "temarket/portfolio.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace temarket;
using namespace temarket::portfolio;

namespace {

BidderConfig bidder(double capacity, double rorm, std::map<std::string, double> asks)
{
  BidderConfig cfg;
  cfg.bidder_id   = "B";
  cfg.capacity_kw = capacity;
  cfg.rorm        = rorm;
  cfg.ask_prices  = std::move(asks);
  return cfg;
}

Matrix random_returns(std::mt19937_64 &rng, int n, int l)
{
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  Matrix                                 r(n, l);
  for (int i = 0; i < n; ++i)
  {
    for (int j = 0; j < l; ++j)
    {
      r(i, j) = u(rng);
    }
  }
  return r;
}

}  // namespace

TEST(Portfolio, MakeBidsScalesWeightsByCapacity)
{
  auto const cfg    = bidder(1.2, 0.0, {{"A1", 5.5}, {"A2", 6.0}});
  Vector     w(2);
  w << 0.25, 0.75;
  auto const offers = make_bids(PortfolioWeights{w}, cfg, {"A1", "A2"});
  ASSERT_EQ(offers.size(), 2u);
  EXPECT_EQ(offers[0].asker_id, "A1");
  EXPECT_NEAR(offers[0].quantity_kw, 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(offers[0].price_cents, 5.5);
  EXPECT_EQ(offers[1].asker_id, "A2");
  EXPECT_NEAR(offers[1].quantity_kw, 0.9, 1e-12);
  EXPECT_DOUBLE_EQ(offers[1].price_cents, 6.0);
}

TEST(Portfolio, MakeBidsDropsNegligibleWeights)
{
  auto const cfg = bidder(1.0, 0.0, {{"A1", 5.0}, {"A2", 6.0}});
  Vector     w(2);
  w << 1.0, 1e-9;
  auto const offers = make_bids(PortfolioWeights{w}, cfg, {"A1", "A2"});
  ASSERT_EQ(offers.size(), 1u);
  EXPECT_EQ(offers[0].asker_id, "A1");
}

TEST(Portfolio, StatsUseOneOverN)
{
  Matrix r(2, 2);
  r << 1.0, 0.0, 3.0, 2.0;
  auto const s = return_stats(r);
  EXPECT_DOUBLE_EQ(s.r_bar[0], 2.0);
  EXPECT_DOUBLE_EQ(s.r_bar[1], 1.0);
  EXPECT_DOUBLE_EQ(s.sigma(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.sigma(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(s.sigma(1, 1), 1.0);
  EXPECT_THROW(return_stats(Matrix::Ones(1, 2)), StatsError);
}

TEST(Portfolio, CovarianceIsSymmetricPsd)
{
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i)
  {
    auto const s = return_stats(random_returns(rng, 2 + i % 7, 1 + i % 4));
    EXPECT_EQ(s.sigma, s.sigma.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s.sigma);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
  }
}

TEST(Portfolio, ReturnsArePriceRatiosMinusOne)
{
  Matrix p(2, 2);
  p << 1.5, 0.8, 1.0, 2.0;
  Matrix const r = return_samples(p);
  EXPECT_DOUBLE_EQ(r(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(r(0, 1), -0.2);
  EXPECT_DOUBLE_EQ(r(1, 1), 1.0);
}

TEST(Portfolio, SolutionIsFeasible)
{
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i)
  {
    int const    l    = 2 + i % 4;
    auto const   s    = return_stats(random_returns(rng, l + 2, l));
    double const rorm = 0.5 * (s.r_bar.minCoeff() + s.r_bar.maxCoeff());
    auto const   w    = solve_mpo(s, rorm).w;
    EXPECT_NEAR(w.sum(), 1.0, 1e-9);
    EXPECT_GE(w.minCoeff(), 0.0);
    EXPECT_LE(w.maxCoeff(), 1.0);
    EXPECT_GE(s.r_bar.dot(w), rorm - 1e-9);
  }
}

TEST(Portfolio, NeverWorseThanFineGrid)
{
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i)
  {
    auto const   s    = return_stats(random_returns(rng, 5, 2));
    double const rorm = s.r_bar.minCoeff() + 0.7 * (s.r_bar.maxCoeff() - s.r_bar.minCoeff());
    auto const   w    = solve_mpo(s, rorm).w;
    auto const   grid = oracle::mpo_grid_search(s.r_bar, s.sigma, rorm, 0.001);
    ASSERT_TRUE(grid.has_value());
    EXPECT_LE(w.dot(s.sigma * w), grid->variance + 1e-12);
  }
}

TEST(Portfolio, UnconstrainedTwoAssetMinimum)
{
  // Uncorrelated assets: the minimum-variance split is inverse-variance weighted.
  ReturnStatistics s;
  s.r_bar = Vector::Zero(2);
  s.sigma = Matrix::Zero(2, 2);
  s.sigma(0, 0) = 1.0;
  s.sigma(1, 1) = 3.0;
  auto const w  = solve_mpo(s, -1.0).w;
  EXPECT_NEAR(w[0], 0.75, 1e-9);
  EXPECT_NEAR(w[1], 0.25, 1e-9);
}

TEST(Portfolio, UnreachableFloorAbstains)
{
  ReturnStatistics s;
  s.r_bar = Vector::Constant(2, 0.1);
  s.sigma = Matrix::Identity(2, 2);
  EXPECT_THROW(solve_mpo(s, 0.2), InfeasibleRormError);
}

TEST(Portfolio, ProjectionLandsOnFeasibleSet)
{
  std::mt19937_64                        rng(4);
  std::normal_distribution<double>       g(0.0, 2.0);
  for (int i = 0; i < 200; ++i)
  {
    Vector v(4), r(4);
    for (int k = 0; k < 4; ++k)
    {
      v[k] = g(rng);
      r[k] = g(rng);
    }
    double const floor = r.minCoeff() + 0.5 * (r.maxCoeff() - r.minCoeff());
    Vector const w     = project_feasible(v, r, floor);
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_GE(w.minCoeff(), 0.0);
    EXPECT_GE(r.dot(w), floor - 1e-12);
  }
}

TEST(Portfolio, NormalizeUsesOwnPointsWhenCountsMatch)
{
  auto       cfg = bidder(2.0, 0.0, {{"A1", 4.0}});
  curve::PriceDemandCurve const c("A1", 0, {{8.0, 0.4}, {1.6, 2.0}});
  auto const n = normalize_curves({c}, cfg);
  EXPECT_DOUBLE_EQ(n.q(0, 0), 0.2);
  EXPECT_DOUBLE_EQ(n.q(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(n.p(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(n.p(1, 0), 0.4);

  cfg.n_samples = 4;
  auto const m  = normalize_curves({c}, cfg);
  EXPECT_DOUBLE_EQ(m.q(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(m.p(0, 0), 0.4);  // 0.5 kW is past the first 0.4 kW step
  EXPECT_DOUBLE_EQ(m.q(3, 0), 1.0);
}

TEST(Portfolio, PlanBidsIgnoresUnpricedAskers)
{
  auto const cfg = bidder(1.0, -1.0, {{"A1", 4.0}});
  curve::PriceDemandCurve const a1("A1", 0, {{8.0, 0.4}, {1.6, 2.0}});
  curve::PriceDemandCurve const a2("A2", 0, {{9.0, 0.5}, {2.0, 1.0}});
  auto const offers = plan_bids({a1, a2}, cfg);
  ASSERT_EQ(offers.size(), 1u);
  EXPECT_EQ(offers[0].asker_id, "A1");
  EXPECT_NEAR(offers[0].quantity_kw, 1.0, 1e-9);
  EXPECT_TRUE(plan_bids({a2}, cfg).empty());
}

TEST(Portfolio, ConfigValidation)
{
  auto cfg = bidder(0.0, 0.1, {{"A1", 4.0}});
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = bidder(1.0, 0.1, {{"A1", 0.0}});
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg           = bidder(1.0, 0.1, {{"A1", 4.0}});
  cfg.n_samples = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Portfolio, HandEvaluatedNormalization)
{
  auto const cfg = bidder(2.0, 0.0, {{"A1", 1.6}});
  curve::PriceDemandCurve const self("A1", 0, {{8.0, 0.4}, {1.6, 2.0}});
  auto const n = normalize_curves({self}, cfg);
  EXPECT_DOUBLE_EQ(n.q(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(n.p(1, 0), 1.0);

  auto const b1 = bidder(1.3, 0.0, {{"A1", 4.0}});
  auto const m  = normalize_curves({self}, b1);
  EXPECT_NEAR(m.q(0, 0), 0.4 / 1.3, 1e-15);
  EXPECT_DOUBLE_EQ(m.p(0, 0), 2.0);
}

TEST(Portfolio, HandEvaluatedReturnsAndStats)
{
  Matrix p(3, 1);
  p << 1.0, 2.0, 0.5;
  Matrix const r = return_samples(p);
  EXPECT_DOUBLE_EQ(r(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(r(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(r(2, 0), -0.5);

  Matrix same(3, 2);
  same << 0.2, 0.4, 0.2, 0.4, 0.2, 0.4;
  auto const flat = return_stats(same);
  EXPECT_LT(flat.sigma.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(flat.r_bar[1], 0.4, 1e-15);

  Matrix two(2, 1);
  two << 0.0, 2.0;
  auto const s = return_stats(two);
  EXPECT_DOUBLE_EQ(s.r_bar[0], 1.0);
  EXPECT_DOUBLE_EQ(s.sigma(0, 0), 1.0);
}

TEST(Portfolio, HandSolvedPortfolios)
{
  ReturnStatistics one;
  one.r_bar = Vector::Constant(1, 0.5);
  one.sigma = Matrix::Identity(1, 1);
  EXPECT_NEAR(solve_mpo(one, 0.2).w[0], 1.0, 1e-12);

  ReturnStatistics twins;
  twins.r_bar = Vector::Constant(2, 0.5);
  twins.sigma = Matrix::Identity(2, 2);
  auto const w = solve_mpo(twins, 0.0).w;
  EXPECT_NEAR(w[0], 0.5, 1e-9);
  EXPECT_NEAR(w[1], 0.5, 1e-9);

  ReturnStatistics active;
  active.r_bar.resize(2);
  active.r_bar << 0.1, 0.9;
  active.sigma          = Matrix::Zero(2, 2);
  active.sigma(0, 0)    = 1.0;
  active.sigma(1, 1)    = 4.0;
  auto const constrained = solve_mpo(active, 0.5).w;
  EXPECT_NEAR(constrained[0], 0.5, 1e-9);
  EXPECT_NEAR(constrained[1], 0.5, 1e-9);
}

TEST(Portfolio, RaisingTheFloorNeverLowersVariance)
{
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i)
  {
    auto const s    = return_stats(random_returns(rng, 6, 3));
    double     prev = -1.0;
    for (int k = 0; k <= 10; ++k)
    {
      double const rorm = s.r_bar.minCoeff() + 0.1 * k * (s.r_bar.maxCoeff() - s.r_bar.minCoeff());
      auto const   w    = solve_mpo(s, rorm).w;
      double const v    = w.dot(s.sigma * w);
      EXPECT_GE(v, prev - 1e-10) << "instance " << i << " floor step " << k;
      prev = v;
    }
  }
}

TEST(Portfolio, ScenarioOffers)
{
  auto const b1 = bidder(1.3, 0.0, {{"A1", 4.0}, {"A2", 7.0}});
  Vector     w(2);
  w << 1.0, 0.0;
  auto const offers = make_bids(PortfolioWeights{w}, b1, {"A1", "A2"});
  ASSERT_EQ(offers.size(), 1u);
  EXPECT_EQ(offers[0], (BidOffer{"B", "A1", 1.3, 4.0}));

  auto   none = bidder(1.0, 0.0, {{"A1", 4.0}, {"A2", 7.0}});
  none.capacity_kw = 0.0;
  w << 0.5, 0.5;
  EXPECT_TRUE(make_bids(PortfolioWeights{w}, none, {"A1", "A2"}).empty());
}
