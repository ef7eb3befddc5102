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
#include "temarket/errors.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace temarket::portfolio {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct BidderConfig
{
  std::string                   bidder_id;
  double                        capacity_kw = 0.0;
  double                        rorm        = 0.0;
  std::map<std::string, double> ask_prices;  ///< asker id -> cents/kW
  std::size_t                   n_samples        = 2;
  double                        quantity_epsilon = 1e-6;

  void validate() const;
};

/// Column l belongs to `askers[l]`; rows are the N samples.
struct NormalizedCurves
{
  std::vector<std::string> askers;
  Matrix                   q;
  Matrix                   p;
};

/// Samples each curve N times and scales quantity by capacity and price by
/// the bidder's ask price for that asker. With N equal to a curve's point
/// count the curve's own points are used; otherwise quantities are spaced
/// uniformly over (0, Q_max] and priced by the curve's step function.
NormalizedCurves normalize_curves(std::vector<curve::PriceDemandCurve> const &curves,
                                  BidderConfig const                         &cfg);

Matrix return_samples(Matrix const &p);

struct ReturnStatistics
{
  Vector r_bar;
  Matrix sigma;
  Matrix samples;
};

/// Mean and 1/N sample covariance of the columns of r.
ReturnStatistics return_stats(Matrix const &r);

struct PortfolioWeights
{
  Vector w;
};

/// min w' S w  s.t.  r_bar' w >= rorm,  sum w = 1,  0 <= w <= 1.
/// Throws InfeasibleRormError when no asset reaches the floor.
PortfolioWeights solve_mpo(ReturnStatistics const &stats, double rorm);

/// Euclidean projection onto {w : sum w = 1, w >= 0, r_bar' w >= floor},
/// returning a point on the feasible side of the return constraint.
Vector project_feasible(Vector const &v, Vector const &r_bar, double floor);

/// One offer per asker with weight * capacity above the epsilon.
std::vector<BidOffer> make_bids(PortfolioWeights const &weights, BidderConfig const &cfg,
                                std::vector<std::string> const &askers);

/// normalize -> returns -> stats -> MPO -> bids. Askers without an ask price
/// are ignored; throws InfeasibleRormError when the bidder must abstain.
std::vector<BidOffer> plan_bids(std::vector<curve::PriceDemandCurve> const &curves,
                                BidderConfig const                         &cfg);

}  // namespace temarket::portfolio
