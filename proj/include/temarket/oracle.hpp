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
#include "temarket/mpc.hpp"
#include "temarket/portfolio.hpp"

#include <optional>
#include <string>
#include <vector>

/// Brute-force reference solvers. They share only the data types with the
/// production paths and are meant for small instances.
namespace temarket::oracle {

/// Enumerates every cumulative-quantity breakpoint of supply and demand,
/// probes each interval between them and reads the clearing off the first
/// interval where supply price exceeds willingness to pay.
auction::ClearingResult clear_by_enumeration(std::vector<BidOffer> const      &offers,
                                             curve::PriceDemandCurve const    &demand,
                                             auction::ClearingConvention       convention);

struct GridPortfolio
{
  std::vector<double> w;
  double              variance = 0.0;
};

/// Best point of the simplex grid {w : w_l = k_l * step, sum w = 1} meeting
/// the return floor. Empty when no grid point does.
std::optional<GridPortfolio> mpo_grid_search(portfolio::Vector const &r_bar,
                                             portfolio::Matrix const &sigma, double rorm,
                                             double step);

struct GridSchedule
{
  std::vector<mpc::Vector> u;
  std::vector<double>      p_cd;
  double                   objective = 0.0;  ///< energy cost plus comfort penalty
};

/// Exhaustive depth-first search over `u_levels` evenly spaced flows per zone
/// and `p_levels` BESS powers per step. Ties go to the lexicographically
/// smallest (u, then p_cd). Empty when no grid trajectory is feasible.
std::optional<GridSchedule> mpc_grid_search(mpc::BuildingThermalModel const &model,
                                            mpc::BessParams const &bess, mpc::ThermalState const &x0,
                                            mpc::BessState const &soc0, mpc::MpcConfig const &cfg,
                                            std::size_t u_levels = 21, std::size_t p_levels = 11);

/// Horizon solver backed by mpc_grid_search; throws InfeasibleError when the
/// grid has no feasible trajectory.
mpc::HorizonSolver grid_horizon_solver(std::size_t u_levels = 21, std::size_t p_levels = 11);

struct ConstraintCheck
{
  double bound_residual   = 0.0;  ///< flows, BESS power, SOC, export
  double comfort_residual = 0.0;  ///< degC beyond the band (hard band only)
  double cost_mismatch    = 0.0;  ///< relative
  double objective        = 0.0;  ///< recomputed cost plus penalty

  bool ok(double bounds = 1e-6, double comfort = 1e-4, double cost = 1e-9) const noexcept
  {
    return bound_residual <= bounds && comfort_residual <= comfort && cost_mismatch <= cost;
  }
};

/// Re-simulates a trajectory from scratch and measures every constraint.
ConstraintCheck check_trajectory(mpc::BuildingThermalModel const &model, mpc::BessParams const &bess,
                                 mpc::ThermalState const &x0, mpc::BessState const &soc0,
                                 mpc::MpcConfig const &cfg, mpc::ScheduleTrajectory const &t);

// Instance files -------------------------------------------------------------

struct AuctionInstance
{
  std::vector<BidOffer>       offers;
  curve::PriceDemandCurve     demand;
  auction::ClearingConvention convention = auction::ClearingConvention::kStepPartial;
};

/// {"asker", "timestep"?, "clearing"?, "curve": [{price_cents, quantity_kw}],
///  "offers": [{bidder, quantity_kw, price_cents}]}
AuctionInstance parse_auction_instance(bus::Json const &doc);

bus::Json result_to_json(auction::ClearingResult const &result);

/// Runs the oracle of `kind` ("auction", "mpo" or "mpc") on an instance
/// document next to the production solver and reports both.
bus::Json run_instance(std::string const &kind, bus::Json const &doc);

/// Reads the file and calls run_instance. Throws IoError / ConfigError.
bus::Json run_instance_file(std::string const &kind, std::string const &path);

}  // namespace temarket::oracle
