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
#include "temarket/bid_offer.hpp"
#include "temarket/bus.hpp"
#include "temarket/demand_curve.hpp"
#include "temarket/mpc.hpp"
#include "temarket/portfolio.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace temarket::market {

struct MpcAskerSpec
{
  mpc::BuildingThermalModel model;
  mpc::BessParams           bess;
  mpc::ThermalState         x0;
  mpc::BessState            soc0;
  mpc::MpcConfig            cfg;
  curve::CurveSweepConfig   sweep;
};

/// Parses an `mpc` section (model, bess, forecasts, x0, soc0, optional
/// sweep). Throws ConfigError with field paths under `path`.
MpcAskerSpec parse_mpc_spec(bus::Json const &node, std::string const &path);

/// Exactly one of `curve` and `mpc` is set.
struct AskerSpec
{
  std::string                                   id;
  std::optional<std::vector<curve::CurvePoint>> curve;
  std::optional<MpcAskerSpec>                   mpc;
};

/// Fixed offers when `portfolio` is unset, otherwise the MPO pipeline.
struct BidderSpec
{
  std::string                             id;
  double                                  capacity_kw = 0.0;
  std::vector<BidOffer>                   offers;
  std::optional<portfolio::BidderConfig>  portfolio;
};

struct BusSpec
{
  double        stage_timeout_s = 30.0;
  std::uint16_t port            = 0;
};

struct ScenarioConfig
{
  std::string                 name;
  std::uint64_t               rounds = 1;
  std::uint64_t               seed   = 0;
  auction::ClearingConvention clearing = auction::ClearingConvention::kStepPartial;
  std::vector<AskerSpec>      askers;
  std::vector<BidderSpec>     bidders;
  bus::AuthPolicy             acl;
  BusSpec                     bus;

  /// Parses and validates. Throws ConfigError with a field path.
  static ScenarioConfig from_json(bus::Json const &doc);
  static ScenarioConfig from_file(std::string const &path);

  /// Ids, capacities, offer targets and ACL coverage. Throws ConfigError.
  void validate() const;

  std::vector<std::string> participant_ids() const;
};

/// The allow-lists the agents need for the three market stages.
bus::AuthPolicy default_policy(std::vector<AskerSpec> const &askers,
                               std::vector<BidderSpec> const &bidders);

}  // namespace temarket::market
