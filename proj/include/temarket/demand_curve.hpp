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


#include "temarket/mpc.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace temarket::curve {

struct CurvePoint
{
  double price_cents = 0.0;
  double quantity_kw = 0.0;

  bool operator==(CurvePoint const &) const = default;
};

/// Finite step demand curve. Points are held in strictly descending price
/// order with quantities non-decreasing, so lower prices never buy less.
class PriceDemandCurve
{
public:
  /// Throws CurveError on an empty, unsorted, non-monotone or negative curve.
  PriceDemandCurve(std::string asker_id, std::int64_t timestep, std::vector<CurvePoint> points);

  std::string const             &asker_id() const noexcept { return asker_id_; }
  std::int64_t                   timestep() const noexcept { return timestep_; }
  std::vector<CurvePoint> const &points() const noexcept { return points_; }

  double max_price() const noexcept { return points_.front().price_cents; }
  double min_price() const noexcept { return points_.back().price_cents; }
  double max_quantity() const noexcept { return points_.back().quantity_kw; }

  /// Quantity of the lowest-priced point whose price is at least `price`;
  /// zero above the highest price. Right-continuous in price.
  double demand_at(double price) const;

  bool operator==(PriceDemandCurve const &) const = default;

private:
  std::string             asker_id_;
  std::int64_t            timestep_ = 0;
  std::vector<CurvePoint> points_;
};

struct CurveSweepConfig
{
  double      lambda_lo = 0.0;
  double      lambda_hi = 1.0;
  std::size_t samples   = 2;

  void   validate() const;
  double price(std::size_t index) const;
};

/// What the sweep produced before and after clean-up.
struct SweepLog
{
  std::vector<CurvePoint> raw;  ///< one point per sweep price, ascending price
  double                  repair_kw = 0.0;  ///< largest isotonic correction
  std::size_t             repaired  = 0;    ///< points changed by the repair
};

/// Sorts, repairs and de-duplicates raw (price, quantity) samples into a
/// valid curve. `log`, when given, receives the repair statistics.
PriceDemandCurve build_curve(std::string asker_id, std::int64_t timestep,
                             std::vector<CurvePoint> samples, SweepLog *log = nullptr);

/// Sweeps the first-step price across `sweep`, keeping the rest of the price
/// forecast, and records the first-step building power at each price.
PriceDemandCurve generate_curve(mpc::BuildingThermalModel const &model, mpc::BessParams const &bess,
                                mpc::ThermalState const &x0, mpc::BessState const &soc0,
                                mpc::MpcConfig const &cfg, CurveSweepConfig const &sweep,
                                std::string asker_id, SweepLog *log = nullptr,
                                mpc::HorizonSolver const &solver = mpc::solve_horizon,
                                bool parallel = true);

/// {"stage":"demand-bid","sender":...,"timestep":...,"curve":[...]}
nlohmann::ordered_json curve_to_message(PriceDemandCurve const &curve);

/// Inverse of curve_to_message. Throws SchemaError on malformed payloads and
/// CurveError when the points violate the curve invariants.
PriceDemandCurve curve_from_message(nlohmann::ordered_json const &payload);

}  // namespace temarket::curve
