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


#include "temarket/errors.hpp"
#include "temarket/thermal.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace temarket::mpc {

using thermal::BessParams;
using thermal::BessState;
using thermal::BuildingThermalModel;
using thermal::Matrix;
using thermal::ThermalState;
using thermal::Vector;

/// Forecasts and tuning for one receding-horizon problem.
///
/// All forecast series are indexed by absolute step; the active window is
/// [start, start + window). Comfort band row k constrains the output reached
/// after applying control k, i.e. C x[start + k + 1].
struct MpcConfig
{
  std::size_t         window = 1;
  std::vector<double> prices;        ///< cents/kW per step, non-negative
  std::vector<Vector> disturbances;  ///< d per step
  std::vector<Vector> y_min;         ///< comfort band per step, degC
  std::vector<Vector> y_max;
  std::optional<double> slack_penalty;  ///< cents/degC; unset = hard comfort band
  std::size_t           start = 0;

  std::size_t pwl_segments     = 8;
  std::size_t max_refinements  = 40;
  bool        polish           = true;
  std::size_t max_lp_iterations = 50000;

  /// Throws ConfigError unless the window [start, start + window) is covered.
  void validate(BuildingThermalModel const &model) const;

  /// Number of forecast steps available from index 0.
  std::size_t horizon_length() const noexcept;

  MpcConfig shifted(std::size_t steps = 1) const;
  MpcConfig with_price(std::size_t offset, double price) const;
};

struct ScheduleTrajectory
{
  std::vector<Vector> u;        ///< W x n_u, kg/s
  std::vector<double> p_cd;     ///< kW, positive charges
  std::vector<double> p_total;  ///< kW, hvac_power(u[k]) + p_cd[k]
  std::vector<Vector> y;        ///< outputs after each step, degC
  std::vector<double> soc;      ///< SOC after each step
  std::vector<double> comfort_slack;  ///< degC, zero when the band is hard
  double              cost = 0.0;     ///< sum of price * p_total, cents
  double              comfort_penalty = 0.0;
};

/// Raised when the solver cannot finish within its budget. `best()` holds the
/// best feasible trajectory found so far, if any.
class SolverError : public Error
{
public:
  SolverError(std::string const &what, std::optional<ScheduleTrajectory> best)
    : Error(ErrorCode::kSolver, what)
    , best_(std::move(best))
  {}

  std::optional<ScheduleTrajectory> const &best() const noexcept { return best_; }

private:
  std::optional<ScheduleTrajectory> best_;
};

using HorizonSolver = std::function<ScheduleTrajectory(
    BuildingThermalModel const &, BessParams const &, ThermalState const &, BessState const &,
    MpcConfig const &)>;

/// Minimises sum_k price[k] * (hvac_power(u[k]) + p_cd[k]) over the window,
/// subject to the plant model, comfort band, BESS limits and no export.
///
/// The fan curve enters through a piecewise-linear epigraph that is refined at
/// each iterate; the no-export constraint uses the fan curve's tangent at the
/// current iterate, which under-estimates a convex curve, so every LP iterate
/// is feasible for the exact problem. A coordinate search on the exact cubic
/// optionally polishes the result.
ScheduleTrajectory solve_horizon(BuildingThermalModel const &model, BessParams const &bess,
                                 ThermalState const &x0, BessState const &soc0,
                                 MpcConfig const &cfg);

struct StepResult
{
  Vector             applied_u;
  double             applied_p_cd = 0.0;
  double             p_total      = 0.0;
  Vector             y;  ///< output of the pre-step state
  ThermalState       next_x;
  BessState          next_soc;
  ScheduleTrajectory plan;
};

StepResult mpc_step(BuildingThermalModel const &model, BessParams const &bess,
                    ThermalState const &x0, BessState const &soc0, MpcConfig const &cfg,
                    HorizonSolver const &solver = solve_horizon);

struct SeriesRow
{
  std::size_t step = 0;
  Vector      u;
  double      p_cd    = 0.0;
  double      p_total = 0.0;
  Vector      y;    ///< output at the start of the step
  double      soc = 0.0;  ///< SOC at the start of the step
};

std::vector<SeriesRow> run_receding_horizon(BuildingThermalModel const &model,
                                            BessParams const &bess, ThermalState const &x0,
                                            BessState const &soc0, MpcConfig const &cfg,
                                            std::size_t steps,
                                            HorizonSolver const &solver = solve_horizon);

/// CSV columns: step, u0.., p_cd, p_total, y0.., soc.
void write_series_csv(std::ostream &out, std::vector<SeriesRow> const &series);

/// Recomputes outputs, SOC, power and cost of a control/BESS trajectory from
/// the plant equations. Used by the solver and by the constraint checks.
ScheduleTrajectory evaluate_trajectory(BuildingThermalModel const &model, BessParams const &bess,
                                       ThermalState const &x0, BessState const &soc0,
                                       MpcConfig const &cfg, std::vector<Vector> const &u,
                                       std::vector<double> const &p_cd);

}  // namespace temarket::mpc
