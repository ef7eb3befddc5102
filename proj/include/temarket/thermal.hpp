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

#include <Eigen/Dense>

#include <cstdint>

namespace temarket::thermal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute slack accepted on bound checks (kg/s, kW, SOC fraction). Solver
/// output that lands within this distance of a bound is treated as on it.
inline constexpr double kBoundTolerance = 1e-9;

/// Per-zone fan power polynomial, kW as a function of air mass flow in kg/s.
struct FanCoefficients
{
  double cubic     = 0.0;
  double quadratic = 0.0;
  double linear    = 0.0;
  double constant  = 0.0;

  double power(double flow) const noexcept
  {
    return ((cubic * flow + quadratic) * flow + linear) * flow + constant;
  }

  double slope(double flow) const noexcept
  {
    return (3.0 * cubic * flow + 2.0 * quadratic) * flow + linear;
  }

  double curvature(double flow) const noexcept
  {
    return 6.0 * cubic * flow + 2.0 * quadratic;
  }
};

/// Discrete-time RC building model
///   x[t+1] = A x[t] + B u[t] + E d[t],   y[t] = C x[t]
/// with box bounds on the per-zone air mass flow u.
class BuildingThermalModel
{
public:
  BuildingThermalModel(Matrix a, Matrix b, Matrix e, Matrix c, FanCoefficients fan, Vector u_min,
                       Vector u_max);

  Matrix const &a() const noexcept { return a_; }
  Matrix const &b() const noexcept { return b_; }
  Matrix const &e() const noexcept { return e_; }
  Matrix const &c() const noexcept { return c_; }
  FanCoefficients const &fan() const noexcept { return fan_; }
  Vector const &u_min() const noexcept { return u_min_; }
  Vector const &u_max() const noexcept { return u_max_; }

  Eigen::Index num_states() const noexcept { return a_.rows(); }
  Eigen::Index num_inputs() const noexcept { return b_.cols(); }
  Eigen::Index num_disturbances() const noexcept { return e_.cols(); }
  Eigen::Index num_outputs() const noexcept { return c_.rows(); }

  /// True when the fan polynomial is convex on every zone's flow interval.
  bool fan_is_convex() const noexcept;

  /// Throws ControlBoundsError / ModelError unless u is a valid control.
  void check_control(Vector const &u) const;

private:
  Matrix          a_;
  Matrix          b_;
  Matrix          e_;
  Matrix          c_;
  FanCoefficients fan_;
  Vector          u_min_;
  Vector          u_max_;
};

struct ThermalState
{
  Vector       x;
  std::int64_t timestep = 0;
};

struct ThermalStep
{
  ThermalState next;
  Vector       y;  ///< C x of the state *before* the step
};

ThermalStep step_thermal(BuildingThermalModel const &model, ThermalState const &state,
                         Vector const &u, Vector const &d);

/// Total HVAC fan power: the fan polynomial applied per zone and summed.
double hvac_power(BuildingThermalModel const &model, Vector const &u);

struct BessParams
{
  double decay            = 0.0;  ///< energy decay per step, fraction
  double efficiency       = 1.0;  ///< round-trip efficiency, fraction
  double capacity_kwh     = 1.0;
  double step_hours       = 1.0;
  double soc_min          = 0.0;
  double soc_max          = 1.0;
  double max_discharge_kw = 0.0;
  double max_charge_kw    = 0.0;

  void validate() const;

  /// SOC change per kW of charging power over one step.
  double soc_per_kw() const noexcept
  {
    return efficiency * step_hours / capacity_kwh;
  }
};

struct BessState
{
  double soc = 0.0;
};

/// soc' = (1 - decay) soc + efficiency * p * step / capacity. Positive p charges.
BessState step_bess(BessParams const &params, BessState state, double p_cd_kw);

}  // namespace temarket::thermal
