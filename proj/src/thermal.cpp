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

#include "temarket/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace temarket::thermal {
namespace {

std::string shape(Matrix const &m)
{
  std::ostringstream out;
  out << m.rows() << "x" << m.cols();
  return out.str();
}

bool all_finite(Matrix const &m)
{
  return m.allFinite();
}

}  // namespace

BuildingThermalModel::BuildingThermalModel(Matrix a, Matrix b, Matrix e, Matrix c,
                                           FanCoefficients fan, Vector u_min, Vector u_max)
  : a_(std::move(a))
  , b_(std::move(b))
  , e_(std::move(e))
  , c_(std::move(c))
  , fan_(fan)
  , u_min_(std::move(u_min))
  , u_max_(std::move(u_max))
{
  auto const n = a_.rows();
  if (n == 0 || a_.cols() != n)
  {
    throw ModelError("A must be square and non-empty, got " + shape(a_));
  }
  if (b_.rows() != n || b_.cols() == 0)
  {
    throw ModelError("B must have " + std::to_string(n) + " rows, got " + shape(b_));
  }
  if (e_.rows() != n)
  {
    throw ModelError("E must have " + std::to_string(n) + " rows, got " + shape(e_));
  }
  if (c_.rows() < 1 || c_.cols() != n)
  {
    throw ModelError("C must be n_y x " + std::to_string(n) + " with n_y >= 1, got " + shape(c_));
  }
  if (u_min_.size() != b_.cols() || u_max_.size() != b_.cols())
  {
    throw ModelError("control bounds must have one entry per zone");
  }
  if (!all_finite(a_) || !all_finite(b_) || !all_finite(e_) || !all_finite(c_) ||
      !u_min_.allFinite() || !u_max_.allFinite())
  {
    throw ModelError("model matrices and bounds must be finite");
  }
  if ((u_min_.array() > u_max_.array()).any())
  {
    throw ModelError("u_min must not exceed u_max");
  }
  if (!std::isfinite(fan_.cubic) || !std::isfinite(fan_.quadratic) ||
      !std::isfinite(fan_.linear) || !std::isfinite(fan_.constant))
  {
    throw ModelError("fan coefficients must be finite");
  }
}

bool BuildingThermalModel::fan_is_convex() const noexcept
{
  // The curvature is affine in u, so checking both ends of each interval suffices.
  for (Eigen::Index z = 0; z < u_min_.size(); ++z)
  {
    if (fan_.curvature(u_min_[z]) < -1e-12 || fan_.curvature(u_max_[z]) < -1e-12)
    {
      return false;
    }
  }
  return true;
}

void BuildingThermalModel::check_control(Vector const &u) const
{
  if (u.size() != num_inputs())
  {
    throw ModelError("control vector has " + std::to_string(u.size()) + " entries, expected " +
                     std::to_string(num_inputs()));
  }
  for (Eigen::Index z = 0; z < u.size(); ++z)
  {
    if (!std::isfinite(u[z]) || u[z] < u_min_[z] - kBoundTolerance ||
        u[z] > u_max_[z] + kBoundTolerance)
    {
      std::ostringstream msg;
      msg << "control u[" << z << "] = " << u[z] << " outside [" << u_min_[z] << ", " << u_max_[z]
          << "]";
      throw ControlBoundsError(msg.str());
    }
  }
}

ThermalStep step_thermal(BuildingThermalModel const &model, ThermalState const &state,
                         Vector const &u, Vector const &d)
{
  if (state.x.size() != model.num_states())
  {
    throw ModelError("state vector has " + std::to_string(state.x.size()) + " entries, expected " +
                     std::to_string(model.num_states()));
  }
  if (d.size() != model.num_disturbances())
  {
    throw ModelError("disturbance vector has " + std::to_string(d.size()) +
                     " entries, expected " + std::to_string(model.num_disturbances()));
  }
  if (!state.x.allFinite() || !d.allFinite())
  {
    throw ModelError("state and disturbance must be finite");
  }
  model.check_control(u);

  ThermalStep out;
  out.y          = model.c() * state.x;
  out.next.x     = model.a() * state.x + model.b() * u;
  if (model.num_disturbances() > 0)
  {
    out.next.x += model.e() * d;
  }
  out.next.timestep = state.timestep + 1;
  return out;
}

double hvac_power(BuildingThermalModel const &model, Vector const &u)
{
  model.check_control(u);
  double total = 0.0;
  for (Eigen::Index z = 0; z < u.size(); ++z)
  {
    total += model.fan().power(u[z]);
  }
  return total;
}

void BessParams::validate() const
{
  auto fail = [](std::string const &what) { throw ModelError("BESS parameters: " + what); };
  if (!(decay >= 0.0 && decay < 1.0))
  {
    fail("decay must lie in [0, 1)");
  }
  if (!(efficiency > 0.0 && efficiency <= 1.0))
  {
    fail("efficiency must lie in (0, 1]");
  }
  if (!(capacity_kwh > 0.0) || !std::isfinite(capacity_kwh))
  {
    fail("capacity must be positive");
  }
  if (!(step_hours > 0.0) || !std::isfinite(step_hours))
  {
    fail("step length must be positive");
  }
  if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 1.0))
  {
    fail("SOC bounds must satisfy 0 <= soc_min < soc_max <= 1");
  }
  if (!(max_discharge_kw >= 0.0) || !(max_charge_kw >= 0.0) || !std::isfinite(max_discharge_kw) ||
      !std::isfinite(max_charge_kw))
  {
    fail("charge/discharge rates must be non-negative");
  }
}

BessState step_bess(BessParams const &params, BessState state, double p_cd_kw)
{
  params.validate();
  if (!std::isfinite(p_cd_kw) || p_cd_kw < -params.max_discharge_kw - kBoundTolerance ||
      p_cd_kw > params.max_charge_kw + kBoundTolerance)
  {
    std::ostringstream msg;
    msg << "BESS power " << p_cd_kw << " kW outside [" << -params.max_discharge_kw << ", "
        << params.max_charge_kw << "]";
    throw RateError(msg.str());
  }
  double const next = (1.0 - params.decay) * state.soc + params.soc_per_kw() * p_cd_kw;
  if (next < params.soc_min - kBoundTolerance || next > params.soc_max + kBoundTolerance)
  {
    std::ostringstream msg;
    msg << "SOC would reach " << next << ", outside [" << params.soc_min << ", " << params.soc_max
        << "]";
    throw SocBoundsError(msg.str());
  }
  return BessState{std::clamp(next, params.soc_min, params.soc_max)};
}

}  // namespace temarket::thermal
