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

namespace temarket::oracle {
namespace {

constexpr double kFeasTol = 1e-9;

double level(double lo, double hi, std::size_t i, std::size_t n)
{
  return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

double band_violation(mpc::Vector const &y, mpc::Vector const &lo, mpc::Vector const &hi)
{
  double v = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
  {
    v = std::max({v, lo[i] - y[i], y[i] - hi[i]});
  }
  return v;
}

double fan_power(mpc::BuildingThermalModel const &model, mpc::Vector const &u)
{
  auto const &f     = model.fan();
  double      total = 0.0;
  for (Eigen::Index z = 0; z < u.size(); ++z)
  {
    double const q = u[z];
    total += f.cubic * q * q * q + f.quadratic * q * q + f.linear * q + f.constant;
  }
  return total;
}

/// Lexicographic order on (u, then p_cd).
bool lex_less(std::vector<mpc::Vector> const &ua, std::vector<double> const &pa,
              std::vector<mpc::Vector> const &ub, std::vector<double> const &pb)
{
  for (std::size_t k = 0; k < ua.size(); ++k)
  {
    for (Eigen::Index z = 0; z < ua[k].size(); ++z)
    {
      if (ua[k][z] != ub[k][z])
      {
        return ua[k][z] < ub[k][z];
      }
    }
  }
  return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
}

class GridDfs
{
public:
  GridDfs(mpc::BuildingThermalModel const &model, mpc::BessParams const &bess,
          mpc::MpcConfig const &cfg, std::size_t u_levels, std::size_t p_levels)
    : model_(model)
    , bess_(bess)
    , cfg_(cfg)
  {
    auto const   nu    = model.num_inputs();
    std::size_t  combos = 1;
    for (Eigen::Index z = 0; z < nu; ++z)
    {
      combos *= u_levels;
    }
    for (std::size_t c = 0; c < combos; ++c)
    {
      mpc::Vector u(nu);
      std::size_t rest = c;
      for (Eigen::Index z = nu - 1; z >= 0; --z)
      {
        u[z] = level(model.u_min()[z], model.u_max()[z], rest % u_levels, u_levels);
        rest /= u_levels;
      }
      controls_.push_back(u);
      bu_.push_back(model.b() * u);
      power_.push_back(fan_power(model, u));
    }
    for (std::size_t j = 0; j < p_levels; ++j)
    {
      p_.push_back(level(-bess.max_discharge_kw, bess.max_charge_kw, j, p_levels));
    }
    for (std::size_t k = 0; k < cfg.window; ++k)
    {
      ed_.push_back(model.num_disturbances() > 0
                        ? mpc::Vector(model.e() * cfg.disturbances[cfg.start + k])
                        : mpc::Vector::Zero(model.num_states()));
    }
    xs_.assign(cfg.window + 1, mpc::Vector(model.num_states()));
    ys_.assign(cfg.window, mpc::Vector(model.num_outputs()));
    pick_u_.assign(cfg.window, 0);
    pick_p_.assign(cfg.window, 0);
  }

  std::optional<GridSchedule> run(mpc::Vector const &x0, double soc0)
  {
    xs_[0] = x0;
    visit(0, soc0, 0.0);
    return best_;
  }

private:
  void visit(std::size_t k, double soc, double objective)
  {
    if (best_ && objective > best_->objective)
    {
      return;
    }
    if (k == cfg_.window)
    {
      offer(objective);
      return;
    }
    double const price = cfg_.prices[cfg_.start + k];
    auto const  &lo    = cfg_.y_min[cfg_.start + k];
    auto const  &hi    = cfg_.y_max[cfg_.start + k];
    for (std::size_t c = 0; c < controls_.size(); ++c)
    {
      xs_[k + 1].noalias() = model_.a() * xs_[k];
      xs_[k + 1] += bu_[c] + ed_[k];
      ys_[k].noalias()     = model_.c() * xs_[k + 1];
      double const viol    = band_violation(ys_[k], lo, hi);
      double       penalty = 0.0;
      if (cfg_.slack_penalty)
      {
        penalty = *cfg_.slack_penalty * viol;
      }
      else if (viol > kFeasTol)
      {
        continue;
      }
      for (std::size_t j = 0; j < p_.size(); ++j)
      {
        double const total = power_[c] + p_[j];
        if (total < -kFeasTol)
        {
          continue;
        }
        double const next = (1.0 - bess_.decay) * soc + bess_.efficiency * bess_.step_hours /
                                                           bess_.capacity_kwh * p_[j];
        if (next < bess_.soc_min - kFeasTol || next > bess_.soc_max + kFeasTol)
        {
          continue;
        }
        pick_u_[k] = c;
        pick_p_[k] = j;
        visit(k + 1, next, objective + price * total + penalty);
      }
    }
  }

  void offer(double objective)
  {
    GridSchedule s;
    for (std::size_t k = 0; k < cfg_.window; ++k)
    {
      s.u.push_back(controls_[pick_u_[k]]);
      s.p_cd.push_back(p_[pick_p_[k]]);
    }
    s.objective = objective;
    if (!best_ || objective < best_->objective ||
        (objective == best_->objective && lex_less(s.u, s.p_cd, best_->u, best_->p_cd)))
    {
      best_ = std::move(s);
    }
  }

  mpc::BuildingThermalModel const &model_;
  mpc::BessParams const           &bess_;
  mpc::MpcConfig const            &cfg_;
  std::vector<mpc::Vector>         controls_;
  std::vector<mpc::Vector>         bu_;
  std::vector<double>              power_;
  std::vector<double>              p_;
  std::vector<mpc::Vector>         ed_;
  std::vector<mpc::Vector>         xs_;
  std::vector<mpc::Vector>         ys_;
  std::vector<std::size_t>         pick_u_;
  std::vector<std::size_t>         pick_p_;
  std::optional<GridSchedule>      best_;
};

mpc::ScheduleTrajectory simulate(mpc::BuildingThermalModel const &model, mpc::BessParams const &bess,
                                 mpc::ThermalState const &x0, mpc::BessState const &soc0,
                                 mpc::MpcConfig const &cfg, GridSchedule const &s)
{
  mpc::ScheduleTrajectory t;
  t.u         = s.u;
  t.p_cd      = s.p_cd;
  mpc::Vector x = x0.x;
  double      soc = soc0.soc;
  for (std::size_t k = 0; k < cfg.window; ++k)
  {
    double const total = fan_power(model, s.u[k]) + s.p_cd[k];
    t.p_total.push_back(total);
    t.cost += cfg.prices[cfg.start + k] * total;
    x = model.a() * x + model.b() * s.u[k];
    if (model.num_disturbances() > 0)
    {
      x += model.e() * cfg.disturbances[cfg.start + k];
    }
    t.y.push_back(model.c() * x);
    soc = (1.0 - bess.decay) * soc + bess.efficiency * bess.step_hours / bess.capacity_kwh * s.p_cd[k];
    t.soc.push_back(soc);
    double const viol = band_violation(t.y.back(), cfg.y_min[cfg.start + k], cfg.y_max[cfg.start + k]);
    t.comfort_slack.push_back(cfg.slack_penalty ? viol : 0.0);
    if (cfg.slack_penalty)
    {
      t.comfort_penalty += *cfg.slack_penalty * viol;
    }
  }
  return t;
}

}  // namespace

std::optional<GridSchedule> mpc_grid_search(mpc::BuildingThermalModel const &model,
                                            mpc::BessParams const &bess, mpc::ThermalState const &x0,
                                            mpc::BessState const &soc0, mpc::MpcConfig const &cfg,
                                            std::size_t u_levels, std::size_t p_levels)
{
  cfg.validate(model);
  bess.validate();
  if (u_levels == 0 || p_levels == 0)
  {
    throw ConfigError("levels", "grid needs at least one level per axis");
  }
  GridDfs dfs(model, bess, cfg, u_levels, p_levels);
  return dfs.run(x0.x, soc0.soc);
}

mpc::HorizonSolver grid_horizon_solver(std::size_t u_levels, std::size_t p_levels)
{
  return [u_levels, p_levels](mpc::BuildingThermalModel const &model, mpc::BessParams const &bess,
                              mpc::ThermalState const &x0, mpc::BessState const &soc0,
                              mpc::MpcConfig const &cfg) {
    auto const best = mpc_grid_search(model, bess, x0, soc0, cfg, u_levels, p_levels);
    if (!best)
    {
      throw InfeasibleError("no grid trajectory satisfies the constraints");
    }
    return simulate(model, bess, x0, soc0, cfg, *best);
  };
}

ConstraintCheck check_trajectory(mpc::BuildingThermalModel const &model, mpc::BessParams const &bess,
                                 mpc::ThermalState const &x0, mpc::BessState const &soc0,
                                 mpc::MpcConfig const &cfg, mpc::ScheduleTrajectory const &t)
{
  std::size_t const w = cfg.window;
  if (t.u.size() != w || t.p_cd.size() != w || t.p_total.size() != w || t.y.size() != w ||
      t.soc.size() != w)
  {
    throw ModelError("trajectory length does not match the window");
  }
  ConstraintCheck check;
  auto            bound = [&](double r) { check.bound_residual = std::max(check.bound_residual, r); };

  mpc::Vector x    = x0.x;
  double      soc  = soc0.soc;
  double      cost = 0.0;
  for (std::size_t k = 0; k < w; ++k)
  {
    auto const &u = t.u[k];
    if (u.size() != model.num_inputs())
    {
      throw ModelError("control has the wrong dimension");
    }
    for (Eigen::Index z = 0; z < u.size(); ++z)
    {
      bound(model.u_min()[z] - u[z]);
      bound(u[z] - model.u_max()[z]);
    }
    double const p = t.p_cd[k];
    bound(-bess.max_discharge_kw - p);
    bound(p - bess.max_charge_kw);

    double const total = fan_power(model, u) + p;
    bound(-total);
    bound(std::abs(total - t.p_total[k]));
    cost += cfg.prices[cfg.start + k] * total;

    x = model.a() * x + model.b() * u;
    if (model.num_disturbances() > 0)
    {
      x += model.e() * cfg.disturbances[cfg.start + k];
    }
    mpc::Vector const y = model.c() * x;
    bound((y - t.y[k]).cwiseAbs().maxCoeff());

    soc = (1.0 - bess.decay) * soc + bess.efficiency * bess.step_hours / bess.capacity_kwh * p;
    bound(bess.soc_min - soc);
    bound(soc - bess.soc_max);
    bound(std::abs(soc - t.soc[k]));

    double const viol = band_violation(y, cfg.y_min[cfg.start + k], cfg.y_max[cfg.start + k]);
    if (cfg.slack_penalty)
    {
      check.objective += *cfg.slack_penalty * viol;
    }
    else
    {
      check.comfort_residual = std::max(check.comfort_residual, viol);
    }
  }
  check.objective += cost;
  check.cost_mismatch = std::abs(t.cost - cost) / std::max(std::abs(cost), 1.0);
  return check;
}

}  // namespace temarket::oracle
