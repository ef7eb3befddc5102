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

#include "temarket/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace temarket::mpc {
namespace {

constexpr double kComfortTolerance = 1e-7;

std::string at_step(char const *what, std::size_t k)
{
  return std::string(what) + "[" + std::to_string(k) + "]";
}

/// Affine response of outputs and SOC to the decision variables over one window.
struct Response
{
  std::size_t window = 0;
  Eigen::Index nu    = 0;
  // y[k+1] = y_free[k] + sum_{j<=k} y_gain[k][j] * u[j]
  std::vector<Vector>              y_free;
  std::vector<std::vector<Matrix>> y_gain;
  // soc[k+1] = soc_free[k] + sum_{j<=k} soc_gain[k][j] * p[j]
  std::vector<double>              soc_free;
  std::vector<std::vector<double>> soc_gain;
};

Response build_response(BuildingThermalModel const &model, BessParams const &bess,
                        ThermalState const &x0, BessState const &soc0, MpcConfig const &cfg)
{
  Response r;
  r.window = cfg.window;
  r.nu     = model.num_inputs();

  // powers[i] = A^i B
  std::vector<Matrix> powers;
  powers.push_back(model.b());
  for (std::size_t i = 1; i < cfg.window; ++i)
  {
    powers.push_back(model.a() * powers.back());
  }

  Vector x     = x0.x;
  double decay = 1.0 - bess.decay;
  double soc   = soc0.soc;
  for (std::size_t k = 0; k < cfg.window; ++k)
  {
    x = model.a() * x;
    if (model.num_disturbances() > 0)
    {
      x += model.e() * cfg.disturbances[cfg.start + k];
    }
    r.y_free.push_back(model.c() * x);
    std::vector<Matrix> gains;
    for (std::size_t j = 0; j <= k; ++j)
    {
      gains.push_back(model.c() * powers[k - j]);
    }
    r.y_gain.push_back(std::move(gains));

    soc *= decay;
    r.soc_free.push_back(soc);
    std::vector<double> sg;
    for (std::size_t j = 0; j <= k; ++j)
    {
      sg.push_back(std::pow(decay, static_cast<double>(k - j)) * bess.soc_per_kw());
    }
    r.soc_gain.push_back(std::move(sg));
  }
  return r;
}

bool is_feasible(ScheduleTrajectory const &t, BuildingThermalModel const &model,
                 BessParams const &bess, MpcConfig const &cfg)
{
  double const tol = thermal::kBoundTolerance;
  for (std::size_t k = 0; k < cfg.window; ++k)
  {
    for (Eigen::Index z = 0; z < model.num_inputs(); ++z)
    {
      if (t.u[k][z] < model.u_min()[z] - tol || t.u[k][z] > model.u_max()[z] + tol)
      {
        return false;
      }
    }
    if (t.p_cd[k] < -bess.max_discharge_kw - tol || t.p_cd[k] > bess.max_charge_kw + tol)
    {
      return false;
    }
    if (t.soc[k] < bess.soc_min - tol || t.soc[k] > bess.soc_max + tol)
    {
      return false;
    }
    if (t.p_total[k] < -tol)
    {
      return false;
    }
    if (!cfg.slack_penalty)
    {
      auto const &lo = cfg.y_min[cfg.start + k];
      auto const &hi = cfg.y_max[cfg.start + k];
      for (Eigen::Index i = 0; i < t.y[k].size(); ++i)
      {
        if (t.y[k][i] < lo[i] - kComfortTolerance || t.y[k][i] > hi[i] + kComfortTolerance)
        {
          return false;
        }
      }
    }
  }
  return true;
}

double total_objective(ScheduleTrajectory const &t)
{
  return t.cost + t.comfort_penalty;
}

/// Breakpoints for one zone/step: the uniform grid plus a bracket around the
/// current iterate. Any subset containing the interval ends yields chords
/// that over-estimate a convex fan curve.
std::vector<double> breakpoints(double lo, double hi, std::size_t segments, double centre,
                                double radius)
{
  std::vector<double> bp;
  if (hi - lo <= 0.0)
  {
    bp.push_back(lo);
    return bp;
  }
  for (std::size_t i = 0; i <= segments; ++i)
  {
    bp.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(segments));
  }
  bp.back() = hi;
  for (double v : {centre - radius, centre, centre + radius})
  {
    if (v > lo && v < hi)
    {
      bp.push_back(v);
    }
  }
  std::sort(bp.begin(), bp.end());
  std::vector<double> unique;
  for (double v : bp)
  {
    if (unique.empty() || v - unique.back() > 1e-12 * (1.0 + std::abs(v)))
    {
      unique.push_back(v);
    }
  }
  return unique;
}

struct LpLayout
{
  std::vector<std::vector<std::size_t>> u;  // [k][z]
  std::vector<std::size_t>              p;  // [k]
  std::vector<std::size_t>              slack;
};

}  // namespace

void MpcConfig::validate(BuildingThermalModel const &model) const
{
  if (window < 1)
  {
    throw ConfigError("window", "prediction window must be at least one step");
  }
  if (pwl_segments < 1)
  {
    throw ConfigError("pwl_segments", "need at least one segment");
  }
  std::size_t const end = start + window;
  if (prices.size() < end || disturbances.size() < end || y_min.size() < end ||
      y_max.size() < end)
  {
    throw ConfigError("forecasts", "forecast series must cover steps [" + std::to_string(start) +
                                       ", " + std::to_string(end) + ")");
  }
  for (std::size_t k = start; k < end; ++k)
  {
    if (!std::isfinite(prices[k]) || prices[k] < 0.0)
    {
      throw ConfigError(at_step("prices", k), "prices must be finite and non-negative");
    }
    if (disturbances[k].size() != model.num_disturbances() || !disturbances[k].allFinite())
    {
      throw ConfigError(at_step("disturbances", k), "expected " +
                                                        std::to_string(model.num_disturbances()) +
                                                        " finite entries");
    }
    if (y_min[k].size() != model.num_outputs() || y_max[k].size() != model.num_outputs())
    {
      throw ConfigError(at_step("y_min", k), "comfort band must have one entry per output");
    }
    for (Eigen::Index i = 0; i < y_min[k].size(); ++i)
    {
      if (std::isnan(y_min[k][i]) || std::isnan(y_max[k][i]) || y_min[k][i] > y_max[k][i])
      {
        throw ConfigError(at_step("y_min", k), "comfort band requires y_min <= y_max");
      }
    }
  }
  if (slack_penalty && !(*slack_penalty > 0.0 && std::isfinite(*slack_penalty)))
  {
    throw ConfigError("slack_penalty", "must be positive when set");
  }
}

std::size_t MpcConfig::horizon_length() const noexcept
{
  return std::min({prices.size(), disturbances.size(), y_min.size(), y_max.size()});
}

MpcConfig MpcConfig::shifted(std::size_t steps) const
{
  MpcConfig next = *this;
  next.start += steps;
  return next;
}

MpcConfig MpcConfig::with_price(std::size_t offset, double price) const
{
  MpcConfig next = *this;
  if (start + offset >= next.prices.size())
  {
    throw ConfigError("prices", "price override outside the forecast");
  }
  next.prices[start + offset] = price;
  return next;
}

ScheduleTrajectory evaluate_trajectory(BuildingThermalModel const &model, BessParams const &bess,
                                       ThermalState const &x0, BessState const &soc0,
                                       MpcConfig const &cfg, std::vector<Vector> const &u,
                                       std::vector<double> const &p_cd)
{
  ScheduleTrajectory t;
  t.u    = u;
  t.p_cd = p_cd;
  Vector x   = x0.x;
  double soc = soc0.soc;
  for (std::size_t k = 0; k < cfg.window; ++k)
  {
    double power = 0.0;
    for (Eigen::Index z = 0; z < u[k].size(); ++z)
    {
      power += model.fan().power(u[k][z]);
    }
    t.p_total.push_back(power + p_cd[k]);
    t.cost += cfg.prices[cfg.start + k] * t.p_total.back();

    x = model.a() * x + model.b() * u[k];
    if (model.num_disturbances() > 0)
    {
      x += model.e() * cfg.disturbances[cfg.start + k];
    }
    t.y.push_back(model.c() * x);
    soc = (1.0 - bess.decay) * soc + bess.soc_per_kw() * p_cd[k];
    t.soc.push_back(soc);

    double violation = 0.0;
    auto const &lo   = cfg.y_min[cfg.start + k];
    auto const &hi   = cfg.y_max[cfg.start + k];
    for (Eigen::Index i = 0; i < t.y.back().size(); ++i)
    {
      violation = std::max({violation, lo[i] - t.y.back()[i], t.y.back()[i] - hi[i]});
    }
    t.comfort_slack.push_back(cfg.slack_penalty ? violation : 0.0);
    if (cfg.slack_penalty)
    {
      t.comfort_penalty += *cfg.slack_penalty * violation;
    }
  }
  return t;
}

ScheduleTrajectory solve_horizon(BuildingThermalModel const &model, BessParams const &bess,
                                 ThermalState const &x0, BessState const &soc0,
                                 MpcConfig const &cfg)
{
  cfg.validate(model);
  bess.validate();
  if (x0.x.size() != model.num_states() || !x0.x.allFinite())
  {
    throw ModelError("initial state does not match the model");
  }
  if (soc0.soc < bess.soc_min - thermal::kBoundTolerance ||
      soc0.soc > bess.soc_max + thermal::kBoundTolerance)
  {
    throw SocBoundsError("initial SOC outside its bounds");
  }
  if (!model.fan_is_convex())
  {
    throw ModelError("fan curve must be convex over the control bounds for horizon scheduling");
  }

  std::size_t const  W   = cfg.window;
  Eigen::Index const nu  = model.num_inputs();
  Eigen::Index const ny  = model.num_outputs();
  Response const     rsp = build_response(model, bess, x0, soc0, cfg);
  auto const        &fan = model.fan();

  std::vector<Vector> centre(W);
  std::vector<Vector> radius(W);
  for (std::size_t k = 0; k < W; ++k)
  {
    centre[k] = 0.5 * (model.u_min() + model.u_max());
    radius[k] = (model.u_max() - model.u_min()) / (2.0 * static_cast<double>(cfg.pwl_segments));
  }

  std::optional<ScheduleTrajectory> best;
  std::size_t                       stalled = 0;

  for (std::size_t iter = 0; iter <= cfg.max_refinements; ++iter)
  {
    lp::Problem prob;
    LpLayout    layout;
    layout.u.resize(W);
    for (std::size_t k = 0; k < W; ++k)
    {
      double const price = cfg.prices[cfg.start + k];
      for (Eigen::Index z = 0; z < nu; ++z)
      {
        layout.u[k].push_back(prob.add_variable(model.u_min()[z], model.u_max()[z], 0.0));
      }
      layout.p.push_back(prob.add_variable(-bess.max_discharge_kw, bess.max_charge_kw, price));
      if (cfg.slack_penalty)
      {
        layout.slack.push_back(prob.add_variable(0.0, lp::kInfinity, *cfg.slack_penalty));
      }

      // Fan power epigraph; only needed where it carries a cost.
      if (price > 0.0)
      {
        for (Eigen::Index z = 0; z < nu; ++z)
        {
          auto const bp = breakpoints(model.u_min()[z], model.u_max()[z], cfg.pwl_segments,
                                      centre[k][z], radius[k][z]);
          double lowest = std::numeric_limits<double>::infinity();
          for (double b : bp)
          {
            lowest = std::min(lowest, fan.power(b));
          }
          std::size_t const h = prob.add_variable(lowest - 1.0, lp::kInfinity, price);
          if (bp.size() == 1)
          {
            prob.add_row({{h, 1.0}}, lp::Sense::kGreaterEqual, fan.power(bp[0]));
          }
          for (std::size_t i = 0; i + 1 < bp.size(); ++i)
          {
            double const slope = (fan.power(bp[i + 1]) - fan.power(bp[i])) / (bp[i + 1] - bp[i]);
            prob.add_row({{h, 1.0}, {layout.u[k][z], -slope}}, lp::Sense::kGreaterEqual,
                         fan.power(bp[i]) - slope * bp[i]);
          }
        }
      }

      // No export: p + sum_z tangent_z(u) >= 0, with tangents at the iterate.
      std::vector<std::pair<std::size_t, double>> terms{{layout.p[k], 1.0}};
      double                                      rhs = 0.0;
      for (Eigen::Index z = 0; z < nu; ++z)
      {
        double const at    = centre[k][z];
        double const slope = fan.slope(at);
        terms.emplace_back(layout.u[k][z], slope);
        rhs += slope * at - fan.power(at);
      }
      prob.add_row(std::move(terms), lp::Sense::kGreaterEqual, rhs);

      // SOC bounds after step k.
      std::vector<std::pair<std::size_t, double>> soc_terms;
      for (std::size_t j = 0; j <= k; ++j)
      {
        soc_terms.emplace_back(layout.p[j], rsp.soc_gain[k][j]);
      }
      prob.add_row(soc_terms, lp::Sense::kLessEqual, bess.soc_max - rsp.soc_free[k]);
      prob.add_row(std::move(soc_terms), lp::Sense::kGreaterEqual, bess.soc_min - rsp.soc_free[k]);

      // Comfort band on the output reached after step k.
      auto const &lo = cfg.y_min[cfg.start + k];
      auto const &hi = cfg.y_max[cfg.start + k];
      for (Eigen::Index i = 0; i < ny; ++i)
      {
        std::vector<std::pair<std::size_t, double>> y_terms;
        for (std::size_t j = 0; j <= k; ++j)
        {
          for (Eigen::Index z = 0; z < nu; ++z)
          {
            double const g = rsp.y_gain[k][j](i, z);
            if (g != 0.0)
            {
              y_terms.emplace_back(layout.u[j][z], g);
            }
          }
        }
        if (std::isfinite(lo[i]))
        {
          auto terms_lo = y_terms;
          if (cfg.slack_penalty)
          {
            terms_lo.emplace_back(layout.slack[k], 1.0);
          }
          prob.add_row(std::move(terms_lo), lp::Sense::kGreaterEqual, lo[i] - rsp.y_free[k][i]);
        }
        if (std::isfinite(hi[i]))
        {
          if (cfg.slack_penalty)
          {
            y_terms.emplace_back(layout.slack[k], -1.0);
          }
          prob.add_row(std::move(y_terms), lp::Sense::kLessEqual, hi[i] - rsp.y_free[k][i]);
        }
      }
    }

    lp::Options opt;
    opt.max_iterations = cfg.max_lp_iterations;
    auto const sol     = lp::solve(prob, opt);
    if (sol.status == lp::Status::kInfeasible)
    {
      if (!best)
      {
        throw InfeasibleError("no control and BESS schedule satisfies the comfort band, SOC and "
                              "rate limits over the window");
      }
      break;
    }
    if (sol.status != lp::Status::kOptimal)
    {
      throw SolverError("horizon LP did not converge within " +
                            std::to_string(cfg.max_lp_iterations) + " pivots",
                        best);
    }

    std::vector<Vector> u(W, Vector(nu));
    std::vector<double> p(W);
    for (std::size_t k = 0; k < W; ++k)
    {
      for (Eigen::Index z = 0; z < nu; ++z)
      {
        u[k][z] = std::clamp(sol.x[layout.u[k][z]], model.u_min()[z], model.u_max()[z]);
      }
      p[k] = std::clamp(sol.x[layout.p[k]], -bess.max_discharge_kw, bess.max_charge_kw);
    }
    auto candidate = evaluate_trajectory(model, bess, x0, soc0, cfg, u, p);

    bool improved = false;
    if (is_feasible(candidate, model, bess, cfg))
    {
      double const obj = total_objective(candidate);
      if (!best || obj < total_objective(*best) - 1e-13 * (1.0 + std::abs(obj)))
      {
        improved = true;
        best     = std::move(candidate);
      }
    }
    else if (!best)
    {
      // Numerical edge: keep the LP answer so callers see something, the
      // polish pass and the checks below will sort it out.
      best = std::move(candidate);
    }

    // Move the bracket to the new iterate; shrink it where the iterate stayed.
    double largest_radius = 0.0;
    for (std::size_t k = 0; k < W; ++k)
    {
      for (Eigen::Index z = 0; z < nu; ++z)
      {
        double const moved = std::abs(u[k][z] - centre[k][z]);
        if (moved < 0.5 * radius[k][z])
        {
          radius[k][z] *= 0.5;
        }
        centre[k][z]   = u[k][z];
        largest_radius = std::max(largest_radius, radius[k][z] / (1.0 + model.u_max()[z] -
                                                                  model.u_min()[z]));
      }
    }
    stalled = improved ? 0 : stalled + 1;
    if (largest_radius < 1e-10 || stalled >= 4)
    {
      break;
    }
  }

  if (cfg.polish && best && is_feasible(*best, model, bess, cfg))
  {
    std::vector<Vector> u = best->u;
    std::vector<double> p = best->p_cd;
    double              obj = total_objective(*best);

    auto try_move = [&](double &slot, double lo, double hi, double delta) {
      double const saved = slot;
      slot               = std::clamp(saved + delta, lo, hi);
      if (slot == saved)
      {
        return false;
      }
      auto trial = evaluate_trajectory(model, bess, x0, soc0, cfg, u, p);
      if (is_feasible(trial, model, bess, cfg) &&
          total_objective(trial) < obj - 1e-14 * (1.0 + std::abs(obj)))
      {
        obj  = total_objective(trial);
        best = std::move(trial);
        return true;
      }
      slot = saved;
      return false;
    };

    double span = bess.max_discharge_kw + bess.max_charge_kw;
    for (Eigen::Index z = 0; z < nu; ++z)
    {
      span = std::max(span, model.u_max()[z] - model.u_min()[z]);
    }
    for (double step = span / 64.0; step > 1e-10 * (1.0 + span); step *= 0.5)
    {
      bool moved = true;
      for (int sweep = 0; moved && sweep < 20; ++sweep)
      {
        moved = false;
        for (std::size_t k = 0; k < W; ++k)
        {
          for (Eigen::Index z = 0; z < nu; ++z)
          {
            double const lo = model.u_min()[z];
            double const hi = model.u_max()[z];
            moved |= try_move(u[k][z], lo, hi, -step) || try_move(u[k][z], lo, hi, step);
          }
          double const lo = -bess.max_discharge_kw;
          double const hi = bess.max_charge_kw;
          moved |= try_move(p[k], lo, hi, -step) || try_move(p[k], lo, hi, step);
        }
      }
    }
  }

  if (!best || !is_feasible(*best, model, bess, cfg))
  {
    throw SolverError("horizon solver did not reach a feasible schedule", best);
  }
  return *best;
}

StepResult mpc_step(BuildingThermalModel const &model, BessParams const &bess,
                    ThermalState const &x0, BessState const &soc0, MpcConfig const &cfg,
                    HorizonSolver const &solver)
{
  StepResult out;
  out.plan         = solver(model, bess, x0, soc0, cfg);
  out.applied_u    = out.plan.u.front();
  out.applied_p_cd = out.plan.p_cd.front();
  out.p_total      = thermal::hvac_power(model, out.applied_u) + out.applied_p_cd;

  auto const step = thermal::step_thermal(model, x0, out.applied_u, cfg.disturbances[cfg.start]);
  out.y           = step.y;
  out.next_x      = step.next;
  out.next_soc    = thermal::step_bess(bess, soc0, out.applied_p_cd);
  return out;
}

std::vector<SeriesRow> run_receding_horizon(BuildingThermalModel const &model,
                                            BessParams const &bess, ThermalState const &x0,
                                            BessState const &soc0, MpcConfig const &cfg,
                                            std::size_t steps, HorizonSolver const &solver)
{
  if (steps > 0 && cfg.horizon_length() < cfg.start + steps - 1 + cfg.window)
  {
    throw ConfigError("forecasts", "forecasts must cover " + std::to_string(steps) +
                                       " steps plus the prediction window");
  }
  std::vector<SeriesRow> series;
  ThermalState           x   = x0;
  BessState              soc = soc0;
  for (std::size_t k = 0; k < steps; ++k)
  {
    auto const window = cfg.shifted(k);
    auto       r      = mpc_step(model, bess, x, soc, window, solver);
    series.push_back(SeriesRow{window.start, r.applied_u, r.applied_p_cd, r.p_total, r.y, soc.soc});
    x   = r.next_x;
    soc = r.next_soc;
  }
  return series;
}

void write_series_csv(std::ostream &out, std::vector<SeriesRow> const &series)
{
  Eigen::Index const nu = series.empty() ? 0 : series.front().u.size();
  Eigen::Index const ny = series.empty() ? 0 : series.front().y.size();
  out << "step";
  for (Eigen::Index z = 0; z < nu; ++z)
  {
    out << ",u" << z;
  }
  out << ",p_cd,p_total";
  for (Eigen::Index i = 0; i < ny; ++i)
  {
    out << ",y" << i;
  }
  out << ",soc\n";
  auto const precision = out.precision(17);
  for (auto const &row : series)
  {
    out << row.step;
    for (Eigen::Index z = 0; z < nu; ++z)
    {
      out << ',' << row.u[z];
    }
    out << ',' << row.p_cd << ',' << row.p_total;
    for (Eigen::Index i = 0; i < ny; ++i)
    {
      out << ',' << row.y[i];
    }
    out << ',' << row.soc << '\n';
  }
  out.precision(precision);
}

}  // namespace temarket::mpc
