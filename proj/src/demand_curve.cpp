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

#include "temarket/demand_curve.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

namespace temarket::curve {
namespace {

constexpr double kDedupTolerance = 1e-9;

}  // namespace

PriceDemandCurve::PriceDemandCurve(std::string asker_id, std::int64_t timestep,
                                   std::vector<CurvePoint> points)
  : asker_id_(std::move(asker_id))
  , timestep_(timestep)
  , points_(std::move(points))
{
  if (points_.empty())
  {
    throw CurveError("demand curve for '" + asker_id_ + "' has no points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i)
  {
    auto const &p = points_[i];
    if (!std::isfinite(p.price_cents) || !std::isfinite(p.quantity_kw) || p.price_cents < 0.0 ||
        p.quantity_kw < 0.0)
    {
      throw CurveError("curve point " + std::to_string(i) +
                       " must have finite, non-negative price and quantity");
    }
    if (i > 0 && !(p.price_cents < points_[i - 1].price_cents))
    {
      throw CurveError("curve prices must be strictly descending");
    }
    if (i > 0 && p.quantity_kw < points_[i - 1].quantity_kw)
    {
      throw CurveError("curve quantity must not fall as price falls");
    }
  }
}

double PriceDemandCurve::demand_at(double price) const
{
  if (std::isnan(price) || price < 0.0)
  {
    throw CurveError("demand queried at a negative price");
  }
  double quantity = 0.0;
  for (auto const &p : points_)
  {
    if (p.price_cents < price)
    {
      break;
    }
    quantity = p.quantity_kw;
  }
  return quantity;
}

void CurveSweepConfig::validate() const
{
  if (!(std::isfinite(lambda_lo) && std::isfinite(lambda_hi) && lambda_lo < lambda_hi))
  {
    throw ConfigError("sweep", "lambda_lo must be below lambda_hi");
  }
  if (lambda_lo < 0.0)
  {
    throw ConfigError("sweep.lambda_lo", "sweep prices must be non-negative");
  }
  if (samples < 2)
  {
    throw ConfigError("sweep.samples", "need at least two sweep prices");
  }
}

double CurveSweepConfig::price(std::size_t index) const
{
  if (index + 1 == samples)
  {
    return lambda_hi;
  }
  double const inc = (lambda_hi - lambda_lo) / static_cast<double>(samples - 1);
  return lambda_lo + inc * static_cast<double>(index);
}

PriceDemandCurve build_curve(std::string asker_id, std::int64_t timestep,
                             std::vector<CurvePoint> samples, SweepLog *log)
{
  std::sort(samples.begin(), samples.end(),
            [](CurvePoint const &a, CurvePoint const &b) { return a.price_cents < b.price_cents; });

  // Walk upward in price; nothing may demand more than the next cheaper point.
  double      repair   = 0.0;
  std::size_t repaired = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
  {
    double const cap = samples[i - 1].quantity_kw;
    if (samples[i].quantity_kw > cap)
    {
      repair = std::max(repair, samples[i].quantity_kw - cap);
      ++repaired;
      samples[i].quantity_kw = cap;
    }
  }

  // Descending price; keep the highest price of each quantity level.
  std::reverse(samples.begin(), samples.end());
  std::vector<CurvePoint> points;
  for (auto const &s : samples)
  {
    if (!points.empty() && s.price_cents == points.back().price_cents)
    {
      points.back().quantity_kw = std::max(points.back().quantity_kw, s.quantity_kw);
      continue;
    }
    if (!points.empty() && s.quantity_kw - points.back().quantity_kw <= kDedupTolerance)
    {
      continue;
    }
    points.push_back(s);
  }

  if (log)
  {
    log->repair_kw = repair;
    log->repaired  = repaired;
  }
  return PriceDemandCurve(std::move(asker_id), timestep, std::move(points));
}

PriceDemandCurve generate_curve(mpc::BuildingThermalModel const &model, mpc::BessParams const &bess,
                                mpc::ThermalState const &x0, mpc::BessState const &soc0,
                                mpc::MpcConfig const &cfg, CurveSweepConfig const &sweep,
                                std::string asker_id, SweepLog *log,
                                mpc::HorizonSolver const &solver, bool parallel)
{
  sweep.validate();
  cfg.validate(model);

  auto solve_at = [&](std::size_t i) -> CurvePoint {
    double const price = sweep.price(i);
    try
    {
      auto const step = mpc::mpc_step(model, bess, x0, soc0, cfg.with_price(0, price), solver);
      return CurvePoint{price, std::max(step.p_total, 0.0)};
    }
    catch (InfeasibleError const &e)
    {
      std::ostringstream msg;
      msg << e.what() << " (sweep price " << price << " cents/kW)";
      throw InfeasibleError(msg.str(), price);
    }
  };

  std::vector<CurvePoint> raw;
  if (parallel && sweep.samples > 1)
  {
    std::vector<std::future<CurvePoint>> jobs;
    for (std::size_t i = 0; i < sweep.samples; ++i)
    {
      jobs.push_back(std::async(std::launch::async, solve_at, i));
    }
    // Joined in index order so the first failing price is reported.
    for (auto &job : jobs)
    {
      raw.push_back(job.get());
    }
  }
  else
  {
    for (std::size_t i = 0; i < sweep.samples; ++i)
    {
      raw.push_back(solve_at(i));
    }
  }

  if (log)
  {
    log->raw = raw;
  }
  return build_curve(std::move(asker_id), static_cast<std::int64_t>(x0.timestep), std::move(raw),
                     log);
}

nlohmann::ordered_json curve_to_message(PriceDemandCurve const &curve)
{
  nlohmann::ordered_json msg;
  msg["stage"]    = "demand-bid";
  msg["sender"]   = curve.asker_id();
  msg["timestep"] = curve.timestep();
  auto points     = nlohmann::ordered_json::array();
  for (auto const &p : curve.points())
  {
    nlohmann::ordered_json point;
    point["price_cents"] = p.price_cents;
    point["quantity_kw"] = p.quantity_kw;
    points.push_back(std::move(point));
  }
  msg["curve"] = std::move(points);
  return msg;
}

PriceDemandCurve curve_from_message(nlohmann::ordered_json const &payload)
{
  auto fail = [](std::string const &what) -> PriceDemandCurve {
    throw SchemaError("demand-bid payload: " + what);
  };
  if (!payload.is_object() || !payload.contains("stage") || payload["stage"] != "demand-bid")
  {
    return fail("stage must be \"demand-bid\"");
  }
  if (!payload.contains("sender") || !payload["sender"].is_string())
  {
    return fail("sender must be a string");
  }
  if (!payload.contains("timestep") || !payload["timestep"].is_number_integer())
  {
    return fail("timestep must be an integer");
  }
  if (!payload.contains("curve") || !payload["curve"].is_array())
  {
    return fail("curve must be an array");
  }
  if (payload.size() != 4)
  {
    return fail("unexpected fields");
  }
  std::vector<CurvePoint> points;
  for (auto const &p : payload["curve"])
  {
    if (!p.is_object() || p.size() != 2 || !p.contains("price_cents") ||
        !p.contains("quantity_kw") || !p["price_cents"].is_number() ||
        !p["quantity_kw"].is_number())
    {
      return fail("curve points need numeric price_cents and quantity_kw");
    }
    points.push_back(CurvePoint{p["price_cents"].get<double>(), p["quantity_kw"].get<double>()});
  }
  return PriceDemandCurve(payload["sender"].get<std::string>(),
                          payload["timestep"].get<std::int64_t>(), std::move(points));
}

}  // namespace temarket::curve
