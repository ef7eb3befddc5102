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

#include "temarket/scenario.hpp"

#include <cmath>
#include <fstream>

namespace temarket::oracle {
namespace {

using bus::Json;

double number_at(Json const &j, std::string const &key, std::string const &path)
{
  if (!j.is_object() || !j.contains(key) || !j[key].is_number())
  {
    throw ConfigError(path + "." + key, "must be a number");
  }
  double const v = j[key].get<double>();
  if (!std::isfinite(v))
  {
    throw ConfigError(path + "." + key, "must be finite");
  }
  return v;
}

Json const &array_at(Json const &j, std::string const &key)
{
  if (!j.contains(key) || !j[key].is_array())
  {
    throw ConfigError(key, "must be an array");
  }
  return j[key];
}

portfolio::Vector vector_of(Json const &j, std::string const &key)
{
  auto const       &a = array_at(j, key);
  portfolio::Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    if (!a[i].is_number())
    {
      throw ConfigError(key + "[" + std::to_string(i) + "]", "must be a number");
    }
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

portfolio::Matrix matrix_of(Json const &j, std::string const &key)
{
  auto const &a = array_at(j, key);
  auto const  n = static_cast<Eigen::Index>(a.size());
  portfolio::Matrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
  {
    auto const &row = a[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
    {
      throw ConfigError(key + "[" + std::to_string(r) + "]", "must be a row of the square matrix");
    }
    for (Eigen::Index c = 0; c < n; ++c)
    {
      auto const &v = row[static_cast<std::size_t>(c)];
      if (!v.is_number())
      {
        throw ConfigError(key, "entries must be numbers");
      }
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

Json vector_json(mpc::Vector const &v)
{
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
  {
    a.push_back(v[i]);
  }
  return a;
}

Json controls_json(std::vector<mpc::Vector> const &u)
{
  Json a = Json::array();
  for (auto const &v : u)
  {
    a.push_back(vector_json(v));
  }
  return a;
}

Json run_auction(Json const &doc)
{
  auto const inst   = parse_auction_instance(doc);
  auto const oracle = clear_by_enumeration(inst.offers, inst.demand, inst.convention);
  auto const solver = auction::clear_spsba(inst.offers, inst.demand, inst.convention);
  Json       out;
  out["kind"]   = "auction";
  out["oracle"] = result_to_json(oracle);
  out["solver"] = result_to_json(solver);
  out["match"]  = oracle == solver;
  return out;
}

Json run_mpo(Json const &doc)
{
  if (!doc.is_object())
  {
    throw ConfigError("", "instance must be an object");
  }
  portfolio::ReturnStatistics stats;
  stats.r_bar        = vector_of(doc, "r_bar");
  stats.sigma        = matrix_of(doc, "sigma");
  double const rorm  = number_at(doc, "rorm", "");
  double const step  = doc.contains("step") ? number_at(doc, "step", "")
                                            : (stats.r_bar.size() <= 2 ? 0.001 : 0.01);
  if (stats.sigma.rows() != stats.r_bar.size())
  {
    throw ConfigError("sigma", "must be square with one row per asset");
  }

  Json out;
  out["kind"] = "mpo";
  out["step"] = step;
  auto const grid = mpo_grid_search(stats.r_bar, stats.sigma, rorm, step);
  if (grid)
  {
    out["oracle"] = Json{{"w", grid->w}, {"variance", grid->variance}};
  }
  else
  {
    out["oracle"] = nullptr;
  }
  try
  {
    auto const w  = portfolio::solve_mpo(stats, rorm).w;
    out["solver"] = Json{{"w", vector_json(w)}, {"variance", w.dot(stats.sigma * w)}};
    if (grid)
    {
      out["difference"] = w.dot(stats.sigma * w) - grid->variance;
    }
  }
  catch (InfeasibleRormError const &e)
  {
    out["solver"] = nullptr;
    out["solver_error"] = e.what();
  }
  return out;
}

Json run_mpc(Json const &doc)
{
  auto const spec     = market::parse_mpc_spec(doc, "");
  auto const u_levels = doc.contains("u_levels") ? doc["u_levels"].get<std::size_t>() : 21;
  auto const p_levels = doc.contains("p_levels") ? doc["p_levels"].get<std::size_t>() : 11;

  Json out;
  out["kind"] = "mpc";
  auto const grid = mpc_grid_search(spec.model, spec.bess, spec.x0, spec.soc0, spec.cfg, u_levels,
                                    p_levels);
  if (grid)
  {
    out["oracle"] = Json{{"u", controls_json(grid->u)},
                         {"p_cd", grid->p_cd},
                         {"objective", grid->objective}};
  }
  else
  {
    out["oracle"] = nullptr;
  }
  try
  {
    auto const t     = mpc::solve_horizon(spec.model, spec.bess, spec.x0, spec.soc0, spec.cfg);
    auto const check = check_trajectory(spec.model, spec.bess, spec.x0, spec.soc0, spec.cfg, t);
    out["solver"]    = Json{{"u", controls_json(t.u)},
                            {"p_cd", t.p_cd},
                            {"cost", t.cost},
                            {"objective", t.cost + t.comfort_penalty},
                            {"bound_residual", check.bound_residual},
                            {"comfort_residual", check.comfort_residual},
                            {"constraints_ok", check.ok()}};
  }
  catch (Error const &e)
  {
    out["solver"]       = nullptr;
    out["solver_error"] = e.what();
  }
  return out;
}

}  // namespace

AuctionInstance parse_auction_instance(Json const &doc)
{
  if (!doc.is_object())
  {
    throw ConfigError("", "instance must be an object");
  }
  std::string const asker = doc.contains("asker") && doc["asker"].is_string()
                                ? doc["asker"].get<std::string>()
                                : std::string("A1");
  std::int64_t const ts = doc.contains("timestep") ? doc["timestep"].get<std::int64_t>() : 0;

  auto convention = auction::ClearingConvention::kStepPartial;
  if (doc.contains("clearing"))
  {
    auto const parsed = auction::parse_convention(doc["clearing"].get<std::string>());
    if (!parsed)
    {
      throw ConfigError("clearing", "expected \"step-partial\" or \"interpolated-block\"");
    }
    convention = *parsed;
  }

  std::vector<curve::CurvePoint> points;
  auto const                    &curve = array_at(doc, "curve");
  for (std::size_t i = 0; i < curve.size(); ++i)
  {
    std::string const path = "curve[" + std::to_string(i) + "]";
    points.push_back({number_at(curve[i], "price_cents", path),
                      number_at(curve[i], "quantity_kw", path)});
  }
  std::vector<BidOffer> offers;
  auto const           &list = array_at(doc, "offers");
  for (std::size_t i = 0; i < list.size(); ++i)
  {
    std::string const path = "offers[" + std::to_string(i) + "]";
    if (!list[i].contains("bidder") || !list[i]["bidder"].is_string())
    {
      throw ConfigError(path + ".bidder", "must be a string");
    }
    offers.push_back(BidOffer{list[i]["bidder"].get<std::string>(), asker,
                              number_at(list[i], "quantity_kw", path),
                              number_at(list[i], "price_cents", path)});
  }
  try
  {
    return AuctionInstance{offers, curve::PriceDemandCurve(asker, ts, points), convention};
  }
  catch (CurveError const &e)
  {
    throw ConfigError("curve", e.what());
  }
}

Json result_to_json(auction::ClearingResult const &result)
{
  Json j;
  j["asker"]                    = result.asker_id;
  j["timestep"]                 = result.timestep;
  j["intersection_quantity_kw"] = result.intersection_quantity_kw;
  j["equilibrium_quantity_kw"]  = result.equilibrium_quantity_kw;
  j["equilibrium_price_cents"]  = result.equilibrium_price_cents
                                      ? Json(*result.equilibrium_price_cents)
                                      : Json();
  Json txs = Json::array();
  for (auto const &t : result.transactions)
  {
    txs.push_back(Json{{"bidder", t.bidder_id},
                       {"cleared_quantity_kw", t.cleared_quantity_kw},
                       {"clearing_price_cents", t.clearing_price_cents},
                       {"fallback_price", t.fallback_price}});
  }
  j["transactions"] = std::move(txs);
  return j;
}

Json run_instance(std::string const &kind, Json const &doc)
{
  try
  {
    if (kind == "auction")
    {
      return run_auction(doc);
    }
    if (kind == "mpo")
    {
      return run_mpo(doc);
    }
    if (kind == "mpc")
    {
      return run_mpc(doc);
    }
  }
  catch (Json::exception const &e)
  {
    throw ConfigError("", e.what());
  }
  throw ConfigError("kind", "expected auction, mpo or mpc, got '" + kind + "'");
}

Json run_instance_file(std::string const &kind, std::string const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw IoError("cannot open instance file '" + path + "'");
  }
  Json doc;
  try
  {
    doc = Json::parse(in);
  }
  catch (Json::parse_error const &e)
  {
    throw ConfigError(path, e.what());
  }
  return run_instance(kind, doc);
}

}  // namespace temarket::oracle
