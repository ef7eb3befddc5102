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

#include "temarket/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace temarket::market {
namespace {

using bus::Json;

/// Field-path aware accessors over the scenario document.
class Reader
{
public:
  Reader(Json const &node, std::string path)
    : node_(node)
    , path_(std::move(path))
  {}

  std::string field(std::string const &key) const
  {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(std::string const &key) const
  {
    return node_.is_object() && node_.contains(key) && !node_[key].is_null();
  }

  Reader child(std::string const &key) const
  {
    if (!has(key))
    {
      throw ConfigError(field(key), "required");
    }
    return Reader(node_[key], field(key));
  }

  Reader at(std::size_t i) const
  {
    return Reader(node_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  Json const        &json() const { return node_; }
  std::string const &path() const { return path_; }

  void require_object() const
  {
    if (!node_.is_object())
    {
      throw ConfigError(path_, "must be an object");
    }
  }

  std::size_t size_of_array() const
  {
    if (!node_.is_array())
    {
      throw ConfigError(path_, "must be an array");
    }
    return node_.size();
  }

  double number() const
  {
    if (!node_.is_number())
    {
      throw ConfigError(path_, "must be a number");
    }
    double const v = node_.get<double>();
    if (!std::isfinite(v))
    {
      throw ConfigError(path_, "must be finite");
    }
    return v;
  }

  /// null maps to `null_value` (used for open comfort bounds).
  double number_or(double null_value) const
  {
    return node_.is_null() ? null_value : number();
  }

  std::string string() const
  {
    if (!node_.is_string())
    {
      throw ConfigError(path_, "must be a string");
    }
    return node_.get<std::string>();
  }

  std::uint64_t unsigned_integer() const
  {
    if (!node_.is_number_unsigned() && !(node_.is_number_integer() && node_.get<std::int64_t>() >= 0))
    {
      throw ConfigError(path_, "must be a non-negative integer");
    }
    return node_.get<std::uint64_t>();
  }

  double number(std::string const &key) const { return child(key).number(); }
  double number(std::string const &key, double fallback) const
  {
    return has(key) ? child(key).number() : fallback;
  }
  std::string string(std::string const &key) const { return child(key).string(); }

  mpc::Vector vector(double null_value = std::numeric_limits<double>::quiet_NaN()) const
  {
    std::size_t const n = size_of_array();
    mpc::Vector       v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
    {
      v[static_cast<Eigen::Index>(i)] =
          std::isnan(null_value) ? at(i).number() : at(i).number_or(null_value);
    }
    return v;
  }

  mpc::Matrix matrix(Eigen::Index rows_if_empty = 0) const
  {
    std::size_t const rows = size_of_array();
    if (rows == 0)
    {
      return mpc::Matrix(rows_if_empty, 0);
    }
    std::size_t const cols = at(0).size_of_array();
    mpc::Matrix       m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
    {
      Reader const row = at(r);
      if (row.size_of_array() != cols)
      {
        throw ConfigError(row.path(), "all matrix rows must have the same length");
      }
      for (std::size_t c = 0; c < cols; ++c)
      {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row.at(c).number();
      }
    }
    return m;
  }

private:
  Json const &node_;
  std::string path_;
};

bool valid_id(std::string const &id)
{
  return !id.empty() && id.find('/') == std::string::npos && id.find('*') == std::string::npos &&
         id != bus::kCoordinatorId && id != bus::kBroadcast && id != "control";
}

/// Comfort band: one row per step, or a single row repeated.
std::vector<mpc::Vector> band(Reader const &r, std::size_t steps, double open)
{
  std::vector<mpc::Vector> out;
  if (r.size_of_array() > 0 && !r.json()[0].is_array())
  {
    mpc::Vector const row = r.vector(open);
    out.assign(steps, row);
    return out;
  }
  for (std::size_t k = 0; k < r.size_of_array(); ++k)
  {
    out.push_back(r.at(k).vector(open));
  }
  return out;
}

MpcAskerSpec parse_mpc(Reader const &r)
{
  r.require_object();
  Reader const m = r.child("model");
  mpc::Matrix  a = m.child("A").matrix();
  mpc::Matrix  b = m.child("B").matrix(a.rows());
  mpc::Matrix  e = m.has("E") ? m.child("E").matrix(a.rows()) : mpc::Matrix(a.rows(), 0);
  mpc::Matrix  c = m.child("C").matrix();

  Reader const fan = m.child("fan");
  if (fan.size_of_array() != 4)
  {
    throw ConfigError(fan.path(), "expected [c1, c2, c3, c4]");
  }
  thermal::FanCoefficients coeffs{fan.at(0).number(), fan.at(1).number(), fan.at(2).number(),
                                  fan.at(3).number()};

  std::optional<mpc::BuildingThermalModel> model;
  try
  {
    model.emplace(a, b, e, c, coeffs, m.child("u_min").vector(), m.child("u_max").vector());
  }
  catch (ModelError const &err)
  {
    throw ConfigError(m.path(), err.what());
  }

  Reader const    br = r.child("bess");
  mpc::BessParams bess;
  bess.decay            = br.number("eta", 0.0);
  bess.efficiency       = br.number("rho", 1.0);
  bess.capacity_kwh     = br.number("q_bat_kwh", 1.0);
  bess.step_hours       = br.number("tau_h", 1.0);
  bess.soc_min          = br.number("e_min", 0.0);
  bess.soc_max          = br.number("e_max", 1.0);
  bess.max_discharge_kw = br.number("d_r_kw", 0.0);
  bess.max_charge_kw    = br.number("c_r_kw", 0.0);
  try
  {
    bess.validate();
  }
  catch (ModelError const &err)
  {
    throw ConfigError(br.path(), err.what());
  }

  mpc::MpcConfig cfg;
  cfg.window = static_cast<std::size_t>(r.child("window").unsigned_integer());
  Reader const prices = r.child("prices");
  for (std::size_t k = 0; k < prices.size_of_array(); ++k)
  {
    cfg.prices.push_back(prices.at(k).number());
  }
  std::size_t const steps = cfg.prices.size();
  if (r.has("disturbances"))
  {
    Reader const d = r.child("disturbances");
    for (std::size_t k = 0; k < d.size_of_array(); ++k)
    {
      cfg.disturbances.push_back(d.at(k).vector());
    }
  }
  else
  {
    cfg.disturbances.assign(steps, mpc::Vector(model->num_disturbances()));
  }
  double const inf = std::numeric_limits<double>::infinity();
  cfg.y_min        = band(r.child("y_min"), steps, -inf);
  cfg.y_max        = band(r.child("y_max"), steps, inf);
  if (r.has("slack_penalty"))
  {
    cfg.slack_penalty = r.number("slack_penalty");
  }
  if (r.has("pwl_segments"))
  {
    cfg.pwl_segments = static_cast<std::size_t>(r.child("pwl_segments").unsigned_integer());
  }

  mpc::ThermalState x0{r.child("x0").vector(), 0};
  mpc::BessState    soc0{r.number("soc0", bess.soc_min)};

  curve::CurveSweepConfig sweep;
  if (r.has("sweep"))
  {
    Reader const sw = r.child("sweep");
    sweep.lambda_lo = sw.number("lambda_lo");
    sweep.lambda_hi = sw.number("lambda_hi");
    sweep.samples   = static_cast<std::size_t>(sw.child("samples").unsigned_integer());
  }
  try
  {
    sweep.validate();
    cfg.validate(*model);
  }
  catch (ConfigError const &err)
  {
    throw ConfigError(r.field(err.field()), err.what());
  }
  if (x0.x.size() != model->num_states())
  {
    throw ConfigError(r.field("x0"), "must have one entry per state");
  }
  if (soc0.soc < bess.soc_min || soc0.soc > bess.soc_max)
  {
    throw ConfigError(r.field("soc0"), "initial SOC outside [e_min, e_max]");
  }
  return MpcAskerSpec{*model, bess, x0, soc0, cfg, sweep};
}

}  // namespace

MpcAskerSpec parse_mpc_spec(bus::Json const &node, std::string const &path)
{
  return parse_mpc(Reader(node, path));
}

ScenarioConfig ScenarioConfig::from_json(Json const &doc)
{
  Reader const root(doc, "");
  root.require_object();
  ScenarioConfig cfg;
  cfg.name   = root.has("name") ? root.string("name") : "scenario";
  cfg.rounds = root.has("rounds") ? root.child("rounds").unsigned_integer() : 1;
  cfg.seed   = root.has("seed") ? root.child("seed").unsigned_integer() : 0;
  if (root.has("clearing"))
  {
    auto const conv = auction::parse_convention(root.string("clearing"));
    if (!conv)
    {
      throw ConfigError("clearing", "expected \"step-partial\" or \"interpolated-block\"");
    }
    cfg.clearing = *conv;
  }

  if (root.has("askers"))
  {
    Reader const list = root.child("askers");
    for (std::size_t i = 0; i < list.size_of_array(); ++i)
    {
      Reader const r = list.at(i);
      r.require_object();
      AskerSpec spec;
      spec.id = r.string("id");
      if (r.has("curve") == r.has("mpc"))
      {
        throw ConfigError(r.path(), "give exactly one of \"curve\" and \"mpc\"");
      }
      if (r.has("curve"))
      {
        Reader const pts = r.child("curve");
        std::vector<curve::CurvePoint> points;
        for (std::size_t k = 0; k < pts.size_of_array(); ++k)
        {
          Reader const p = pts.at(k);
          points.push_back(curve::CurvePoint{p.number("price_cents"), p.number("quantity_kw")});
        }
        try
        {
          curve::PriceDemandCurve(spec.id, 0, points);
        }
        catch (CurveError const &err)
        {
          throw ConfigError(pts.path(), err.what());
        }
        spec.curve = std::move(points);
      }
      else
      {
        spec.mpc = parse_mpc(r.child("mpc"));
      }
      cfg.askers.push_back(std::move(spec));
    }
  }

  if (root.has("bidders"))
  {
    Reader const list = root.child("bidders");
    for (std::size_t i = 0; i < list.size_of_array(); ++i)
    {
      Reader const r = list.at(i);
      r.require_object();
      BidderSpec spec;
      spec.id          = r.string("id");
      spec.capacity_kw = r.number("capacity_kw");
      bool const fixed = r.has("offers");
      bool const mpo   = r.has("rorm") || r.has("ask_prices");
      if (fixed == mpo)
      {
        throw ConfigError(r.path(), "give either \"offers\" or \"rorm\" with \"ask_prices\"");
      }
      if (fixed)
      {
        Reader const offers = r.child("offers");
        for (std::size_t k = 0; k < offers.size_of_array(); ++k)
        {
          Reader const o = offers.at(k);
          BidOffer     offer{spec.id, o.string("asker"), o.number("quantity_kw"),
                         o.number("price_cents")};
          if (!(offer.quantity_kw > 0.0))
          {
            throw ConfigError(o.field("quantity_kw"), "must be positive");
          }
          if (offer.price_cents < 0.0)
          {
            throw ConfigError(o.field("price_cents"), "must be non-negative");
          }
          spec.offers.push_back(std::move(offer));
        }
      }
      else
      {
        portfolio::BidderConfig pc;
        pc.bidder_id   = spec.id;
        pc.capacity_kw = spec.capacity_kw;
        pc.rorm        = r.number("rorm");
        pc.n_samples   = r.has("n_samples")
                             ? static_cast<std::size_t>(r.child("n_samples").unsigned_integer())
                             : 2;
        Reader const asks = r.child("ask_prices");
        asks.require_object();
        for (auto const &[asker, value] : asks.json().items())
        {
          pc.ask_prices[asker] = asks.child(asker).number();
        }
        try
        {
          pc.validate();
        }
        catch (ConfigError const &err)
        {
          throw ConfigError(r.field(err.field()), err.what());
        }
        spec.portfolio = std::move(pc);
      }
      cfg.bidders.push_back(std::move(spec));
    }
  }

  if (root.has("bus"))
  {
    Reader const b = root.child("bus");
    b.require_object();
    cfg.bus.stage_timeout_s = b.number("stage_timeout_s", cfg.bus.stage_timeout_s);
    if (!(cfg.bus.stage_timeout_s > 0.0))
    {
      throw ConfigError("bus.stage_timeout_s", "must be positive");
    }
    if (b.has("port"))
    {
      auto const port = b.child("port").unsigned_integer();
      if (port > 65535)
      {
        throw ConfigError("bus.port", "must fit in 16 bits");
      }
      cfg.bus.port = static_cast<std::uint16_t>(port);
    }
  }

  if (!root.has("acl") || (root.json()["acl"].is_string() && root.json()["acl"] == "auto"))
  {
    cfg.acl = default_policy(cfg.askers, cfg.bidders);
  }
  else
  {
    cfg.acl = bus::AuthPolicy::from_json(root.json()["acl"]);
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::from_file(std::string const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw IoError("cannot open scenario file '" + path + "'");
  }
  Json doc;
  try
  {
    doc = Json::parse(in);
  }
  catch (nlohmann::json::parse_error const &e)
  {
    throw ConfigError("", std::string("scenario is not valid JSON: ") + e.what());
  }
  return from_json(doc);
}

std::vector<std::string> ScenarioConfig::participant_ids() const
{
  std::vector<std::string> ids;
  for (auto const &a : askers)
  {
    ids.push_back(a.id);
  }
  for (auto const &b : bidders)
  {
    ids.push_back(b.id);
  }
  return ids;
}

void ScenarioConfig::validate() const
{
  if (rounds < 1)
  {
    throw ConfigError("rounds", "must be at least 1");
  }
  std::set<std::string> ids;
  std::set<std::string> asker_ids;
  for (std::size_t i = 0; i < askers.size(); ++i)
  {
    std::string const field = "askers[" + std::to_string(i) + "].id";
    if (!valid_id(askers[i].id))
    {
      throw ConfigError(field, "invalid agent id '" + askers[i].id + "'");
    }
    if (!ids.insert(askers[i].id).second)
    {
      throw ConfigError(field, "duplicate agent id '" + askers[i].id + "'");
    }
    asker_ids.insert(askers[i].id);
    if (askers[i].mpc)
    {
      auto const &m = *askers[i].mpc;
      if (m.cfg.horizon_length() < m.cfg.start + rounds - 1 + m.cfg.window)
      {
        throw ConfigError("askers[" + std::to_string(i) + "].mpc.prices",
                          "forecasts must cover every round plus the prediction window");
      }
    }
  }
  for (std::size_t i = 0; i < bidders.size(); ++i)
  {
    auto const       &b     = bidders[i];
    std::string const field = "bidders[" + std::to_string(i) + "]";
    if (!valid_id(b.id))
    {
      throw ConfigError(field + ".id", "invalid agent id '" + b.id + "'");
    }
    if (!ids.insert(b.id).second)
    {
      throw ConfigError(field + ".id", "duplicate agent id '" + b.id + "'");
    }
    if (!(b.capacity_kw > 0.0) || !std::isfinite(b.capacity_kw))
    {
      throw ConfigError(field + ".capacity_kw", "must be positive");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < b.offers.size(); ++k)
    {
      if (!asker_ids.count(b.offers[k].asker_id))
      {
        throw ConfigError(field + ".offers[" + std::to_string(k) + "].asker",
                          "unknown asker '" + b.offers[k].asker_id + "'");
      }
      total += b.offers[k].quantity_kw;
    }
    if (total > b.capacity_kw + 1e-8)
    {
      throw ConfigError(field + ".offers", "offers total " + std::to_string(total) +
                                               " kW, above the capacity");
    }
    if (b.portfolio)
    {
      for (auto const &[asker, price] : b.portfolio->ask_prices)
      {
        if (!asker_ids.count(asker))
        {
          throw ConfigError(field + ".ask_prices." + asker, "unknown asker '" + asker + "'");
        }
      }
    }
  }

  // Every declared flow must be allowed by the ACL.
  auto need_pub = [&](std::string const &agent, std::string const &topic) {
    if (!acl.may_publish(agent, topic))
    {
      throw ConfigError("acl.publish." + agent, "does not allow publishing to '" + topic + "'");
    }
  };
  auto need_sub = [&](std::string const &agent, std::string const &pattern) {
    if (!acl.may_subscribe(agent, pattern))
    {
      throw ConfigError("acl.subscribe." + agent, "does not allow subscribing to '" + pattern +
                                                      "'");
    }
  };
  using bus::Stage;
  for (auto const &a : askers)
  {
    need_pub(a.id, bus::data_topic(Stage::kDemandBid, a.id, bus::kBroadcast));
    need_sub(a.id, bus::data_topic(Stage::kBidOffer, "*", a.id));
    for (auto const &b : bidders)
    {
      need_pub(a.id, bus::data_topic(Stage::kMarketClearing, a.id, b.id));
    }
  }
  for (auto const &b : bidders)
  {
    need_sub(b.id, bus::data_topic(Stage::kDemandBid, "*", "*"));
    need_sub(b.id, bus::data_topic(Stage::kMarketClearing, "*", b.id));
    std::set<std::string> targets;
    for (auto const &o : b.offers)
    {
      targets.insert(o.asker_id);
    }
    if (b.portfolio)
    {
      for (auto const &[asker, price] : b.portfolio->ask_prices)
      {
        targets.insert(asker);
      }
    }
    for (auto const &t : targets)
    {
      need_pub(b.id, bus::data_topic(Stage::kBidOffer, b.id, t));
    }
  }
}

bus::AuthPolicy default_policy(std::vector<AskerSpec> const &askers,
                               std::vector<BidderSpec> const &bidders)
{
  using bus::Stage;
  bus::AuthPolicy policy;
  for (auto const &a : askers)
  {
    policy.publish[a.id] = {bus::data_topic(Stage::kDemandBid, a.id, bus::kBroadcast),
                            bus::data_topic(Stage::kMarketClearing, a.id, "*")};
    policy.subscribe[a.id] = {bus::data_topic(Stage::kBidOffer, "*", a.id)};
  }
  for (auto const &b : bidders)
  {
    policy.publish[b.id]   = {bus::data_topic(Stage::kBidOffer, b.id, "*")};
    policy.subscribe[b.id] = {bus::data_topic(Stage::kDemandBid, "*", "*"),
                              bus::data_topic(Stage::kMarketClearing, "*", b.id)};
  }
  return policy;
}

}  // namespace temarket::market
