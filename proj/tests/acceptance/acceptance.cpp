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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Every random stream is seeded, so reruns see the same instances.

#include "temarket/agents.hpp"
#include "temarket/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

namespace {

using namespace temarket;
using Clock = std::chrono::steady_clock;

struct Verdict
{
  bool        pass = true;
  std::string detail;
};

int failures = 0;

void criterion(char const *name, double budget_s, std::function<Verdict()> const &body)
{
  auto const t0 = Clock::now();
  Verdict    v;
  try
  {
    v = body();
  }
  catch (std::exception const &e)
  {
    v = {false, std::string("exception: ") + e.what()};
  }
  double const secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (budget_s > 0.0 && secs > budget_s)
  {
    v.pass = false;
    v.detail += " [over the " + std::to_string(static_cast<int>(budget_s)) + " s budget]";
  }
  failures += v.pass ? 0 : 1;
  std::printf("%s  %-34s %8.3f s  %s\n", v.pass ? "PASS" : "FAIL", name, secs, v.detail.c_str());
  std::fflush(stdout);
}

std::string scenario_path(char const *name)
{
  return std::string(TEMARKET_SOURCE_DIR) + "/scenarios/" + name;
}

std::optional<auction::Transaction> transaction(auction::ClearingResult const &r,
                                                std::string const             &bidder)
{
  for (auto const &t : r.transactions)
  {
    if (t.bidder_id == bidder)
    {
      return t;
    }
  }
  return std::nullopt;
}

double dispatched(auction::ClearingResult const &r, std::string const &bidder)
{
  auto const t = transaction(r, bidder);
  return t ? t->cleared_quantity_kw : 0.0;
}

market::AuctionRecord const &auction_of(market::MarketReport const &rep, std::string const &asker)
{
  for (auto const &a : rep.rounds.at(0).auctions)
  {
    if (a.asker_id == asker)
    {
      return a;
    }
  }
  throw std::runtime_error("no auction for " + asker);
}

/// Number of auctions whose result differs from the enumeration oracle.
int oracle_mismatches(market::MarketReport const &rep)
{
  int bad = 0;
  for (auto const &r : rep.rounds)
  {
    for (auto const &a : r.auctions)
    {
      if (!a.curve)
      {
        continue;
      }
      auto const expect = oracle::clear_by_enumeration(a.offers, *a.curve, rep.clearing);
      bad += expect == a.result ? 0 : 1;
    }
  }
  return bad;
}

std::string fmt(double v)
{
  return market::format_number(v);
}

// Scenarios -------------------------------------------------------------------

Verdict scenario_1()
{
  auto const cfg = market::ScenarioConfig::from_file(scenario_path("s1.json"));
  auto const rep = market::run_scenario(cfg);
  auto const &a1 = auction_of(rep, "A1").result;
  auto const &a2 = auction_of(rep, "A2").result;
  bool const  b1 = transaction(a1, "B1") || transaction(a2, "B1");
  bool const  b2 = transaction(a1, "B2") || transaction(a2, "B2");
  bool const  cleared = a1.equilibrium_quantity_kw > 0.0 && a2.equilibrium_quantity_kw > 0.0;
  int const   bad     = oracle_mismatches(rep);
  return {rep.complete && cleared && b1 && b2 && bad == 0,
          "A1 " + fmt(a1.equilibrium_quantity_kw) + " kW, A2 " + fmt(a2.equilibrium_quantity_kw) +
              " kW, B1 traded " + (b1 ? "yes" : "no") + ", B2 traded " + (b2 ? "yes" : "no") +
              ", oracle mismatches " + std::to_string(bad)};
}

Verdict scenario_2()
{
  auto const  cfg = market::ScenarioConfig::from_file(scenario_path("s2.json"));
  auto const  rep = market::run_scenario(cfg);
  double const in_a1 = dispatched(auction_of(rep, "A1").result, "B2");
  double const in_a2 = dispatched(auction_of(rep, "A2").result, "B2");
  int const    bad   = oracle_mismatches(rep);
  return {rep.complete && in_a1 > 0.0 && in_a2 == 0.9 && bad == 0,
          "B2 gets " + fmt(in_a1) + " kW in A1 and " + fmt(in_a2) +
              " kW in A2, oracle mismatches " + std::to_string(bad)};
}

Verdict scenario_3()
{
  auto const   cfg = market::ScenarioConfig::from_file(scenario_path("s3.json"));
  auto const   rep = market::run_scenario(cfg);
  double const b1_a1 = dispatched(auction_of(rep, "A1").result, "B1");
  double const b1_a2 = dispatched(auction_of(rep, "A2").result, "B1");
  double const b2_a1 = dispatched(auction_of(rep, "A1").result, "B2");
  int const    bad   = oracle_mismatches(rep);
  return {rep.complete && b1_a1 > 0.0 && b1_a2 > 0.0 && b2_a1 == 0.0 && bad == 0,
          "B1 gets " + fmt(b1_a1) + " / " + fmt(b1_a2) + " kW, B2 gets " + fmt(b2_a1) +
              " kW in A1, oracle mismatches " + std::to_string(bad)};
}

// Auction properties ------------------------------------------------------------

struct AuctionCase
{
  std::vector<BidOffer>          offers;
  std::vector<curve::CurvePoint> demand;
};

double on_grid(std::mt19937_64 &rng, int lo, int hi)
{
  return 0.05 * static_cast<double>(std::uniform_int_distribution<int>(lo, hi)(rng));
}

AuctionCase random_auction(std::mt19937_64 &rng, bool single_offer)
{
  AuctionCase c;
  int const   bidders = std::uniform_int_distribution<int>(1, 5)(rng);
  for (int b = 0; b < bidders; ++b)
  {
    int const n = single_offer ? 1 : std::uniform_int_distribution<int>(1, 2)(rng);
    for (int k = 0; k < n; ++k)
    {
      c.offers.push_back(BidOffer{"B" + std::to_string(b + 1), "A1", on_grid(rng, 1, 30),
                                  on_grid(rng, 1, 200)});
    }
  }
  int const     steps = std::uniform_int_distribution<int>(1, 6)(rng);
  std::set<int> prices;
  while (static_cast<int>(prices.size()) < steps)
  {
    prices.insert(std::uniform_int_distribution<int>(1, 200)(rng));
  }
  int units = std::uniform_int_distribution<int>(0, 20)(rng);
  for (auto it = prices.rbegin(); it != prices.rend(); ++it)
  {
    c.demand.push_back({0.05 * *it, 0.05 * units});
    units += std::uniform_int_distribution<int>(1, 20)(rng);
  }
  return c;
}

Verdict spsba_oracle()
{
  std::mt19937_64 rng(20260101);
  int             bad = 0;
  int const       n   = 1000;
  for (int i = 0; i < n; ++i)
  {
    auto const c = random_auction(rng, false);
    curve::PriceDemandCurve const demand("A1", 0, c.demand);
    for (auto conv : {auction::ClearingConvention::kStepPartial,
                      auction::ClearingConvention::kInterpolatedBlock})
    {
      bad += auction::clear_spsba(c.offers, demand, conv) ==
                     oracle::clear_by_enumeration(c.offers, demand, conv)
                 ? 0
                 : 1;
    }
  }
  return {bad == 0, std::to_string(n) + " instances x 2 conventions, " + std::to_string(bad) +
                        " mismatches"};
}

Verdict vickrey()
{
  std::mt19937_64 rng(424242);
  int             instances = 0;
  int             probes    = 0;
  int             changed   = 0;
  int             draws     = 0;
  while (instances < 200 && draws < 100000)
  {
    ++draws;
    auto const c = random_auction(rng, true);
    curve::PriceDemandCurve const demand("A1", 0, c.demand);
    auto const base = auction::clear_spsba(c.offers, demand);
    if (base.transactions.empty())
    {
      continue;
    }
    auto const &pick = base.transactions[std::uniform_int_distribution<std::size_t>(
        0, base.transactions.size() - 1)(rng)];

    auto const supply = auction::aggregate_bids(c.offers);
    std::size_t j     = 0;
    while (supply.segments[j].bidder_id != pick.bidder_id)
    {
      ++j;
    }
    double const lo = j == 0 ? 0.0 : supply.segments[j - 1].price_cents;
    double const hi = j + 1 == supply.segments.size() ? supply.segments[j].price_cents + 5.0
                                                      : supply.segments[j + 1].price_cents;
    if (!(hi > lo))
    {
      continue;
    }
    int checked = 0;
    for (int k = 1; k <= 9; ++k)
    {
      double const price = lo + (hi - lo) * k / 10.0;
      auto         moved = c.offers;
      for (auto &o : moved)
      {
        if (o.bidder_id == pick.bidder_id)
        {
          o.price_cents = price;
        }
      }
      auto const again = auction::clear_spsba(moved, demand);
      auto const t     = transaction(again, pick.bidder_id);
      if (again.intersection_quantity_kw != base.intersection_quantity_kw ||
          again.equilibrium_quantity_kw != base.equilibrium_quantity_kw || !t)
      {
        continue;  // outside the Q*-preserving interval
      }
      ++checked;
      changed += t->clearing_price_cents == pick.clearing_price_cents ? 0 : 1;
    }
    if (checked > 0)
    {
      ++instances;
      probes += checked;
    }
  }
  return {instances == 200 && changed == 0,
          std::to_string(instances) + " instances, " + std::to_string(probes) +
              " perturbations, " + std::to_string(changed) + " price changes"};
}

// Portfolio ---------------------------------------------------------------------

portfolio::Matrix random_samples(std::mt19937_64 &rng, int rows, int cols, double lo, double hi)
{
  std::uniform_real_distribution<double> u(lo, hi);
  portfolio::Matrix                      m(rows, cols);
  for (int r = 0; r < rows; ++r)
  {
    for (int c = 0; c < cols; ++c)
    {
      m(r, c) = u(rng);
    }
  }
  return m;
}

Verdict mpo_oracle()
{
  std::mt19937_64 rng(77);
  double          worst_gap      = 0.0;
  double          worst_residual = 0.0;
  double          above_grid     = 0.0;
  int             count          = 0;
  for (int l : {2, 3})
  {
    double const step = l == 2 ? 0.001 : 0.01;
    for (int i = 0; i < 100; ++i)
    {
      int const  n     = std::uniform_int_distribution<int>(l + 1, 8)(rng);
      auto const stats = portfolio::return_stats(random_samples(rng, n, l, -0.5, 1.5));
      double const lo  = stats.r_bar.minCoeff();
      double const hi  = stats.r_bar.maxCoeff();
      double const rorm = lo + (hi - lo) * std::uniform_real_distribution<double>(-0.2, 0.95)(rng);

      auto const w    = portfolio::solve_mpo(stats, rorm).w;
      auto const grid = oracle::mpo_grid_search(stats.r_bar, stats.sigma, rorm, step);
      if (!grid)
      {
        return {false, "grid found no feasible point for instance " + std::to_string(count)};
      }
      double const variance = w.dot(stats.sigma * w);
      worst_gap             = std::max(worst_gap, std::abs(variance - grid->variance));
      above_grid            = std::max(above_grid, variance - grid->variance);
      worst_residual = std::max({worst_residual, std::abs(w.sum() - 1.0), -w.minCoeff(),
                                 w.maxCoeff() - 1.0, rorm - stats.r_bar.dot(w)});
      ++count;
    }
  }
  return {worst_gap <= 1e-3 && worst_residual <= 1e-8,
          std::to_string(count) + " instances, max |objective - grid| " + fmt(worst_gap) +
              ", max objective above grid " + fmt(above_grid) + ", max residual " +
              fmt(worst_residual)};
}

Verdict covariance()
{
  std::mt19937_64 rng(5150);
  double          asym = 0.0, min_eig = 0.0, diff = 0.0;
  for (int i = 0; i < 500; ++i)
  {
    int const  n     = std::uniform_int_distribution<int>(2, 12)(rng);
    int const  l     = std::uniform_int_distribution<int>(1, 5)(rng);
    auto const r     = random_samples(rng, n, l, -2.0, 2.0);
    auto const stats = portfolio::return_stats(r);
    asym = std::max(asym, (stats.sigma - stats.sigma.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<portfolio::Matrix> eig(stats.sigma);
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    for (int a = 0; a < l; ++a)
    {
      for (int b = 0; b < l; ++b)
      {
        double ma = 0.0, mb = 0.0;
        for (int k = 0; k < n; ++k)
        {
          ma += r(k, a);
          mb += r(k, b);
        }
        ma /= n;
        mb /= n;
        double s = 0.0;
        for (int k = 0; k < n; ++k)
        {
          s += (r(k, a) - ma) * (r(k, b) - mb);
        }
        diff = std::max(diff, std::abs(s / n - stats.sigma(a, b)));
      }
    }
  }
  return {asym == 0.0 && min_eig >= -1e-9 && diff <= 1e-12,
          "max asymmetry " + fmt(asym) + ", min eigenvalue " + fmt(min_eig) +
              ", max |sigma - direct| " + fmt(diff)};
}

// MPC ---------------------------------------------------------------------------

struct ToyBuilding
{
  mpc::BuildingThermalModel model;
  mpc::BessParams           bess;
  mpc::ThermalState         x0;
  mpc::BessState            soc0;
  mpc::MpcConfig            cfg;
};

ToyBuilding random_building(std::mt19937_64 &rng, std::size_t window)
{
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  mpc::Matrix a(1, 1), b(1, 1), e(1, 1), c(1, 1);
  a(0, 0) = u(0.7, 0.95);
  b(0, 0) = -u(1.0, 3.0);
  e(0, 0) = 1.0 - a(0, 0);
  c(0, 0) = 1.0;
  thermal::FanCoefficients fan{u(0.5, 2.0), u(0.0, 1.0), u(0.5, 1.5), u(0.05, 0.3)};
  mpc::Vector              lo(1), hi(1);
  lo << 0.0;
  hi << 1.0;

  mpc::BessParams bess;
  bess.decay            = u(0.0, 0.02);
  bess.efficiency       = u(0.85, 1.0);
  bess.capacity_kwh     = u(1.0, 3.0);
  bess.step_hours       = 1.0;
  bess.soc_min          = 0.1;
  bess.soc_max          = 0.9;
  bess.max_discharge_kw = u(0.05, 0.2);
  bess.max_charge_kw    = u(0.05, 0.2);

  mpc::MpcConfig cfg;
  cfg.window = window;
  for (std::size_t k = 0; k < window; ++k)
  {
    cfg.prices.push_back(u(1.0, 10.0));
    cfg.disturbances.push_back(mpc::Vector::Constant(1, u(28.0, 34.0)));
    cfg.y_min.push_back(mpc::Vector::Constant(1, 20.0));
    cfg.y_max.push_back(mpc::Vector::Constant(1, u(22.5, 24.0)));
  }
  return ToyBuilding{mpc::BuildingThermalModel(a, b, e, c, fan, lo, hi), bess,
                     mpc::ThermalState{mpc::Vector::Constant(1, u(22.5, 24.0)), 0},
                     mpc::BessState{u(0.3, 0.7)}, cfg};
}

Verdict mpc_oracle()
{
  std::mt19937_64 rng(31337);
  double          worst_ratio = 0.0;
  int             violations  = 0;
  int             count       = 0;
  int             draws       = 0;
  while (count < 20 && draws < 1000)
  {
    ++draws;
    std::size_t const w = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    auto const        t = random_building(rng, w);
    auto const grid = oracle::mpc_grid_search(t.model, t.bess, t.x0, t.soc0, t.cfg, 21, 11);
    if (!grid)
    {
      continue;  // the grid itself has no feasible point; not a usable instance
    }
    auto const sol   = mpc::solve_horizon(t.model, t.bess, t.x0, t.soc0, t.cfg);
    auto const check = oracle::check_trajectory(t.model, t.bess, t.x0, t.soc0, t.cfg, sol);
    violations += check.ok() ? 0 : 1;
    double const objective = sol.cost + sol.comfort_penalty;
    if (objective > 1.02 * grid->objective + 1e-9)
    {
      ++violations;
    }
    worst_ratio = std::max(worst_ratio, grid->objective > 0.0 ? objective / grid->objective : 0.0);
    ++count;
  }
  return {count == 20 && violations == 0,
          std::to_string(count) + " instances, worst cost/grid " + fmt(worst_ratio) + ", " +
              std::to_string(violations) + " violations"};
}

Verdict curve_monotonicity()
{
  std::mt19937_64 rng(2718);
  double          worst_repair = 0.0;
  int             bad          = 0;
  int             count        = 0;
  int             draws        = 0;
  curve::CurveSweepConfig sweep{0.5, 10.0, 8};
  while (count < 20 && draws < 1000)
  {
    ++draws;
    std::size_t const w = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
    auto const        t = random_building(rng, w);
    curve::SweepLog   log;
    std::optional<curve::PriceDemandCurve> c;
    try
    {
      c = curve::generate_curve(t.model, t.bess, t.x0, t.soc0, t.cfg, sweep, "A1", &log);
    }
    catch (InfeasibleError const &)
    {
      continue;  // comfort band unreachable for this draw
    }
    auto const &pts = c->points();
    for (std::size_t i = 1; i < pts.size(); ++i)
    {
      if (!(pts[i].price_cents < pts[i - 1].price_cents) ||
          pts[i].quantity_kw < pts[i - 1].quantity_kw)
      {
        ++bad;
      }
    }
    worst_repair = std::max(worst_repair, log.repair_kw);
    ++count;
  }
  return {count == 20 && bad == 0 && worst_repair <= 1e-4,
          std::to_string(count) + " curves, " + std::to_string(bad) + " order breaks, max repair " +
              fmt(worst_repair) + " kW"};
}

// Bus and protocol --------------------------------------------------------------

market::ScenarioConfig random_market(std::mt19937_64 &rng, std::uint64_t seed)
{
  market::ScenarioConfig cfg;
  cfg.name     = "random-" + std::to_string(seed);
  cfg.rounds   = 2;
  cfg.seed     = seed;
  int const na = std::uniform_int_distribution<int>(2, 5)(rng);
  for (int a = 0; a < na; ++a)
  {
    auto c = random_auction(rng, true).demand;
    cfg.askers.push_back(market::AskerSpec{"A" + std::to_string(a + 1), c, std::nullopt});
  }
  for (int b = 0; b < 8 - na; ++b)
  {
    market::BidderSpec bid;
    bid.id          = "B" + std::to_string(b + 1);
    bid.capacity_kw = 0.0;
    for (auto const &a : cfg.askers)
    {
      if (std::bernoulli_distribution(0.6)(rng))
      {
        BidOffer o{bid.id, a.id, on_grid(rng, 1, 20), on_grid(rng, 1, 200)};
        bid.capacity_kw += o.quantity_kw;
        bid.offers.push_back(o);
      }
    }
    bid.capacity_kw = std::max(bid.capacity_kw, 0.05) + 0.5;
    cfg.bidders.push_back(bid);
  }
  cfg.acl = market::default_policy(cfg.askers, cfg.bidders);
  cfg.validate();
  return cfg;
}

std::string ndjson(std::vector<bus::LogEntry> const &log)
{
  std::ostringstream out;
  bus::write_ndjson(out, log);
  return out.str();
}

/// Audit records that contradict the policy.
int acl_violations(bus::AuthPolicy const &policy, std::vector<bus::AuditRecord> const &audit)
{
  int bad = 0;
  for (auto const &r : audit)
  {
    if (r.verdict != "allow")
    {
      continue;
    }
    if (r.action == "publish" && !policy.may_publish(r.agent, r.topic))
    {
      ++bad;
    }
    if (r.action == "subscribe" && !policy.may_subscribe(r.agent, r.topic))
    {
      ++bad;
    }
    if (r.action == "deliver")
    {
      auto const it = policy.subscribe.find(r.agent);
      bool const ok = it != policy.subscribe.end() &&
                      std::any_of(it->second.begin(), it->second.end(),
                                  [&](auto const &g) { return bus::topic_matches(g, r.topic); });
      bad += ok ? 0 : 1;
    }
  }
  return bad;
}

Verdict bus_soundness()
{
  std::mt19937_64 rng(8080);
  int             violations   = 0;
  int             not_audited  = 0;
  int             diverged     = 0;
  int             attempts     = 0;
  int             denied       = 0;
  int const       runs         = 10;
  for (int run = 0; run < runs; ++run)
  {
    auto const cfg = random_market(rng, 1000 + run);

    // Same seed twice must give byte-identical logs.
    auto const first  = market::run_scenario(cfg);
    auto const second = market::run_scenario(cfg);
    diverged += ndjson(first.messages) == ndjson(second.messages) ? 0 : 1;

    auto policy = cfg.acl;
    auto ids    = cfg.participant_ids();
    policy.add_control_rights(ids);
    violations += acl_violations(policy, first.audit);

    // Adversarial session on a fresh broker with the same policy.
    bus::Broker broker(policy);
    std::vector<bus::Mailbox> boxes(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
    {
      broker.attach(ids[i], boxes[i].sink());
    }
    ids.push_back("intruder");
    broker.attach("intruder", [](bus::MessageEnvelope const &) {});
    broker.open_stage(bus::Stage::kBidOffer, 0);
    int caught = 0;
    for (int k = 0; k < 200; ++k)
    {
      auto const &agent  = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
      auto const &victim = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
      auto const &other  = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
      ++attempts;
      try
      {
        switch (std::uniform_int_distribution<int>(0, 4)(rng))
        {
        case 0:
          broker.subscribe(agent, bus::data_topic(bus::Stage::kMarketClearing, "*", victim));
          break;
        case 1:
          broker.subscribe(agent, "market/*/*/*");
          break;
        case 2:
          broker.subscribe(agent, bus::data_topic(bus::Stage::kBidOffer, "*", victim));
          break;
        case 3:
          broker.publish(agent, bus::data_topic(bus::Stage::kBidOffer, victim, other),
                         auction::offer_to_message(BidOffer{victim, other, 0.1, 1.0}, 0));
          break;
        default:
          broker.publish(agent, bus::kStageTopic, bus::Json{{"stage", "done"}, {"round", 0}});
          break;
        }
      }
      catch (AuthError const &)
      {
        ++caught;
      }
      catch (Error const &)
      {
        // schema or protocol rejections are not ACL decisions
      }
    }
    denied += caught;
    auto const audit = broker.audit_log();
    violations += acl_violations(policy, audit);
    int const deny_records = static_cast<int>(std::count_if(
        audit.begin(), audit.end(), [](auto const &r) { return r.verdict == "deny"; }));
    not_audited += std::abs(deny_records - caught);
  }
  return {violations == 0 && not_audited == 0 && diverged == 0,
          std::to_string(runs) + " runs, " + std::to_string(attempts) + " adversarial attempts (" +
              std::to_string(denied) + " denied), " + std::to_string(violations) +
              " ACL violations, " + std::to_string(not_audited) + " unaudited denials, " +
              std::to_string(diverged) + " divergent reruns"};
}

Verdict protocol_conformance()
{
  int         unordered = 0;
  int         runs      = 0;
  std::string which;
  auto        check = [&](market::MarketReport const &rep) {
    ++runs;
    if (!market::stage_ordered(rep.messages))
    {
      ++unordered;
      which += " " + rep.scenario + "/" + rep.mode;
    }
  };
  for (char const *name : {"s1.json", "s2.json", "s3.json", "empty.json", "mpc_demo.json"})
  {
    auto const cfg = market::ScenarioConfig::from_file(scenario_path(name));
    check(market::run_scenario(cfg));
  }
  std::mt19937_64 rng(99);
  for (int i = 0; i < 5; ++i)
  {
    check(market::run_scenario(random_market(rng, 500 + i)));
  }

  auto const s1  = market::ScenarioConfig::from_file(scenario_path("s1.json"));
  auto const det = market::run_scenario(s1);
  auto const tcp = market::run_scenario(s1, {market::BusMode::kTcp, std::nullopt});
  check(tcp);
  bool same = tcp.complete && det.rounds.size() == tcp.rounds.size();
  for (std::size_t r = 0; same && r < det.rounds.size(); ++r)
  {
    auto const &x = det.rounds[r].auctions;
    auto const &y = tcp.rounds[r].auctions;
    same = x.size() == y.size();
    for (std::size_t a = 0; same && a < x.size(); ++a)
    {
      same = x[a].result == y[a].result;
    }
  }
  return {unordered == 0 && same,
          std::to_string(runs) + " runs, " + std::to_string(unordered) + " out of order" + which +
              ", tcp vs deterministic on scenario 1: " + (same ? "identical" : "different")};
}

}  // namespace

int main()
{
  criterion("scenario-1 reproduction", 5.0, scenario_1);
  criterion("scenario-2 reproduction", 5.0, scenario_2);
  criterion("scenario-3 reproduction", 5.0, scenario_3);
  criterion("spsba oracle equivalence", 10.0, spsba_oracle);
  criterion("vickrey price invariance", 0.0, vickrey);
  criterion("mpo grid oracle", 60.0, mpo_oracle);
  criterion("covariance properties", 0.0, covariance);
  criterion("mpc grid oracle", 120.0, mpc_oracle);
  criterion("demand-curve monotonicity", 0.0, curve_monotonicity);
  criterion("bus soundness", 0.0, bus_soundness);
  criterion("protocol conformance", 0.0, protocol_conformance);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
