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

#include "temarket/agents.hpp"

#include "temarket/tcp_bus.hpp"

#include <algorithm>
#include <atomic>
#include <latch>
#include <map>
#include <mutex>
#include <random>
#include <thread>

namespace temarket::market {
namespace {

using bus::Json;
using bus::Stage;

bool is_data(bus::MessageEnvelope const &e)
{
  return e.topic.rfind("market/control/", 0) != 0;
}

class InProcessPort : public AgentPort
{
public:
  InProcessPort(bus::Broker &broker, std::string id)
    : broker_(broker)
    , id_(std::move(id))
  {
    broker_.attach(id_, mailbox_.sink());
  }

  std::string const &id() const override { return id_; }

  std::uint64_t publish(std::string const &topic, Json const &payload) override
  {
    return broker_.publish(id_, topic, payload);
  }

  void subscribe(std::string const &pattern) override { broker_.subscribe(id_, pattern); }

  std::vector<bus::MessageEnvelope> drain() override
  {
    auto all = mailbox_.drain();
    all.erase(std::remove_if(all.begin(), all.end(), [](auto const &e) { return !is_data(e); }),
              all.end());
    return all;
  }

private:
  bus::Broker &broker_;
  std::string  id_;
  bus::Mailbox mailbox_;
};

class TcpPort : public AgentPort
{
public:
  explicit TcpPort(bus::TcpBusClient &client)
    : client_(client)
  {}

  std::string const &id() const override { return client_.agent_id(); }

  std::uint64_t publish(std::string const &topic, Json const &payload) override
  {
    return client_.publish(topic, payload);
  }

  void subscribe(std::string const &pattern) override { client_.subscribe(pattern); }

  std::vector<bus::MessageEnvelope> drain() override
  {
    std::vector<bus::MessageEnvelope> out;
    out.swap(pending_);
    return out;
  }

  void hold(bus::MessageEnvelope e) { pending_.push_back(std::move(e)); }

private:
  bus::TcpBusClient                &client_;
  std::vector<bus::MessageEnvelope> pending_;
};

Json ack_payload(Stage stage, std::uint64_t round)
{
  Json j;
  j["stage"] = bus::to_string(stage);
  j["round"] = round;
  return j;
}

/// Shared event sink for runtime-level faults.
class EventLog
{
public:
  void add(std::string e)
  {
    std::lock_guard<std::mutex> lock(mutex_);
    events_.push_back(std::move(e));
  }
  std::vector<std::string> take()
  {
    std::lock_guard<std::mutex> lock(mutex_);
    return events_;
  }

private:
  std::mutex               mutex_;
  std::vector<std::string> events_;
};

void run_stage(MarketAgent &agent, Stage stage, std::uint64_t round, AgentPort &port,
               EventLog &log)
{
  try
  {
    agent.on_stage(stage, round, port);
  }
  catch (TransportError const &)
  {
    throw;
  }
  catch (Error const &e)
  {
    log.add(agent.id() + ": fault in " + bus::to_string(stage) + ": " + e.what());
  }
}

}  // namespace

AskerAgent::AskerAgent(AskerSpec spec, auction::ClearingConvention convention)
  : MarketAgent(spec.id)
  , spec_(std::move(spec))
  , convention_(convention)
{
  if (spec_.mpc)
  {
    x_   = spec_.mpc->x0;
    soc_ = spec_.mpc->soc0;
  }
}

void AskerAgent::setup(AgentPort &port)
{
  port.subscribe(bus::data_topic(Stage::kBidOffer, "*", id()));
}

std::optional<curve::PriceDemandCurve> AskerAgent::make_curve(std::uint64_t round)
{
  auto const ts = static_cast<std::int64_t>(round);
  if (spec_.curve)
  {
    return curve::PriceDemandCurve(id(), ts, *spec_.curve);
  }
  auto const       &m = *spec_.mpc;
  mpc::ThermalState x = *x_;
  x.timestep          = ts;
  curve::SweepLog log;
  auto c = curve::generate_curve(m.model, m.bess, x, *soc_, m.cfg.shifted(round), m.sweep, id(),
                                 &log);
  if (log.repaired > 0)
  {
    note("isotonic repair of " + std::to_string(log.repaired) + " sweep points, largest " +
         format_number(log.repair_kw) + " kW");
  }
  return c;
}

void AskerAgent::on_stage(Stage stage, std::uint64_t round, AgentPort &port)
{
  switch (stage)
  {
  case Stage::kDemandBid:
    curve_.reset();
    try
    {
      curve_ = make_curve(round);
    }
    catch (Error const &e)
    {
      note("curve generation failed, not bidding this round: " + std::string(e.what()));
      return;
    }
    port.publish(bus::data_topic(Stage::kDemandBid, id(), bus::kBroadcast),
                 curve::curve_to_message(*curve_));
    break;
  case Stage::kBidOffer:
    break;
  case Stage::kMarketClearing:
    clear(round, port);
    break;
  }
}

void AskerAgent::clear(std::uint64_t round, AgentPort &port)
{
  std::vector<BidOffer> offers;
  for (auto const &e : port.drain())
  {
    std::int64_t ts    = 0;
    auto const   offer = auction::offer_from_message(e.payload, &ts);
    if (ts != static_cast<std::int64_t>(round) || offer.asker_id != id())
    {
      note("ignoring offer from " + offer.bidder_id + " for timestep " + std::to_string(ts));
      continue;
    }
    offers.push_back(offer);
  }

  AuctionRecord record;
  record.asker_id        = id();
  record.curve           = curve_;
  record.offers          = offers;
  record.result.asker_id = id();
  record.result.timestep = static_cast<std::int64_t>(round);
  if (!curve_)
  {
    records_.emplace_back(round, std::move(record));
    return;
  }
  if (offers.empty())
  {
    note("no offers in round " + std::to_string(round) + ", demand unserved");
  }
  record.result = auction::clear_spsba(offers, *curve_, convention_);
  for (auto const &t : record.result.transactions)
  {
    if (t.fallback_price)
    {
      note("reserve price used for " + t.bidder_id + " (no equilibrium without it)");
    }
    port.publish(bus::data_topic(Stage::kMarketClearing, id(), t.bidder_id),
                 auction::clearing_to_message(record.result, t));
  }
  records_.emplace_back(round, std::move(record));

  if (spec_.mpc)
  {
    auto const &m = *spec_.mpc;
    try
    {
      auto const step = mpc::mpc_step(m.model, m.bess, *x_, *soc_, m.cfg.shifted(round));
      x_              = step.next_x;
      soc_            = step.next_soc;
    }
    catch (Error const &e)
    {
      note("plant state not advanced: " + std::string(e.what()));
    }
  }
}

void AskerAgent::finish(AgentPort &port)
{
  port.drain();
}

BidderAgent::BidderAgent(BidderSpec spec)
  : MarketAgent(spec.id)
  , spec_(std::move(spec))
{}

void BidderAgent::setup(AgentPort &port)
{
  port.subscribe(bus::data_topic(Stage::kDemandBid, "*", "*"));
  port.subscribe(bus::data_topic(Stage::kMarketClearing, "*", id()));
}

void BidderAgent::absorb(std::vector<bus::MessageEnvelope> const &messages, std::uint64_t round)
{
  for (auto const &e : messages)
  {
    auto const topic = bus::Topic::parse(e.topic);
    if (topic.stage == Stage::kDemandBid)
    {
      auto c = curve::curve_from_message(e.payload);
      if (c.timestep() == static_cast<std::int64_t>(round))
      {
        std::erase_if(curves_, [&](auto const &old) { return old.asker_id() == c.asker_id(); });
        curves_.push_back(std::move(c));
      }
    }
    else if (topic.stage == Stage::kMarketClearing)
    {
      notices_.push_back(auction::clearing_from_message(e.payload));
    }
  }
}

void BidderAgent::on_stage(Stage stage, std::uint64_t round, AgentPort &port)
{
  if (stage != Stage::kBidOffer)
  {
    absorb(port.drain(), round);
    return;
  }
  absorb(port.drain(), round);
  std::erase_if(curves_, [&](auto const &c) { return c.timestep() != static_cast<std::int64_t>(round); });
  std::sort(curves_.begin(), curves_.end(),
            [](auto const &a, auto const &b) { return a.asker_id() < b.asker_id(); });

  std::vector<BidOffer> offers;
  if (spec_.portfolio)
  {
    try
    {
      offers = portfolio::plan_bids(curves_, *spec_.portfolio);
    }
    catch (InfeasibleRormError const &e)
    {
      note("abstains in round " + std::to_string(round) + ": " + e.what());
      return;
    }
  }
  else
  {
    for (auto const &o : spec_.offers)
    {
      bool const heard = std::any_of(curves_.begin(), curves_.end(),
                                     [&](auto const &c) { return c.asker_id() == o.asker_id; });
      if (heard)
      {
        offers.push_back(o);
      }
      else
      {
        note("no curve from " + o.asker_id + ", offer withheld");
      }
    }
  }
  for (auto const &o : offers)
  {
    port.publish(bus::data_topic(Stage::kBidOffer, id(), o.asker_id),
                 auction::offer_to_message(o, static_cast<std::int64_t>(round)));
    published_.push_back(o);
  }
}

void BidderAgent::finish(AgentPort &port)
{
  for (auto const &e : port.drain())
  {
    if (bus::Topic::parse(e.topic).stage == Stage::kMarketClearing)
    {
      notices_.push_back(auction::clearing_from_message(e.payload));
    }
  }
}

MarketReport run_scenario(ScenarioConfig const &config, RunOptions const &options)
{
  config.validate();
  std::uint64_t const seed = options.seed.value_or(config.seed);

  MarketReport report;
  report.scenario = config.name;
  report.mode     = options.mode == BusMode::kTcp ? "tcp" : "deterministic";
  report.seed     = seed;
  report.clearing = config.clearing;

  std::vector<std::unique_ptr<MarketAgent>> agents;
  std::vector<AskerAgent *>                 askers;
  for (auto const &a : config.askers)
  {
    auto agent = std::make_unique<AskerAgent>(a, config.clearing);
    askers.push_back(agent.get());
    agents.push_back(std::move(agent));
  }
  for (auto const &b : config.bidders)
  {
    agents.push_back(std::make_unique<BidderAgent>(b));
  }
  std::vector<std::string> ids;
  for (auto const &a : agents)
  {
    ids.push_back(a->id());
  }

  bus::AuthPolicy policy = config.acl;
  policy.add_control_rights(ids);
  bus::Broker broker(policy);
  EventLog    events;

  if (options.mode == BusMode::kDeterministic)
  {
    bus::Coordinator coordinator(broker, ids, std::chrono::milliseconds(0));
    std::vector<std::unique_ptr<InProcessPort>> ports;
    for (auto const &a : agents)
    {
      ports.push_back(std::make_unique<InProcessPort>(broker, a->id()));
      ports.back()->subscribe(bus::kStageTopic);
      a->setup(*ports.back());
    }
    std::mt19937_64          rng(seed);
    std::vector<std::size_t> order(agents.size());
    for (std::size_t i = 0; i < order.size(); ++i)
    {
      order[i] = i;
    }
    try
    {
      for (std::uint64_t r = 0; r < config.rounds; ++r)
      {
        for (Stage stage : bus::kStages)
        {
          coordinator.advance_stage(r, stage);
          std::shuffle(order.begin(), order.end(), rng);
          for (std::size_t i : order)
          {
            run_stage(*agents[i], stage, r, *ports[i], events);
            coordinator.acknowledge(agents[i]->id(), r, stage);
          }
          coordinator.await_current();
        }
      }
      coordinator.finish();
    }
    catch (StageTimeoutError const &e)
    {
      report.complete = false;
      report.error    = e.what();
    }
    for (std::size_t i = 0; i < agents.size(); ++i)
    {
      agents[i]->finish(*ports[i]);
    }
  }
  else
  {
    auto const timeout =
        std::chrono::milliseconds(static_cast<std::int64_t>(config.bus.stage_timeout_s * 1000.0));
    bus::TcpBusServer server(broker, config.bus.port);
    bus::Coordinator  coordinator(broker, ids, timeout);
    coordinator.listen_for_acks();

    std::latch               ready(static_cast<std::ptrdiff_t>(agents.size()));
    std::atomic<bool>        stop{false};
    std::vector<std::thread> threads;
    for (auto const &agent_ptr : agents)
    {
      MarketAgent *agent = agent_ptr.get();
      threads.emplace_back([&, agent] {
        bool counted = false;
        try
        {
          bus::TcpBusClient client("127.0.0.1", server.port(), agent->id());
          TcpPort           port(client);
          client.subscribe(bus::kStageTopic);
          agent->setup(port);
          ready.count_down();
          counted = true;
          while (!stop)
          {
            auto env = client.next(std::chrono::milliseconds(50));
            if (!env)
            {
              continue;
            }
            if (is_data(*env))
            {
              port.hold(std::move(*env));
              continue;
            }
            if (env->topic != bus::kStageTopic)
            {
              continue;
            }
            auto const name  = env->payload.value("stage", "");
            auto const round = env->payload.value("round", std::uint64_t{0});
            if (name == "done")
            {
              agent->finish(port);
              break;
            }
            auto const stage = bus::parse_stage(name);
            if (!stage)
            {
              continue;
            }
            run_stage(*agent, *stage, round, port, events);
            client.publish(bus::ack_topic(agent->id()), ack_payload(*stage, round));
          }
        }
        catch (std::exception const &e)
        {
          events.add(agent->id() + ": disconnected: " + e.what());
        }
        if (!counted)
        {
          ready.count_down();
        }
      });
    }
    ready.wait();
    try
    {
      for (std::uint64_t r = 0; r < config.rounds; ++r)
      {
        for (Stage stage : bus::kStages)
        {
          coordinator.advance_stage(r, stage);
          coordinator.await_current();
        }
      }
    }
    catch (StageTimeoutError const &e)
    {
      report.complete = false;
      report.error    = e.what();
    }
    coordinator.finish();
    // Agents leave on "done". After a timeout the flag releases the rest.
    if (!report.complete)
    {
      stop = true;
    }
    for (auto &t : threads)
    {
      t.join();
    }
    server.stop();
  }

  // Assemble rounds from the askers' records, askers in id order.
  std::vector<AskerAgent *> sorted = askers;
  std::sort(sorted.begin(), sorted.end(), [](auto *a, auto *b) { return a->id() < b->id(); });
  std::map<std::uint64_t, RoundRecord> rounds;
  for (std::uint64_t r = 0; r < config.rounds; ++r)
  {
    rounds[r].round = r;
  }
  for (auto *a : sorted)
  {
    for (auto const &[r, record] : a->records())
    {
      rounds[r].auctions.push_back(record);
    }
  }
  for (auto &[r, rec] : rounds)
  {
    if (report.complete || !rec.auctions.empty())
    {
      report.rounds.push_back(std::move(rec));
    }
  }

  std::vector<MarketAgent *> by_id;
  for (auto const &a : agents)
  {
    by_id.push_back(a.get());
  }
  std::sort(by_id.begin(), by_id.end(), [](auto *a, auto *b) { return a->id() < b->id(); });
  for (auto *a : by_id)
  {
    for (auto const &e : a->events())
    {
      report.events.push_back(e);
    }
  }
  for (auto const &e : events.take())
  {
    report.events.push_back(e);
  }
  report.messages = broker.message_log();
  report.audit    = broker.audit_log();
  return report;
}

bool stage_ordered(std::vector<bus::LogEntry> const &log)
{
  std::optional<std::uint64_t> round;
  int                          last = -1;
  for (auto const &entry : log)
  {
    auto const segs = bus::split_topic(entry.envelope.topic);
    if (segs.size() < 2 || segs[1] == "control")
    {
      continue;
    }
    auto const stage = bus::parse_stage(segs[1]);
    if (!stage)
    {
      return false;
    }
    if (!round || entry.round != *round)
    {
      if (round && entry.round < *round)
      {
        return false;
      }
      round = entry.round;
      last  = -1;
    }
    int const s = static_cast<int>(*stage);
    if (last == -1 && s != static_cast<int>(Stage::kDemandBid))
    {
      return false;
    }
    if (s < last)
    {
      return false;
    }
    last = s;
  }
  return true;
}

}  // namespace temarket::market
