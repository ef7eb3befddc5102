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


#include "temarket/bus.hpp"
#include "temarket/report.hpp"
#include "temarket/scenario.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace temarket::market {

/// An agent's only view of the world: its bus connection.
class AgentPort
{
public:
  virtual ~AgentPort() = default;

  virtual std::string const &id() const                                            = 0;
  virtual std::uint64_t      publish(std::string const &topic, bus::Json const &payload) = 0;
  virtual void               subscribe(std::string const &pattern)                  = 0;

  /// Data-stage messages delivered since the last call, in delivery order.
  virtual std::vector<bus::MessageEnvelope> drain() = 0;
};

class MarketAgent
{
public:
  explicit MarketAgent(std::string id)
    : id_(std::move(id))
  {}
  virtual ~MarketAgent() = default;

  std::string const &id() const noexcept { return id_; }

  virtual void setup(AgentPort &port) = 0;
  virtual void on_stage(bus::Stage stage, std::uint64_t round, AgentPort &port) = 0;
  virtual void finish(AgentPort &port) = 0;

  std::vector<std::string> const &events() const noexcept { return events_; }

protected:
  void note(std::string event) { events_.push_back(id_ + ": " + std::move(event)); }

private:
  std::string              id_;
  std::vector<std::string> events_;
};

class AskerAgent : public MarketAgent
{
public:
  AskerAgent(AskerSpec spec, auction::ClearingConvention convention);

  void setup(AgentPort &port) override;
  void on_stage(bus::Stage stage, std::uint64_t round, AgentPort &port) override;
  void finish(AgentPort &port) override;

  /// One record per round, in round order.
  std::vector<std::pair<std::uint64_t, AuctionRecord>> const &records() const noexcept
  {
    return records_;
  }

private:
  std::optional<curve::PriceDemandCurve> make_curve(std::uint64_t round);
  void                                   clear(std::uint64_t round, AgentPort &port);

  AskerSpec                                            spec_;
  auction::ClearingConvention                          convention_;
  std::optional<curve::PriceDemandCurve>               curve_;
  std::vector<std::pair<std::uint64_t, AuctionRecord>> records_;
  std::optional<mpc::ThermalState>                     x_;
  std::optional<mpc::BessState>                        soc_;
};

class BidderAgent : public MarketAgent
{
public:
  explicit BidderAgent(BidderSpec spec);

  void setup(AgentPort &port) override;
  void on_stage(bus::Stage stage, std::uint64_t round, AgentPort &port) override;
  void finish(AgentPort &port) override;

  std::vector<auction::ClearingNotice> const &notices() const noexcept { return notices_; }
  std::vector<BidOffer> const                &published() const noexcept { return published_; }

private:
  void absorb(std::vector<bus::MessageEnvelope> const &messages, std::uint64_t round);

  BidderSpec                           spec_;
  std::vector<curve::PriceDemandCurve> curves_;
  std::vector<auction::ClearingNotice> notices_;
  std::vector<BidOffer>                published_;
};

enum class BusMode
{
  kDeterministic,
  kTcp,
};

struct RunOptions
{
  BusMode                      mode = BusMode::kDeterministic;
  std::optional<std::uint64_t> seed;  ///< overrides the scenario seed
};

/// Runs every round of the three-stage protocol and collects the report.
/// A stage timeout ends the run early with `complete = false`.
MarketReport run_scenario(ScenarioConfig const &config, RunOptions const &options = {});

/// Checks the per-round stage order of a message log:
/// demand-bid+ bid-offer* market-clearing*. Control messages are ignored.
bool stage_ordered(std::vector<bus::LogEntry> const &log);

}  // namespace temarket::market
