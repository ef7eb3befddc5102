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
#include "temarket/messages.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace temarket::bus {

/// Deny-by-default topic allow-lists.
struct AuthPolicy
{
  std::map<std::string, std::vector<std::string>> publish;
  std::map<std::string, std::vector<std::string>> subscribe;

  bool may_publish(std::string const &agent, std::string const &topic) const;
  bool may_subscribe(std::string const &agent, std::string const &pattern) const;

  /// Grants the control-plane rights every participant and the coordinator need.
  void add_control_rights(std::vector<std::string> const &participants);

  Json               to_json() const;
  static AuthPolicy  from_json(Json const &j);
};

struct AuditRecord
{
  std::uint64_t ts = 0;  ///< logical clock, one tick per record
  std::string   agent;
  std::string   action;   ///< publish | subscribe | deliver
  std::string   topic;
  std::string   verdict;  ///< allow | deny | schema | late | duplicate

  Json to_json() const;
};

/// One accepted publication, in broker order.
struct LogEntry
{
  std::uint64_t   round = 0;
  MessageEnvelope envelope;

  Json to_json() const;
};

using DeliverFn = std::function<void(MessageEnvelope const &)>;

/// Thread-safe queue of delivered messages for one agent.
class Mailbox
{
public:
  void push(MessageEnvelope envelope);

  std::vector<MessageEnvelope>   drain();
  std::optional<MessageEnvelope> pop(std::chrono::milliseconds timeout);

  DeliverFn sink();

private:
  std::mutex                  mutex_;
  std::condition_variable     ready_;
  std::deque<MessageEnvelope> queue_;
};

/// Topic broker with per-agent ACLs. Data topics are accepted only while
/// their stage is open; everything else is dropped and audited.
class Broker
{
public:
  explicit Broker(AuthPolicy policy);

  /// Attaches (or replaces) the delivery sink of an agent.
  void attach(std::string const &agent, DeliverFn sink);
  void detach(std::string const &agent);

  /// Throws AuthError when `pattern` is outside the agent's subscribe ACL.
  void subscribe(std::string const &agent, std::string const &pattern);

  /// Returns the sequence number. `msg_id`, when given, makes retries of the
  /// same publication idempotent.
  std::uint64_t publish(std::string const &agent, std::string const &topic, Json const &payload,
                        std::optional<std::string> const &msg_id = std::nullopt);

  void                 open_stage(std::optional<Stage> stage, std::uint64_t round);
  std::optional<Stage> open_stage() const;

  std::vector<LogEntry>    message_log() const;
  std::vector<AuditRecord> audit_log() const;

  /// Per-agent delivered envelopes, in delivery order.
  std::vector<MessageEnvelope> delivered_to(std::string const &agent) const;

  AuthPolicy const &policy() const noexcept { return policy_; }

private:
  void audit(std::string const &agent, std::string const &action, std::string const &topic,
             std::string const &verdict);

  AuthPolicy                                                policy_;
  mutable std::mutex                                        mutex_;
  std::map<std::string, DeliverFn>                          sinks_;
  std::map<std::string, std::vector<std::string>>           subscriptions_;
  std::map<std::pair<std::string, std::string>, std::uint64_t> sequence_;
  std::map<std::pair<std::string, std::string>, std::uint64_t> idempotency_;
  std::optional<Stage>                                      stage_;
  std::uint64_t                                             round_ = 0;
  std::uint64_t                                             clock_ = 0;
  std::vector<LogEntry>                                     log_;
  std::vector<AuditRecord>                                  audit_;
  std::map<std::string, std::vector<MessageEnvelope>>       delivered_;
};

void write_ndjson(std::ostream &out, std::vector<LogEntry> const &log);
void write_ndjson(std::ostream &out, std::vector<AuditRecord> const &audit);

struct BarrierReceipt
{
  std::uint64_t round = 0;
  Stage         stage = Stage::kDemandBid;
};

/// Owns the stage barrier. Participants acknowledge each finished stage;
/// `advance_stage` opens the next one only when every participant has
/// acknowledged the current stage.
class Coordinator
{
public:
  /// An unset timeout waits forever, a zero timeout checks once.
  Coordinator(Broker &broker, std::vector<std::string> participants,
              std::optional<std::chrono::milliseconds> timeout);

  void acknowledge(std::string const &agent, std::uint64_t round, Stage stage);

  /// Subscribes the coordinator to participant acks delivered over the bus.
  void listen_for_acks();

  /// Opens `stage` for `round` and broadcasts it on the control topic.
  BarrierReceipt advance_stage(std::uint64_t round, Stage stage);

  /// Waits for every participant to acknowledge the currently open stage.
  void await_current();

  /// Broadcasts the end of the run.
  void finish();

  std::vector<std::string> laggards() const;

private:
  void on_control(MessageEnvelope const &envelope);

  Broker                                  &broker_;
  std::vector<std::string>                 participants_;
  std::optional<std::chrono::milliseconds> timeout_;
  mutable std::mutex                       mutex_;
  std::condition_variable                  acked_;
  std::optional<BarrierReceipt>            current_;
  std::set<std::string>                    acks_;
};

}  // namespace temarket::bus
