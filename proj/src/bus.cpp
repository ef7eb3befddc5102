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

#include <algorithm>
#include <ostream>

namespace temarket::bus {

bool AuthPolicy::may_publish(std::string const &agent, std::string const &topic) const
{
  auto const it = publish.find(agent);
  if (it == publish.end())
  {
    return false;
  }
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](std::string const &p) { return topic_matches(p, topic); });
}

bool AuthPolicy::may_subscribe(std::string const &agent, std::string const &pattern) const
{
  auto const it = subscribe.find(agent);
  if (it == subscribe.end())
  {
    return false;
  }
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](std::string const &g) { return pattern_covers(g, pattern); });
}

void AuthPolicy::add_control_rights(std::vector<std::string> const &participants)
{
  auto grant = [](std::vector<std::string> &list, std::string const &pattern) {
    if (std::find(list.begin(), list.end(), pattern) == list.end())
    {
      list.push_back(pattern);
    }
  };
  for (auto const &agent : participants)
  {
    grant(publish[agent], ack_topic(agent));
    grant(subscribe[agent], kStageTopic);
  }
  grant(publish[kCoordinatorId], kStageTopic);
  grant(subscribe[kCoordinatorId], ack_topic("*"));
}

Json AuthPolicy::to_json() const
{
  Json j;
  j["publish"]   = Json::object();
  j["subscribe"] = Json::object();
  for (auto const &[agent, patterns] : publish)
  {
    j["publish"][agent] = patterns;
  }
  for (auto const &[agent, patterns] : subscribe)
  {
    j["subscribe"][agent] = patterns;
  }
  return j;
}

AuthPolicy AuthPolicy::from_json(Json const &j)
{
  AuthPolicy policy;
  auto read = [&](char const *key, std::map<std::string, std::vector<std::string>> &into) {
    if (!j.contains(key))
    {
      return;
    }
    if (!j[key].is_object())
    {
      throw ConfigError(std::string("acl.") + key, "must map agent ids to pattern lists");
    }
    for (auto const &[agent, patterns] : j[key].items())
    {
      std::string const field = std::string("acl.") + key + "." + agent;
      if (!patterns.is_array())
      {
        throw ConfigError(field, "must be a list of topic patterns");
      }
      for (auto const &p : patterns)
      {
        if (!p.is_string() || !is_valid_pattern(p.get<std::string>()))
        {
          throw ConfigError(field, "invalid topic pattern " + p.dump());
        }
        into[agent].push_back(p.get<std::string>());
      }
    }
  };
  if (!j.is_object())
  {
    throw ConfigError("acl", "must be an object or \"auto\"");
  }
  read("publish", policy.publish);
  read("subscribe", policy.subscribe);
  return policy;
}

Json AuditRecord::to_json() const
{
  Json j;
  j["ts"]      = ts;
  j["agent"]   = agent;
  j["action"]  = action;
  j["topic"]   = topic;
  j["verdict"] = verdict;
  return j;
}

Json LogEntry::to_json() const
{
  Json j;
  j["round"]      = round;
  Json const body = envelope.to_json();
  for (auto const &[k, v] : body.items())
  {
    j[k] = v;
  }
  return j;
}

void Mailbox::push(MessageEnvelope envelope)
{
  {
    std::lock_guard<std::mutex> lock(mutex_);
    queue_.push_back(std::move(envelope));
  }
  ready_.notify_all();
}

std::vector<MessageEnvelope> Mailbox::drain()
{
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<MessageEnvelope> out(std::make_move_iterator(queue_.begin()),
                                   std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

std::optional<MessageEnvelope> Mailbox::pop(std::chrono::milliseconds timeout)
{
  std::unique_lock<std::mutex> lock(mutex_);
  if (!ready_.wait_for(lock, timeout, [&] { return !queue_.empty(); }))
  {
    return std::nullopt;
  }
  MessageEnvelope front = std::move(queue_.front());
  queue_.pop_front();
  return front;
}

DeliverFn Mailbox::sink()
{
  return [this](MessageEnvelope const &e) { push(e); };
}

Broker::Broker(AuthPolicy policy)
  : policy_(std::move(policy))
{}

void Broker::attach(std::string const &agent, DeliverFn sink)
{
  std::lock_guard<std::mutex> lock(mutex_);
  sinks_[agent] = std::move(sink);
}

void Broker::detach(std::string const &agent)
{
  std::lock_guard<std::mutex> lock(mutex_);
  sinks_.erase(agent);
  subscriptions_.erase(agent);
}

void Broker::audit(std::string const &agent, std::string const &action, std::string const &topic,
                   std::string const &verdict)
{
  audit_.push_back(AuditRecord{++clock_, agent, action, topic, verdict});
}

void Broker::subscribe(std::string const &agent, std::string const &pattern)
{
  std::lock_guard<std::mutex> lock(mutex_);
  if (!is_valid_pattern(pattern))
  {
    audit(agent, "subscribe", pattern, "schema");
    throw SchemaError("malformed subscription pattern '" + pattern + "'");
  }
  if (!policy_.may_subscribe(agent, pattern))
  {
    audit(agent, "subscribe", pattern, "deny");
    throw AuthError("agent '" + agent + "' may not subscribe to '" + pattern + "'");
  }
  auto &subs = subscriptions_[agent];
  if (std::find(subs.begin(), subs.end(), pattern) == subs.end())
  {
    subs.push_back(pattern);
  }
  audit(agent, "subscribe", pattern, "allow");
}

std::uint64_t Broker::publish(std::string const &agent, std::string const &topic_path,
                              Json const &payload, std::optional<std::string> const &msg_id)
{
  std::lock_guard<std::mutex> lock(mutex_);
  Topic                       topic;
  try
  {
    topic = Topic::parse(topic_path);
  }
  catch (SchemaError const &)
  {
    audit(agent, "publish", topic_path, "schema");
    throw;
  }
  if (!policy_.may_publish(agent, topic_path))
  {
    audit(agent, "publish", topic_path, "deny");
    throw AuthError("agent '" + agent + "' may not publish to '" + topic_path + "'");
  }
  if (msg_id)
  {
    auto const seen = idempotency_.find({agent, *msg_id});
    if (seen != idempotency_.end())
    {
      audit(agent, "publish", topic_path, "duplicate");
      return seen->second;
    }
  }
  try
  {
    validate_payload(topic, agent, payload);
  }
  catch (SchemaError const &)
  {
    audit(agent, "publish", topic_path, "schema");
    throw;
  }
  if (topic.stage && topic.stage != stage_)
  {
    audit(agent, "publish", topic_path, "late");
    throw ProtocolError(std::string("stage '") + to_string(*topic.stage) +
                        "' is not open; message from '" + agent + "' dropped");
  }

  std::uint64_t const seq = ++sequence_[{agent, topic_path}];
  if (msg_id)
  {
    idempotency_[{agent, *msg_id}] = seq;
  }
  MessageEnvelope envelope{topic_path, agent, seq, payload};
  log_.push_back(LogEntry{round_, envelope});
  audit(agent, "publish", topic_path, "allow");

  for (auto const &[receiver, patterns] : subscriptions_)
  {
    bool const matched = std::any_of(patterns.begin(), patterns.end(), [&](std::string const &p) {
      return topic_matches(p, topic_path);
    });
    auto const sink = sinks_.find(receiver);
    if (!matched || sink == sinks_.end())
    {
      continue;
    }
    delivered_[receiver].push_back(envelope);
    audit(receiver, "deliver", topic_path, "allow");
    sink->second(envelope);
  }
  return seq;
}

void Broker::open_stage(std::optional<Stage> stage, std::uint64_t round)
{
  std::lock_guard<std::mutex> lock(mutex_);
  stage_ = stage;
  round_ = round;
}

std::optional<Stage> Broker::open_stage() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return stage_;
}

std::vector<LogEntry> Broker::message_log() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return log_;
}

std::vector<AuditRecord> Broker::audit_log() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return audit_;
}

std::vector<MessageEnvelope> Broker::delivered_to(std::string const &agent) const
{
  std::lock_guard<std::mutex> lock(mutex_);
  auto const it = delivered_.find(agent);
  return it == delivered_.end() ? std::vector<MessageEnvelope>{} : it->second;
}

void write_ndjson(std::ostream &out, std::vector<LogEntry> const &log)
{
  for (auto const &e : log)
  {
    out << e.to_json().dump() << '\n';
  }
}

void write_ndjson(std::ostream &out, std::vector<AuditRecord> const &audit)
{
  for (auto const &r : audit)
  {
    out << r.to_json().dump() << '\n';
  }
}

Coordinator::Coordinator(Broker &broker, std::vector<std::string> participants,
                         std::optional<std::chrono::milliseconds> timeout)
  : broker_(broker)
  , participants_(std::move(participants))
  , timeout_(timeout)
{
  std::sort(participants_.begin(), participants_.end());
}

void Coordinator::acknowledge(std::string const &agent, std::uint64_t round, Stage stage)
{
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!current_ || current_->round != round || current_->stage != stage ||
        !std::binary_search(participants_.begin(), participants_.end(), agent))
    {
      return;
    }
    acks_.insert(agent);
  }
  acked_.notify_all();
}

void Coordinator::on_control(MessageEnvelope const &envelope)
{
  auto const &p = envelope.payload;
  if (!p.contains("stage") || !p["stage"].is_string() || !p.contains("round") ||
      !p["round"].is_number_integer() || p["round"].get<std::int64_t>() < 0)
  {
    return;
  }
  auto const stage = parse_stage(p["stage"].get<std::string>());
  if (stage)
  {
    acknowledge(envelope.sender_id, p["round"].get<std::uint64_t>(), *stage);
  }
}

void Coordinator::listen_for_acks()
{
  broker_.attach(kCoordinatorId, [this](MessageEnvelope const &e) { on_control(e); });
  broker_.subscribe(kCoordinatorId, ack_topic("*"));
}

BarrierReceipt Coordinator::advance_stage(std::uint64_t round, Stage stage)
{
  BarrierReceipt receipt{round, stage};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    current_ = receipt;
    acks_.clear();
  }
  broker_.open_stage(stage, round);
  Json msg;
  msg["stage"] = to_string(stage);
  msg["round"] = round;
  broker_.publish(kCoordinatorId, kStageTopic, msg);
  return receipt;
}

std::vector<std::string> Coordinator::laggards() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<std::string> out;
  for (auto const &p : participants_)
  {
    if (!acks_.count(p))
    {
      out.push_back(p);
    }
  }
  return out;
}

void Coordinator::await_current()
{
  std::unique_lock<std::mutex> lock(mutex_);
  if (!current_)
  {
    return;
  }
  auto done = [&] { return acks_.size() == participants_.size(); };
  bool ok   = true;
  if (!timeout_)
  {
    acked_.wait(lock, done);
  }
  else
  {
    ok = acked_.wait_for(lock, *timeout_, done);
  }
  if (!ok)
  {
    std::vector<std::string> missing;
    for (auto const &p : participants_)
    {
      if (!acks_.count(p))
      {
        missing.push_back(p);
      }
    }
    throw StageTimeoutError(to_string(current_->stage), missing);
  }
}

void Coordinator::finish()
{
  std::uint64_t round = 0;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    round = current_ ? current_->round : 0;
    current_.reset();
  }
  broker_.open_stage(std::nullopt, round);
  Json msg;
  msg["stage"] = "done";
  msg["round"] = round;
  broker_.publish(kCoordinatorId, kStageTopic, msg);
}

}  // namespace temarket::bus
