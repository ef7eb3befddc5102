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

#include "temarket/messages.hpp"

#include "temarket/auction.hpp"
#include "temarket/demand_curve.hpp"
#include "temarket/errors.hpp"

namespace temarket::bus {

char const *to_string(Stage stage) noexcept
{
  switch (stage)
  {
  case Stage::kDemandBid:
    return "demand-bid";
  case Stage::kBidOffer:
    return "bid-offer";
  case Stage::kMarketClearing:
    return "market-clearing";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string const &name) noexcept
{
  for (Stage s : kStages)
  {
    if (name == to_string(s))
    {
      return s;
    }
  }
  return std::nullopt;
}

std::vector<std::string> split_topic(std::string const &path)
{
  std::vector<std::string> out;
  std::size_t              begin = 0;
  while (true)
  {
    auto const slash = path.find('/', begin);
    out.push_back(path.substr(begin, slash - begin));
    if (slash == std::string::npos)
    {
      break;
    }
    begin = slash + 1;
  }
  return out;
}

namespace {

bool segments_ok(std::vector<std::string> const &segs, bool allow_wildcard)
{
  if (segs.size() < 3 || segs[0] != "market")
  {
    return false;
  }
  for (auto const &s : segs)
  {
    if (s.empty())
    {
      return false;
    }
    if (s.find('*') != std::string::npos && (!allow_wildcard || s != "*"))
    {
      return false;
    }
  }
  if (segs[1] == "control" || segs[1] == "*")
  {
    return true;
  }
  return segs.size() == 4 && parse_stage(segs[1]).has_value();
}

}  // namespace

Topic Topic::parse(std::string const &path)
{
  Topic t;
  t.path     = path;
  t.segments = split_topic(path);
  if (!segments_ok(t.segments, false))
  {
    throw SchemaError("malformed topic '" + path + "'");
  }
  if (t.segments[1] != "control")
  {
    t.stage = parse_stage(t.segments[1]);
  }
  return t;
}

std::string data_topic(Stage stage, std::string const &sender, std::string const &receiver)
{
  return std::string("market/") + to_string(stage) + "/" + sender + "/" + receiver;
}

std::string ack_topic(std::string const &agent)
{
  return "market/control/ack/" + agent;
}

bool is_valid_pattern(std::string const &pattern)
{
  return segments_ok(split_topic(pattern), true);
}

bool topic_matches(std::string const &pattern, std::string const &topic)
{
  auto const p = split_topic(pattern);
  auto const t = split_topic(topic);
  if (p.size() != t.size())
  {
    return false;
  }
  for (std::size_t i = 0; i < p.size(); ++i)
  {
    if (p[i] != "*" && p[i] != t[i])
    {
      return false;
    }
  }
  return true;
}

bool pattern_covers(std::string const &granted, std::string const &pattern)
{
  auto const g = split_topic(granted);
  auto const p = split_topic(pattern);
  if (g.size() != p.size())
  {
    return false;
  }
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    if (g[i] != "*" && g[i] != p[i])
    {
      return false;
    }
  }
  return true;
}

Json MessageEnvelope::to_json() const
{
  Json j;
  j["topic"]   = topic;
  j["sender"]  = sender_id;
  j["seq"]     = sequence_number;
  j["payload"] = payload;
  return j;
}

MessageEnvelope MessageEnvelope::from_json(Json const &j)
{
  if (!j.is_object() || !j.contains("topic") || !j["topic"].is_string() || !j.contains("sender") ||
      !j["sender"].is_string() || !j.contains("seq") || !j["seq"].is_number_unsigned() ||
      !j.contains("payload"))
  {
    throw SchemaError("malformed message envelope");
  }
  return MessageEnvelope{j["topic"].get<std::string>(), j["sender"].get<std::string>(),
                         j["seq"].get<std::uint64_t>(), j["payload"]};
}

void validate_payload(Topic const &topic, std::string const &sender_id, Json const &payload)
{
  if (topic.is_control())
  {
    if (!payload.is_object())
    {
      throw SchemaError("control payload must be an object");
    }
    return;
  }
  if (topic.sender() != sender_id)
  {
    throw SchemaError("topic sender '" + topic.sender() + "' does not match publisher '" +
                      sender_id + "'");
  }
  std::string payload_sender;
  std::string payload_receiver = kBroadcast;
  switch (*topic.stage)
  {
  case Stage::kDemandBid:
    try
    {
      payload_sender = curve::curve_from_message(payload).asker_id();
    }
    catch (CurveError const &e)
    {
      throw SchemaError(std::string("demand-bid payload: ") + e.what());
    }
    break;
  case Stage::kBidOffer:
  {
    auto const offer = auction::offer_from_message(payload);
    payload_sender   = offer.bidder_id;
    payload_receiver = offer.asker_id;
    break;
  }
  case Stage::kMarketClearing:
  {
    auto const notice = auction::clearing_from_message(payload);
    payload_sender    = notice.asker_id;
    payload_receiver  = notice.bidder_id;
    break;
  }
  }
  if (payload_sender != sender_id)
  {
    throw SchemaError("payload sender '" + payload_sender + "' does not match publisher '" +
                      sender_id + "'");
  }
  if (payload_receiver != topic.receiver())
  {
    throw SchemaError("payload receiver '" + payload_receiver + "' does not match topic '" +
                      topic.path + "'");
  }
}

}  // namespace temarket::bus
