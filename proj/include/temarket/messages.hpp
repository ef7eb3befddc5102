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


#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace temarket::bus {

using Json = nlohmann::ordered_json;

enum class Stage
{
  kDemandBid,
  kBidOffer,
  kMarketClearing,
};

inline constexpr Stage kStages[] = {Stage::kDemandBid, Stage::kBidOffer, Stage::kMarketClearing};

char const          *to_string(Stage stage) noexcept;
std::optional<Stage> parse_stage(std::string const &name) noexcept;

inline constexpr char const *kBroadcast    = "broadcast";
inline constexpr char const *kStageTopic   = "market/control/stage";
inline constexpr char const *kCoordinatorId = "coordinator";

/// A concrete topic. Data topics are market/<stage>/<sender>/<receiver>;
/// control topics live under market/control/.
struct Topic
{
  std::string                path;
  std::vector<std::string>   segments;
  std::optional<Stage>       stage;  ///< unset for control topics

  bool               is_control() const noexcept { return !stage; }
  std::string const &sender() const { return segments.at(2); }
  std::string const &receiver() const { return segments.at(3); }

  /// Throws SchemaError unless `path` is a well-formed topic without wildcards.
  static Topic parse(std::string const &path);
};

std::string data_topic(Stage stage, std::string const &sender, std::string const &receiver);
std::string ack_topic(std::string const &agent);

std::vector<std::string> split_topic(std::string const &path);

/// Patterns use `*` for exactly one segment.
bool is_valid_pattern(std::string const &pattern);
bool topic_matches(std::string const &pattern, std::string const &topic);

/// True when every topic matched by `pattern` is also matched by `granted`.
bool pattern_covers(std::string const &granted, std::string const &pattern);

struct MessageEnvelope
{
  std::string   topic;
  std::string   sender_id;
  std::uint64_t sequence_number = 0;
  Json          payload;

  Json                   to_json() const;
  static MessageEnvelope from_json(Json const &j);

  bool operator==(MessageEnvelope const &) const = default;
};

/// Checks the payload against its stage schema and that topic, envelope
/// sender and payload agree. Throws SchemaError.
void validate_payload(Topic const &topic, std::string const &sender_id, Json const &payload);

}  // namespace temarket::bus
