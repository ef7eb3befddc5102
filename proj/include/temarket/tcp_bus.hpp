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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace temarket::bus {

/// Frames are a 4-byte big-endian length followed by that many bytes of
/// UTF-8 JSON.
inline constexpr std::uint32_t kMaxFrameBytes = 16u << 20;

std::string encode_frame(Json const &frame);

/// Writes one frame; throws TransportError.
void write_frame(int fd, Json const &frame);

/// Reads one frame; nullopt on orderly shutdown, TransportError otherwise.
std::optional<Json> read_frame(int fd);

/// Serves a Broker over loopback TCP. One thread per connection; each
/// connection speaks for the agent named in its hello frame.
class TcpBusServer
{
public:
  explicit TcpBusServer(Broker &broker, std::uint16_t port = 0);
  ~TcpBusServer();

  TcpBusServer(TcpBusServer const &)            = delete;
  TcpBusServer &operator=(TcpBusServer const &) = delete;

  std::uint16_t port() const noexcept { return port_; }
  void          stop();

private:
  struct Connection;

  void accept_loop();
  void serve(std::shared_ptr<Connection> conn);

  Broker                                  &broker_;
  int                                      listen_fd_ = -1;
  std::uint16_t                            port_      = 0;
  std::atomic<bool>                        running_{false};
  std::thread                              acceptor_;
  std::mutex                               mutex_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::vector<std::thread>                 workers_;
};

/// Agent-side connection. Publications are retried with a stable message id
/// until acknowledged; deliveries are de-duplicated by (sender, topic, seq).
class TcpBusClient
{
public:
  TcpBusClient(std::string const &host, std::uint16_t port, std::string agent_id,
               std::chrono::milliseconds reply_timeout = std::chrono::milliseconds(5000));
  ~TcpBusClient();

  TcpBusClient(TcpBusClient const &)            = delete;
  TcpBusClient &operator=(TcpBusClient const &) = delete;

  std::string const &agent_id() const noexcept { return agent_id_; }

  std::uint64_t publish(std::string const &topic, Json const &payload);
  void          subscribe(std::string const &pattern);

  /// Next delivered message, or nullopt after `timeout`.
  std::optional<MessageEnvelope> next(std::chrono::milliseconds timeout);

  void close();

private:
  Json request(Json frame);
  void read_loop();

  std::string                agent_id_;
  std::chrono::milliseconds  reply_timeout_;
  int                        fd_ = -1;
  std::thread                reader_;
  std::mutex                 write_mutex_;
  std::mutex                 mutex_;
  std::condition_variable    replied_;
  std::map<std::string, Json> replies_;
  std::set<std::tuple<std::string, std::string, std::uint64_t>> seen_;
  Mailbox                    inbox_;
  std::uint64_t              next_id_ = 0;
  bool                       closed_  = false;
  std::string                failure_;
};

}  // namespace temarket::bus
