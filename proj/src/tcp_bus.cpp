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

#include "temarket/tcp_bus.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

namespace temarket::bus {
namespace {

[[noreturn]] void raise(ErrorCode code, std::string const &message)
{
  switch (code)
  {
  case ErrorCode::kAuth:
    throw AuthError(message);
  case ErrorCode::kSchema:
    throw SchemaError(message);
  case ErrorCode::kProtocol:
    throw ProtocolError(message);
  case ErrorCode::kConfig:
    throw ConfigError("", message);
  default:
    throw TransportError(message);
  }
}

void send_all(int fd, char const *data, std::size_t size)
{
  while (size > 0)
  {
    ssize_t const n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0)
    {
      if (errno == EINTR)
      {
        continue;
      }
      throw TransportError(std::string("send failed: ") + std::strerror(errno));
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

/// False on orderly shutdown before any byte was read.
bool recv_all(int fd, char *data, std::size_t size)
{
  std::size_t got = 0;
  while (got < size)
  {
    ssize_t const n = ::recv(fd, data + got, size - got, 0);
    if (n == 0)
    {
      if (got == 0)
      {
        return false;
      }
      throw TransportError("connection closed mid-frame");
    }
    if (n < 0)
    {
      if (errno == EINTR)
      {
        continue;
      }
      if (got == 0 && (errno == ECONNRESET || errno == EBADF))
      {
        return false;
      }
      throw TransportError(std::string("recv failed: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

Json error_frame(Json const &ref, ErrorCode code, std::string const &message)
{
  Json f;
  f["op"]      = "error";
  f["msg_id"]  = ref;
  f["code"]    = static_cast<int>(code);
  f["message"] = message;
  return f;
}

}  // namespace

std::string encode_frame(Json const &frame)
{
  std::string const body = frame.dump();
  if (body.size() > kMaxFrameBytes)
  {
    throw TransportError("frame exceeds " + std::to_string(kMaxFrameBytes) + " bytes");
  }
  auto const    n = static_cast<std::uint32_t>(body.size());
  std::string   out;
  out.reserve(4 + body.size());
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out += body;
  return out;
}

void write_frame(int fd, Json const &frame)
{
  std::string const bytes = encode_frame(frame);
  send_all(fd, bytes.data(), bytes.size());
}

std::optional<Json> read_frame(int fd)
{
  unsigned char header[4];
  if (!recv_all(fd, reinterpret_cast<char *>(header), 4))
  {
    return std::nullopt;
  }
  std::uint32_t const n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                          (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  if (n > kMaxFrameBytes)
  {
    throw TransportError("incoming frame of " + std::to_string(n) + " bytes is too large");
  }
  std::string body(n, '\0');
  if (n > 0 && !recv_all(fd, body.data(), n))
  {
    throw TransportError("connection closed mid-frame");
  }
  try
  {
    return Json::parse(body);
  }
  catch (nlohmann::json::exception const &e)
  {
    throw TransportError(std::string("frame is not JSON: ") + e.what());
  }
}

struct TcpBusServer::Connection
{
  int         fd = -1;
  std::mutex  write_mutex;
  std::string agent;

  void send(Json const &frame)
  {
    std::lock_guard<std::mutex> lock(write_mutex);
    write_frame(fd, frame);
  }
};

TcpBusServer::TcpBusServer(Broker &broker, std::uint16_t port)
  : broker_(broker)
{
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0)
  {
    throw TransportError(std::string("socket: ") + std::strerror(errno));
  }
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family      = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port        = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) < 0 ||
      ::listen(listen_fd_, 64) < 0)
  {
    std::string const why = std::strerror(errno);
    ::close(listen_fd_);
    throw TransportError("cannot listen on port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr *>(&addr), &len);
  port_    = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpBusServer::~TcpBusServer()
{
  stop();
}

void TcpBusServer::stop()
{
  if (!running_.exchange(false))
  {
    return;
  }
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable())
  {
    acceptor_.join();
  }
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto const &c : connections_)
    {
      ::shutdown(c->fd, SHUT_RDWR);
    }
    workers.swap(workers_);
  }
  for (auto &w : workers)
  {
    w.join();
  }
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto const &c : connections_)
  {
    ::close(c->fd);
  }
  connections_.clear();
}

void TcpBusServer::accept_loop()
{
  while (running_)
  {
    int const fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0)
    {
      if (errno == EINTR)
      {
        continue;
      }
      return;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    auto conn = std::make_shared<Connection>();
    conn->fd  = fd;
    std::lock_guard<std::mutex> lock(mutex_);
    if (!running_)
    {
      ::close(fd);
      return;
    }
    connections_.push_back(conn);
    workers_.emplace_back([this, conn] { serve(conn); });
  }
}

void TcpBusServer::serve(std::shared_ptr<Connection> conn)
{
  try
  {
    auto hello = read_frame(conn->fd);
    if (!hello || !hello->is_object() || hello->value("op", "") != "hello" ||
        !(*hello)["agent"].is_string())
    {
      conn->send(error_frame(nullptr, ErrorCode::kProtocol, "expected hello frame"));
      return;
    }
    conn->agent = (*hello)["agent"].get<std::string>();
    std::weak_ptr<Connection> weak = conn;
    broker_.attach(conn->agent, [weak](MessageEnvelope const &e) {
      if (auto c = weak.lock())
      {
        Json f;
        f["op"]       = "deliver";
        f["envelope"] = e.to_json();
        try
        {
          c->send(f);
        }
        catch (TransportError const &)
        {
          // The peer is gone; its reader will notice and detach.
        }
      }
    });
    Json welcome;
    welcome["op"] = "welcome";
    conn->send(welcome);

    while (auto frame = read_frame(conn->fd))
    {
      Json const  id = frame->contains("msg_id") ? (*frame)["msg_id"] : Json();
      std::string op = frame->value("op", "");
      try
      {
        Json reply;
        reply["op"]     = "ack";
        reply["msg_id"] = id;
        if (op == "publish")
        {
          if (!id.is_string() || !(*frame)["topic"].is_string() || !frame->contains("payload"))
          {
            throw SchemaError("publish frame needs msg_id, topic and payload");
          }
          reply["seq"] = broker_.publish(conn->agent, (*frame)["topic"].get<std::string>(),
                                         (*frame)["payload"], id.get<std::string>());
        }
        else if (op == "subscribe")
        {
          if (!(*frame)["pattern"].is_string())
          {
            throw SchemaError("subscribe frame needs a pattern");
          }
          broker_.subscribe(conn->agent, (*frame)["pattern"].get<std::string>());
        }
        else
        {
          throw ProtocolError("unknown op '" + op + "'");
        }
        conn->send(reply);
      }
      catch (Error const &e)
      {
        conn->send(error_frame(id, e.code(), e.what()));
      }
    }
  }
  catch (std::exception const &)
  {
    // Connection-level failure: drop the peer.
  }
  if (!conn->agent.empty())
  {
    broker_.detach(conn->agent);
  }
}

TcpBusClient::TcpBusClient(std::string const &host, std::uint16_t port, std::string agent_id,
                           std::chrono::milliseconds reply_timeout)
  : agent_id_(std::move(agent_id))
  , reply_timeout_(reply_timeout)
{
  addrinfo hints{};
  hints.ai_family   = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo *res     = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
  {
    throw TransportError("cannot resolve " + host);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0 || ::connect(fd_, res->ai_addr, res->ai_addrlen) < 0)
  {
    std::string const why = std::strerror(errno);
    ::freeaddrinfo(res);
    if (fd_ >= 0)
    {
      ::close(fd_);
    }
    throw TransportError("cannot connect to " + host + ":" + std::to_string(port) + ": " + why);
  }
  ::freeaddrinfo(res);
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

  Json hello;
  hello["op"]    = "hello";
  hello["agent"] = agent_id_;
  write_frame(fd_, hello);
  auto welcome = read_frame(fd_);
  if (!welcome || welcome->value("op", "") != "welcome")
  {
    ::close(fd_);
    throw TransportError("broker refused hello from '" + agent_id_ + "'");
  }
  reader_ = std::thread([this] { read_loop(); });
}

TcpBusClient::~TcpBusClient()
{
  close();
}

void TcpBusClient::close()
{
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (closed_ && !reader_.joinable())
    {
      return;
    }
    closed_ = true;
  }
  ::shutdown(fd_, SHUT_RDWR);
  if (reader_.joinable())
  {
    reader_.join();
  }
  ::close(fd_);
  replied_.notify_all();
}

void TcpBusClient::read_loop()
{
  try
  {
    while (auto frame = read_frame(fd_))
    {
      std::string const op = frame->value("op", "");
      if (op == "deliver")
      {
        auto env = MessageEnvelope::from_json((*frame)["envelope"]);
        {
          std::lock_guard<std::mutex> lock(mutex_);
          if (!seen_.emplace(env.sender_id, env.topic, env.sequence_number).second)
          {
            continue;
          }
        }
        inbox_.push(std::move(env));
      }
      else if ((op == "ack" || op == "error") && (*frame)["msg_id"].is_string())
      {
        {
          std::lock_guard<std::mutex> lock(mutex_);
          auto id      = (*frame)["msg_id"].get<std::string>();
          replies_[id] = std::move(*frame);
        }
        replied_.notify_all();
      }
    }
  }
  catch (std::exception const &e)
  {
    std::lock_guard<std::mutex> lock(mutex_);
    failure_ = e.what();
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    closed_ = true;
  }
  replied_.notify_all();
}

Json TcpBusClient::request(Json frame)
{
  std::string id;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    id = agent_id_ + "-" + std::to_string(++next_id_);
  }
  frame["msg_id"] = id;
  for (int attempt = 0; attempt < 3; ++attempt)
  {
    {
      std::lock_guard<std::mutex> lock(write_mutex_);
      write_frame(fd_, frame);
    }
    std::unique_lock<std::mutex> lock(mutex_);
    replied_.wait_for(lock, reply_timeout_, [&] { return replies_.count(id) > 0 || closed_; });
    auto const it = replies_.find(id);
    if (it != replies_.end())
    {
      Json reply = std::move(it->second);
      replies_.erase(it);
      if (reply["op"] == "error")
      {
        lock.unlock();
        raise(static_cast<ErrorCode>(reply.value("code", 16)), reply.value("message", ""));
      }
      return reply;
    }
    if (closed_)
    {
      throw TransportError("connection to broker lost" + (failure_.empty() ? "" : ": " + failure_));
    }
  }
  throw TransportError("broker did not acknowledge " + id);
}

std::uint64_t TcpBusClient::publish(std::string const &topic, Json const &payload)
{
  Json f;
  f["op"]      = "publish";
  f["topic"]   = topic;
  f["payload"] = payload;
  return request(std::move(f))["seq"].get<std::uint64_t>();
}

void TcpBusClient::subscribe(std::string const &pattern)
{
  Json f;
  f["op"]      = "subscribe";
  f["pattern"] = pattern;
  request(std::move(f));
}

std::optional<MessageEnvelope> TcpBusClient::next(std::chrono::milliseconds timeout)
{
  return inbox_.pop(timeout);
}

}  // namespace temarket::bus
