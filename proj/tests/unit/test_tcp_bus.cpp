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

#include "temarket/demand_curve.hpp"
#include "temarket/tcp_bus.hpp"

#include <gtest/gtest.h>

#include <sys/socket.h>
#include <unistd.h>

using namespace temarket;
using namespace temarket::bus;
using namespace std::chrono_literals;

namespace {

AuthPolicy policy()
{
  AuthPolicy p;
  p.publish["A1"]   = {"market/demand-bid/A1/broadcast"};
  p.subscribe["B1"] = {"market/demand-bid/*/broadcast"};
  p.add_control_rights({"A1", "B1"});
  return p;
}

Json demand()
{
  return curve::curve_to_message(curve::PriceDemandCurve("A1", 0, {{8.0, 0.4}, {1.6, 2.0}}));
}

struct SocketPair
{
  int fd[2] = {-1, -1};
  SocketPair() { EXPECT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, fd), 0); }
  ~SocketPair()
  {
    ::close(fd[0]);
    ::close(fd[1]);
  }
};

}  // namespace

TEST(TcpBus, FrameHasBigEndianLengthPrefix)
{
  auto const bytes = encode_frame(Json{{"op", "x"}});
  ASSERT_GE(bytes.size(), 4u);
  std::uint32_t const n = (static_cast<unsigned char>(bytes[0]) << 24) |
                          (static_cast<unsigned char>(bytes[1]) << 16) |
                          (static_cast<unsigned char>(bytes[2]) << 8) |
                          static_cast<unsigned char>(bytes[3]);
  EXPECT_EQ(n, bytes.size() - 4);
  EXPECT_EQ(Json::parse(bytes.substr(4)), (Json{{"op", "x"}}));
}

TEST(TcpBus, FramesRoundTripOverSocket)
{
  SocketPair s;
  Json const frame{{"op", "publish"}, {"payload", demand()}};
  write_frame(s.fd[0], frame);
  write_frame(s.fd[0], Json{{"op", "second"}});
  EXPECT_EQ(read_frame(s.fd[1]), frame);
  EXPECT_EQ(read_frame(s.fd[1]), (Json{{"op", "second"}}));
  ::shutdown(s.fd[0], SHUT_WR);
  EXPECT_FALSE(read_frame(s.fd[1]).has_value());
}

TEST(TcpBus, TruncatedAndGarbageFramesFail)
{
  {
    SocketPair        s;
    std::string const partial = encode_frame(Json{{"op", "x"}}).substr(0, 6);
    ASSERT_EQ(::write(s.fd[0], partial.data(), partial.size()), 6);
    ::shutdown(s.fd[0], SHUT_WR);
    EXPECT_THROW(read_frame(s.fd[1]), TransportError);
  }
  {
    SocketPair        s;
    std::string const junk = std::string("\0\0\0\3abc", 7);
    ASSERT_EQ(::write(s.fd[0], junk.data(), junk.size()), 7);
    EXPECT_THROW(read_frame(s.fd[1]), TransportError);
  }
  {
    SocketPair        s;
    std::string const huge = std::string("\x7f\0\0\0", 4);
    ASSERT_EQ(::write(s.fd[0], huge.data(), huge.size()), 4);
    EXPECT_THROW(read_frame(s.fd[1]), TransportError);
  }
}

TEST(TcpBus, PublishAndDeliverOverLoopback)
{
  Broker       broker(policy());
  TcpBusServer server(broker);
  ASSERT_NE(server.port(), 0);
  broker.open_stage(Stage::kDemandBid, 0);

  TcpBusClient asker("127.0.0.1", server.port(), "A1");
  TcpBusClient bidder("127.0.0.1", server.port(), "B1");
  bidder.subscribe("market/demand-bid/*/broadcast");
  EXPECT_EQ(asker.publish("market/demand-bid/A1/broadcast", demand()), 1u);

  auto const got = bidder.next(2000ms);
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(got->sender_id, "A1");
  EXPECT_EQ(got->payload, demand());
  EXPECT_FALSE(bidder.next(50ms).has_value());
  asker.close();
  bidder.close();
  server.stop();
}

TEST(TcpBus, BrokerErrorsReachTheClient)
{
  Broker       broker(policy());
  TcpBusServer server(broker);
  broker.open_stage(Stage::kBidOffer, 0);
  TcpBusClient bidder("127.0.0.1", server.port(), "B1");
  EXPECT_THROW(bidder.subscribe("market/bid-offer/*/A1"), AuthError);
  EXPECT_THROW(bidder.publish("market/demand-bid/B1/broadcast", demand()), AuthError);
  TcpBusClient asker("127.0.0.1", server.port(), "A1");
  EXPECT_THROW(asker.publish("market/demand-bid/A1/broadcast", demand()), ProtocolError);
  EXPECT_THROW(asker.publish("not/a/topic", demand()), SchemaError);
  server.stop();
}

TEST(TcpBus, ConnectToClosedPortFails)
{
  std::uint16_t port = 0;
  {
    Broker       broker(policy());
    TcpBusServer server(broker);
    port = server.port();
    server.stop();
  }
  EXPECT_THROW(TcpBusClient("127.0.0.1", port, "A1", 500ms), TransportError);
}
