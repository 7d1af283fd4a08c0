#include <doctest.h>

#include <thread>

#include "grip/net.hpp"
#include "grip/simulator.hpp"
#include "grip/wire_protocol.hpp"

using namespace grip;

TEST_CASE("frames survive a loopback tcp hop") {
  sim::SimConfig config;
  config.seed = 12;
  config.duration_s = 1.0;
  config.active_sensors = {5, 7};
  const auto session = sim::generate_session(config);

  net::TcpListener listener(0, "127.0.0.1");
  const std::uint16_t port = listener.port();
  REQUIRE(port != 0);

  std::thread sender([&] {
    net::TcpClientSink sink("127.0.0.1", port);
    sim::emit_stream(session, sink);
  });
  const auto bytes = listener.accept_and_read_all();
  sender.join();

  const auto decoded = wire::decode_stream(bytes);
  CHECK(decoded.readings == session.readings);
  CHECK(decoded.skipped_byte_spans.empty());
  CHECK(decoded.pending_bytes == 0);
}

TEST_CASE("connecting to a closed port raises SinkError") {
  // Bind then immediately drop a listener to find a port that is closed.
  std::uint16_t port = 0;
  {
    net::TcpListener probe(0, "127.0.0.1");
    port = probe.port();
  }
  CHECK_THROWS_AS(net::TcpClientSink("127.0.0.1", port), SinkError);
}

TEST_CASE("endpoint parsing") {
  const auto [host, port] = net::parse_endpoint("example.org:8080");
  CHECK(host == "example.org");
  CHECK(port == 8080);
  CHECK_THROWS_AS(net::parse_endpoint("no-port"), Error);
  CHECK_THROWS_AS(net::parse_endpoint(":123"), Error);
  CHECK_THROWS_AS(net::parse_endpoint("host:"), Error);
  CHECK_THROWS_AS(net::parse_endpoint("host:notaport"), Error);
}
