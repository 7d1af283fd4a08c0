#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grip/sink.hpp"

namespace grip::net {

// Client-side TCP byte sink; connects on construction, closes on destruction.
class TcpClientSink final : public io::ByteSink {
 public:
  TcpClientSink(const std::string& host, std::uint16_t port);  // throws SinkError
  ~TcpClientSink() override;
  TcpClientSink(const TcpClientSink&) = delete;
  TcpClientSink& operator=(const TcpClientSink&) = delete;

  void write(std::span<const std::uint8_t> bytes) override;

 private:
  int fd_ = -1;
};

// Accepts a single connection and reads it to EOF. `port` 0 binds an
// ephemeral port, readable via port().
class TcpListener {
 public:
  explicit TcpListener(std::uint16_t port,
                       const std::string& bind_addr = "0.0.0.0");  // throws IoError
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::vector<std::uint8_t> accept_and_read_all();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Splits "host:port"; throws Error on a malformed endpoint.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

}  // namespace grip::net
