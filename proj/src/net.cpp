#include "grip/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <charconv>
#include <cstring>

namespace grip::net {

namespace {

std::string errno_text() { return std::strerror(errno); }

}  // namespace

TcpClientSink::TcpClientSink(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  if (getaddrinfo(host.c_str(), service.c_str(), &hints, &result) != 0) {
    throw SinkError("cannot resolve " + host);
  }
  for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
    fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd_ < 0) continue;
    if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd_);
    fd_ = -1;
  }
  freeaddrinfo(result);
  if (fd_ < 0) {
    throw SinkError("cannot connect to " + host + ":" + service + ": " +
                    errno_text());
  }
}

TcpClientSink::~TcpClientSink() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpClientSink::write(std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, 0);
    if (n <= 0) throw SinkError("tcp send failed: " + errno_text());
    sent += static_cast<std::size_t>(n);
  }
}

TcpListener::TcpListener(std::uint16_t port, const std::string& bind_addr) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw IoError("cannot create socket: " + errno_text());
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, bind_addr.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    fd_ = -1;
    throw IoError("bad bind address " + bind_addr);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 1) != 0) {
    const std::string why = errno_text();
    ::close(fd_);
    fd_ = -1;
    throw IoError("cannot listen on " + bind_addr + ":" +
                  std::to_string(port) + ": " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len) == 0) {
    port_ = ntohs(bound.sin_port);
  } else {
    port_ = port;
  }
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::vector<std::uint8_t> TcpListener::accept_and_read_all() {
  const int conn = ::accept(fd_, nullptr, nullptr);
  if (conn < 0) throw IoError("accept failed: " + errno_text());
  std::vector<std::uint8_t> data;
  std::uint8_t buf[4096];
  while (true) {
    const ssize_t n = ::recv(conn, buf, sizeof(buf), 0);
    if (n < 0) {
      ::close(conn);
      throw IoError("recv failed: " + errno_text());
    }
    if (n == 0) break;
    data.insert(data.end(), buf, buf + n);
  }
  ::close(conn);
  return data;
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw Error("endpoint must be host:port, got '" + endpoint + "'");
  }
  const std::string host = endpoint.substr(0, colon);
  const std::string port_str = endpoint.substr(colon + 1);
  std::uint16_t port = 0;
  const auto [ptr, ec] = std::from_chars(
      port_str.data(), port_str.data() + port_str.size(), port);
  if (ec != std::errc{} || ptr != port_str.data() + port_str.size()) {
    throw Error("bad port '" + port_str + "'");
  }
  return {host, port};
}

}  // namespace grip::net
