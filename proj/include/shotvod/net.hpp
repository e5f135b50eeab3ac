#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace shotvod::net {

/// Owning TCP socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  void close() noexcept;

 private:
  int fd_ = -1;
};

/// Throws Errc::connect_failure (refused/unresolvable) or Errc::timeout.
Socket connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout);

/// Throws Errc::bind_failure. Port 0 picks an ephemeral port.
Socket listen_tcp(const std::string& host, std::uint16_t port, int backlog = 64);

std::uint16_t local_port(const Socket& socket);

/// Waits up to `timeout` for a pending connection; returns an empty socket on timeout.
Socket accept_for(const Socket& listener, std::chrono::milliseconds timeout);

/// Throws Errc::io_failure or Errc::timeout.
void send_all(const Socket& socket, std::string_view data, std::chrono::milliseconds timeout);

/// Reads until '\n' (included in the result) or EOF. Returns nullopt when the
/// peer closes before sending anything; a partial line without '\n' is returned
/// as is. Throws Errc::timeout, or Errc::io_failure when `max_len` is exceeded.
std::optional<std::string> recv_line(const Socket& socket, std::size_t max_len,
                                     std::chrono::milliseconds timeout);

}  // namespace shotvod::net
