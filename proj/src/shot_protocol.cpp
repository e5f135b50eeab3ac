#include "shotvod/shot_protocol.hpp"

#include <charconv>

#include "shotvod/error.hpp"
#include "shotvod/net.hpp"

namespace shotvod::protocol {

namespace {

// Canonical positive decimal: no sign, no leading zeros, fits in 64 bits.
std::optional<ShotId> parse_shot_id(std::string_view text) {
  if (text.empty() || text.front() == '0') return std::nullopt;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  ShotId value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

bool consume(std::string_view& text, std::string_view prefix) {
  if (!text.starts_with(prefix)) return false;
  text.remove_prefix(prefix.size());
  return true;
}

}  // namespace

std::string encode_shot_msg(const ShotMessage& msg) {
  return "SHOT " + std::to_string(msg.shot_id) + " CAM " + std::string(to_string(msg.camera)) + "\n";
}

ShotMessage decode_shot_msg(std::string_view line) {
  const std::string_view original = line;
  auto fail = [&](const char* why) -> Error {
    std::string shown(original.substr(0, 64));
    for (char& c : shown) {
      if (c < 0x20 || c > 0x7e) c = '?';
    }
    return Error(Errc::malformed_message, std::string(why) + ": \"" + shown + "\"");
  };

  if (line.empty() || line.back() != '\n') throw fail("missing newline");
  line.remove_suffix(1);
  if (!consume(line, "SHOT ")) throw fail("expected SHOT keyword");
  const auto space = line.find(' ');
  if (space == std::string_view::npos) throw fail("missing CAM field");
  const auto id = parse_shot_id(line.substr(0, space));
  if (!id) throw fail("shot id is not a positive integer");
  line.remove_prefix(space);
  if (!consume(line, " CAM ")) throw fail("expected CAM keyword");
  const auto camera = parse_camera(line);
  if (!camera) throw fail("unknown camera");
  return {*id, *camera};
}

std::string encode_ack(const AckMessage& ack) {
  return std::string(ack.accepted ? "ACK " : "NAK ") + std::to_string(ack.shot_id) + "\n";
}

AckMessage decode_ack(std::string_view line) {
  if (line.empty() || line.back() != '\n') throw Error(Errc::malformed_ack, "missing newline");
  line.remove_suffix(1);
  AckMessage ack;
  if (consume(line, "ACK ")) {
    ack.accepted = true;
  } else if (consume(line, "NAK ")) {
    ack.accepted = false;
  } else {
    throw Error(Errc::malformed_ack, "expected ACK or NAK");
  }
  const auto id = parse_shot_id(line);
  if (!id) throw Error(Errc::malformed_ack, "shot id is not a positive integer");
  ack.shot_id = *id;
  return ack;
}

Endpoint Endpoint::parse(std::string_view text, std::string_view default_host) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw Error(Errc::usage_error, "endpoint needs host:port");
  std::string_view host = text.substr(0, colon);
  const std::string_view port_text = text.substr(colon + 1);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535) {
    throw Error(Errc::usage_error, "bad port in endpoint \"" + std::string(text) + "\"");
  }
  return {host.empty() ? std::string(default_host) : std::string(host),
          static_cast<std::uint16_t>(port)};
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

AckMessage notify_shot(const Endpoint& endpoint, const ShotMessage& msg,
                       std::chrono::milliseconds timeout) {
  using Clock = std::chrono::steady_clock;
  const auto deadline = Clock::now() + timeout;
  auto left = [&] {
    return std::max(std::chrono::milliseconds(1),
                    std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()));
  };

  net::Socket sock = net::connect_tcp(endpoint.host, endpoint.port, timeout);
  try {
    net::send_all(sock, encode_shot_msg(msg), left());
  } catch (const Error& e) {
    if (e.code() == Errc::timeout) throw;
    throw Error(Errc::connect_failure, e.what());
  }
  std::optional<std::string> line;
  try {
    line = net::recv_line(sock, kMaxLineLength, left());
  } catch (const Error& e) {
    if (e.code() == Errc::timeout) throw;
    throw Error(Errc::malformed_ack, e.what());
  }
  if (!line) throw Error(Errc::malformed_ack, "daemon closed the connection without replying");
  const AckMessage ack = decode_ack(*line);
  if (ack.shot_id != msg.shot_id) {
    throw Error(Errc::malformed_ack, "ack for shot " + std::to_string(ack.shot_id) +
                                         ", expected " + std::to_string(msg.shot_id));
  }
  return ack;
}

}  // namespace shotvod::protocol
