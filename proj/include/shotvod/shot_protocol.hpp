#pragma once

// Line protocol between the acquisition side and the storage daemon. One
// notification per TCP connection:
//
//   client -> daemon   "SHOT <shot_id> CAM <camera_id>\n"
//   daemon -> client   "ACK <shot_id>\n" | "NAK <shot_id>\n"

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

#include "shotvod/types.hpp"

namespace shotvod::protocol {

inline constexpr std::uint16_t kDefaultDaemonPort = 9000;
inline constexpr std::size_t kMaxLineLength = 128;

struct ShotMessage {
  ShotId shot_id = 1;
  CameraId camera = CameraId::wk_ir;

  bool operator==(const ShotMessage&) const = default;
  ShotKey key() const noexcept { return {shot_id, camera}; }
};

struct AckMessage {
  ShotId shot_id = 1;
  bool accepted = false;

  bool operator==(const AckMessage&) const = default;
};

std::string encode_shot_msg(const ShotMessage& msg);

/// Accepts exactly the canonical encoding (so encode(decode(x)) == x for every
/// accepted x). Throws Errc::malformed_message.
ShotMessage decode_shot_msg(std::string_view line);

std::string encode_ack(const AckMessage& ack);

/// Throws Errc::malformed_ack.
AckMessage decode_ack(std::string_view line);

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultDaemonPort;

  /// "host:port" or ":port" (host defaults to `default_host`). Throws Errc::usage_error.
  static Endpoint parse(std::string_view text, std::string_view default_host = "127.0.0.1");
  std::string to_string() const;
};

/// Connects, sends one notification, waits for the ack line, disconnects.
/// Errors: ConnectFailure, Timeout, MalformedAck.
AckMessage notify_shot(const Endpoint& endpoint, const ShotMessage& msg,
                       std::chrono::milliseconds timeout = std::chrono::seconds(5));

}  // namespace shotvod::protocol
