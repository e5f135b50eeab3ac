#pragma once

// Stand-in for the cameras and the acquisition server. A produced shot lands in
// the shared incoming directory as
//
//   <incoming>/<shot_id>/<camera>/frame_000000.pgm ... frame_<n-1>.pgm
//   <incoming>/<shot_id>/<camera>/times.txt      one decimal seconds value per line
//
// after which the storage daemon is notified.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shotvod/profiles.hpp"
#include "shotvod/shot_protocol.hpp"
#include "shotvod/types.hpp"

namespace shotvod::acq {

struct AcqConfig {
  std::filesystem::path incoming_dir;
  std::optional<protocol::Endpoint> daemon;  // no notification when empty
  std::uint32_t width = kDefaultWidth;
  std::uint32_t height = kDefaultHeight;
  double fps = 25.0;
  double duration_s = 1.0;
  CameraId camera = CameraId::wk_ir;
  std::chrono::milliseconds notify_timeout{5000};
};

struct ShotManifest {
  ShotId shot_id = 0;
  CameraId camera = CameraId::wk_ir;
  std::uint64_t frame_count = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  double fps = 0.0;
  std::filesystem::path dir;
  std::filesystem::path times_file;
  std::uint64_t total_bytes = 0;  // frame files plus times.txt
  std::optional<protocol::AckMessage> ack;
};

/// Deterministic test pattern: pixel(x, y) = (x + y + 7*frame_index + shot_id) mod 256.
FrameImage generate_frame(ShotId shot_id, std::uint64_t frame_index, std::uint32_t width,
                          std::uint32_t height);

/// max(1, round(fps * duration_s)).
std::uint64_t frames_for(double fps, double duration_s);

/// Text form used in times.txt: exact round trip, at least six decimals.
std::string format_time_line(double seconds);

std::filesystem::path incoming_shot_dir(const std::filesystem::path& incoming, ShotId shot_id,
                                        CameraId camera);
std::string frame_file_name(std::uint64_t index);

/// Writes `frame_count` frames with t_i = i/cfg.fps and times.txt, without
/// notifying. When `total_frame_bytes` is set, frame files are zero-padded so
/// that together they hold exactly that many bytes.
/// Errors: IoFailure, UsageError (invalid config).
ShotManifest stage_shot(const AcqConfig& cfg, ShotId shot_id, std::uint64_t frame_count,
                        std::optional<std::uint64_t> total_frame_bytes = std::nullopt);

/// Writes max(1, round(fps*duration)) frames with t_i = i/fps, then notifies the
/// daemon if one is configured. On ConnectFailure the files stay on disk.
ShotManifest produce_shot(const AcqConfig& cfg, ShotId shot_id);

/// Reproduces one reference shot: exact frame count, fps = frames/length,
/// and frame files padded to the reference byte size. Frames shrink (keeping
/// 4:3) when the configured raster alone would exceed the per-frame budget.
/// Errors: UnknownProfile plus those of produce_shot.
ShotManifest replay_profile(const AcqConfig& cfg, ShotId profile_shot);
ShotManifest replay_profile(const AcqConfig& cfg, const ReferenceProfile& profile);

/// Raster dimensions replay_profile uses for a per-frame byte budget.
std::pair<std::uint32_t, std::uint32_t> replay_dimensions(std::uint32_t width, std::uint32_t height,
                                                          std::uint64_t frame_budget);

}  // namespace shotvod::acq
