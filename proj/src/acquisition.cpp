#include "shotvod/acquisition.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "shotvod/error.hpp"
#include "shotvod/image_io.hpp"
#include "shotvod/profiles.hpp"

namespace fs = std::filesystem;

namespace shotvod::acq {

namespace {

std::uint64_t pgm_file_size(std::uint32_t w, std::uint32_t h) {
  const std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  return header.size() + std::uint64_t{w} * h;
}

void validate(const AcqConfig& cfg) {
  if (!(cfg.fps > 0.0) || !std::isfinite(cfg.fps)) throw Error(Errc::usage_error, "fps must be > 0");
  if (!(cfg.duration_s >= 0.0) || !std::isfinite(cfg.duration_s)) {
    throw Error(Errc::usage_error, "duration must be >= 0");
  }
  if (cfg.width == 0 || cfg.height == 0) throw Error(Errc::usage_error, "dimensions must be >= 1");
}

void notify(const AcqConfig& cfg, ShotManifest& manifest) {
  if (!cfg.daemon) return;
  manifest.ack = protocol::notify_shot(*cfg.daemon, {manifest.shot_id, manifest.camera},
                                       cfg.notify_timeout);
}

}  // namespace

FrameImage generate_frame(ShotId shot_id, std::uint64_t frame_index, std::uint32_t width,
                          std::uint32_t height) {
  std::vector<std::uint8_t> data(std::size_t{width} * height);
  const std::uint64_t base = 7 * frame_index + shot_id;
  for (std::uint32_t y = 0; y < height; ++y) {
    auto* row = data.data() + std::size_t{y} * width;
    for (std::uint32_t x = 0; x < width; ++x) {
      row[x] = static_cast<std::uint8_t>((base + x + y) & 0xFFu);
    }
  }
  return FrameImage(width, height, std::move(data));
}

std::uint64_t frames_for(double fps, double duration_s) {
  const double n = std::round(fps * duration_s);
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

std::string format_time_line(double seconds) {
  char buf[128];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, seconds, std::chars_format::fixed);
  std::string text = ec == std::errc{} ? std::string(buf, end) : std::to_string(seconds);
  auto dot = text.find('.');
  if (dot == std::string::npos) {
    text += '.';
    dot = text.size() - 1;
  }
  const std::size_t decimals = text.size() - dot - 1;
  if (decimals < 6) text.append(6 - decimals, '0');
  return text;
}

fs::path incoming_shot_dir(const fs::path& incoming, ShotId shot_id, CameraId camera) {
  return incoming / std::to_string(shot_id) / std::string(to_string(camera));
}

std::string frame_file_name(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06llu.pgm", static_cast<unsigned long long>(index));
  return buf;
}

ShotManifest stage_shot(const AcqConfig& cfg, ShotId shot_id, std::uint64_t frame_count,
                        std::optional<std::uint64_t> total_frame_bytes) {
  validate(cfg);
  if (shot_id == 0) throw Error(Errc::usage_error, "shot id must be positive");
  if (frame_count == 0) throw Error(Errc::usage_error, "frame count must be positive");

  ShotManifest manifest;
  manifest.shot_id = shot_id;
  manifest.camera = cfg.camera;
  manifest.frame_count = frame_count;
  manifest.width = cfg.width;
  manifest.height = cfg.height;
  manifest.fps = cfg.fps;
  manifest.dir = incoming_shot_dir(cfg.incoming_dir, shot_id, cfg.camera);
  manifest.times_file = manifest.dir / "times.txt";

  std::error_code ec;
  fs::remove_all(manifest.dir, ec);
  fs::create_directories(manifest.dir, ec);
  if (ec) throw Error(Errc::io_failure, "create " + manifest.dir.string() + ": " + ec.message());

  const std::uint64_t raw_size = pgm_file_size(cfg.width, cfg.height);
  std::uint64_t base_size = raw_size;
  std::uint64_t remainder = 0;
  if (total_frame_bytes) {
    base_size = *total_frame_bytes / frame_count;
    remainder = *total_frame_bytes % frame_count;
    if (base_size < raw_size) {
      throw Error(Errc::usage_error, "byte budget smaller than the raw frames");
    }
  }

  for (std::uint64_t i = 0; i < frame_count; ++i) {
    const std::uint64_t target = base_size + (i < remainder ? 1 : 0);
    manifest.total_bytes +=
        write_pgm_file(manifest.dir / frame_file_name(i),
                       generate_frame(shot_id, i, cfg.width, cfg.height), target - raw_size);
  }

  std::ofstream times(manifest.times_file, std::ios::trunc);
  if (!times) throw Error(Errc::io_failure, "create " + manifest.times_file.string());
  for (std::uint64_t i = 0; i < frame_count; ++i) {
    times << format_time_line(static_cast<double>(i) / cfg.fps) << '\n';
  }
  times.flush();
  if (!times) throw Error(Errc::io_failure, "write " + manifest.times_file.string());
  manifest.total_bytes += fs::file_size(manifest.times_file);
  return manifest;
}

ShotManifest produce_shot(const AcqConfig& cfg, ShotId shot_id) {
  validate(cfg);
  ShotManifest manifest = stage_shot(cfg, shot_id, frames_for(cfg.fps, cfg.duration_s));
  notify(cfg, manifest);
  return manifest;
}

std::pair<std::uint32_t, std::uint32_t> replay_dimensions(std::uint32_t width, std::uint32_t height,
                                                          std::uint64_t frame_budget) {
  if (pgm_file_size(width, height) <= frame_budget) return {width, height};
  std::uint32_t k = 1;
  while (pgm_file_size(4 * (k + 1), 3 * (k + 1)) <= frame_budget && 4 * (k + 1) <= width) ++k;
  return {4 * k, 3 * k};
}

ShotManifest replay_profile(const AcqConfig& cfg, ShotId profile_shot) {
  return replay_profile(cfg, find_profile(profile_shot));
}

ShotManifest replay_profile(const AcqConfig& cfg, const ReferenceProfile& profile) {
  if (profile.frames == 0 || !(profile.length_s > 0.0)) {
    throw Error(Errc::usage_error, "profile needs frames and a positive length");
  }
  AcqConfig replay = cfg;
  replay.fps = static_cast<double>(profile.frames) / profile.length_s;
  replay.duration_s = profile.length_s;
  const std::uint64_t total = profile.size_bytes();
  std::tie(replay.width, replay.height) =
      replay_dimensions(cfg.width, cfg.height, total / profile.frames);
  ShotManifest manifest = stage_shot(replay, profile.shot_no, profile.frames, total);
  notify(replay, manifest);
  return manifest;
}

}  // namespace shotvod::acq
