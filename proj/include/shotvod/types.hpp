#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shotvod {

using ShotId = std::uint64_t;

/// The four diagnostic cameras: three visible CCDs on windows D, G and K, and
/// the infrared camera on window K.
enum class CameraId : std::uint8_t { wd_vis, wg_vis, wk_vis, wk_ir };

inline constexpr std::array<CameraId, 4> kAllCameras = {CameraId::wd_vis, CameraId::wg_vis,
                                                        CameraId::wk_vis, CameraId::wk_ir};

std::string_view to_string(CameraId camera) noexcept;
std::optional<CameraId> parse_camera(std::string_view name) noexcept;

/// Default raster size of the infrared camera.
inline constexpr std::uint32_t kDefaultWidth = 320;
inline constexpr std::uint32_t kDefaultHeight = 240;

/// One 8-bit grayscale raster, row-major, top row first.
class FrameImage {
 public:
  FrameImage() = default;
  /// Throws Errc::dimension_mismatch unless data.size() == width * height and
  /// both dimensions are at least 1.
  FrameImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> data);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return data_[std::size_t{y} * width_ + x]; }
  bool empty() const noexcept { return data_.empty(); }

  bool operator==(const FrameImage&) const = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

enum class ShotStatus : std::uint8_t { ingesting, complete, failed };

std::string_view to_string(ShotStatus status) noexcept;
std::optional<ShotStatus> parse_status(std::string_view name) noexcept;

struct ShotKey {
  ShotId shot_id = 0;
  CameraId camera = CameraId::wk_ir;

  auto operator<=>(const ShotKey&) const = default;
};

/// Catalog entry for one (shot, camera) recording.
struct ShotRecord {
  ShotId shot_id = 0;
  CameraId camera = CameraId::wk_ir;
  double length_s = 0.0;
  std::uint64_t size_bytes = 0;
  std::uint64_t frame_count = 0;
  ShotStatus status = ShotStatus::ingesting;
  std::chrono::system_clock::time_point created_at{};
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t segments = 0;

  ShotKey key() const noexcept { return {shot_id, camera}; }
  bool operator==(const ShotRecord&) const = default;
};

/// Shortest decimal text that parses back to exactly `seconds`.
std::string format_seconds(double seconds);

/// Parses a decimal floating literal occupying the whole of `text`.
std::optional<double> parse_seconds(std::string_view text) noexcept;

}  // namespace shotvod
