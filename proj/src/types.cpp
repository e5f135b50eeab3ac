#include "shotvod/types.hpp"

#include <charconv>
#include <cmath>

#include "shotvod/error.hpp"

namespace shotvod {

std::string_view to_string(CameraId camera) noexcept {
  switch (camera) {
    case CameraId::wd_vis: return "WD-VIS";
    case CameraId::wg_vis: return "WG-VIS";
    case CameraId::wk_vis: return "WK-VIS";
    case CameraId::wk_ir: return "WK-IR";
  }
  return "?";
}

std::optional<CameraId> parse_camera(std::string_view name) noexcept {
  for (CameraId camera : kAllCameras) {
    if (to_string(camera) == name) return camera;
  }
  return std::nullopt;
}

FrameImage::FrameImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width == 0 || height == 0) {
    throw Error(Errc::dimension_mismatch, "frame dimensions must be at least 1x1");
  }
  if (data_.size() != std::size_t{width} * height) {
    throw Error(Errc::dimension_mismatch, "frame holds " + std::to_string(data_.size()) +
                                              " bytes, expected " + std::to_string(width) + "x" +
                                              std::to_string(height));
  }
}

std::string_view to_string(ShotStatus status) noexcept {
  switch (status) {
    case ShotStatus::ingesting: return "ingesting";
    case ShotStatus::complete: return "complete";
    case ShotStatus::failed: return "failed";
  }
  return "?";
}

std::optional<ShotStatus> parse_status(std::string_view name) noexcept {
  for (ShotStatus s : {ShotStatus::ingesting, ShotStatus::complete, ShotStatus::failed}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string format_seconds(double seconds) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, seconds);
  if (ec != std::errc{}) return std::to_string(seconds);
  return std::string(buf, end);
}

std::optional<double> parse_seconds(std::string_view text) noexcept {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') return std::nullopt;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace shotvod
