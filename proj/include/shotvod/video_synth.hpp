#pragma once

// Uncompressed RIFF/AVI synthesis for shot videos.
//
//   RIFF 'AVI '
//     LIST 'hdrl'
//       'avih'                 main header, dwTotalFrames, dwMicroSecPerFrame
//       LIST 'strl'
//         'strh' 'vids'        dwRate/dwScale carry the exact frame rate
//         'strf'               BITMAPINFOHEADER (8 bpp, BI_RGB) + gray palette
//         'strd'               f64 frame rate, exact (rate/scale is the nearest 32-bit fraction)
//     LIST 'movi'
//       '00db' ...             one bottom-up DIB per frame
//     'idx1'                   offsets relative to the 'movi' fourcc

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "shotvod/types.hpp"

namespace shotvod::video {

struct VideoMeta {
  std::uint32_t frame_count = 0;
  double fps_nominal = 0.0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::string container = "avi-uncompressed";

  bool operator==(const VideoMeta&) const = default;
};

/// dwRate / dwScale pair whose quotient, evaluated in double, equals the
/// requested fps whenever a 32-bit fraction can represent it.
struct FrameRate {
  std::uint32_t rate = 0;
  std::uint32_t scale = 1;

  double fps() const noexcept { return static_cast<double>(rate) / static_cast<double>(scale); }
};

FrameRate to_frame_rate(double fps);

/// frame_count / max(length_s, 1 ms): container rate that preserves wall-clock duration.
double nominal_fps(std::uint64_t frame_count, double length_s);

/// Streams frames into a seekable sink. Frame data is not retained; only the
/// 16-byte index entry per frame is.
class AviWriter {
 public:
  /// Throws Errc::usage_error for fps <= 0.
  AviWriter(std::ostream& out, double fps);

  /// Errors: DimensionMismatch, SinkFailure.
  void add_frame(const FrameImage& frame);

  /// Writes the index and patches sizes and counts. Errors: EmptyInput, SinkFailure.
  VideoMeta finish();

  std::uint32_t frames_written() const noexcept { return frame_count_; }

 private:
  void write(std::span<const std::uint8_t> data);
  void write_headers();

  std::ostream& out_;
  double fps_;
  FrameRate rate_;
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::uint32_t frame_count_ = 0;
  std::uint64_t movi_fourcc_pos_ = 0;
  std::uint64_t pos_ = 0;
  std::vector<std::uint8_t> index_;
  std::vector<std::uint8_t> scratch_;
  bool finished_ = false;
};

/// Pulls frames from `next` until it returns nullopt.
/// Errors: EmptyInput, DimensionMismatch, SinkFailure, UsageError (fps <= 0).
VideoMeta mux_avi(const std::function<std::optional<FrameImage>()>& next, double fps,
                  std::ostream& out);

VideoMeta mux_avi(std::span<const FrameImage> frames, double fps, std::ostream& out);

/// Reads frame count, rate and dimensions from 'avih'/'strh'/'strf'. The rate
/// comes from 'strd' when present, otherwise from dwRate/dwScale.
/// Errors: NotAvi, TruncatedFile.
VideoMeta parse_avi_header(std::span<const std::uint8_t> bytes);

}  // namespace shotvod::video
