#include "shotvod/video_synth.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <cstdlib>
#include <limits>
#include <optional>

#include "shotvod/bytes.hpp"
#include "shotvod/error.hpp"
#include "shotvod/image_io.hpp"

namespace shotvod::video {

namespace {

constexpr std::uint32_t kAvifHasIndex = 0x10;
constexpr std::uint32_t kAviifKeyframe = 0x10;
constexpr std::uint32_t kAvihSize = 56;
constexpr std::uint32_t kStrhSize = 56;
constexpr std::uint32_t kStrfSize = 40 + 256 * 4;
constexpr std::uint32_t kStrdSize = 8;  // f64 frame rate; rate/scale cannot hold every double
constexpr std::uint32_t kStrlListSize = 4 + (8 + kStrhSize) + (8 + kStrfSize) + (8 + kStrdSize);
constexpr std::uint32_t kHdrlListSize = 4 + (8 + kAvihSize) + (8 + kStrlListSize);

// Byte offsets of the fields patched in finish().
constexpr std::size_t kRiffSizeAt = 4;
constexpr std::size_t kTotalFramesAt = 48;
constexpr std::size_t kStreamLengthAt = 140;
constexpr std::size_t kMoviSizeAt = 12 + 8 + kHdrlListSize + 4;
constexpr std::size_t kMoviFourccAt = kMoviSizeAt + 4;

using u128 = unsigned __int128;

// Fraction with the smallest terms strictly inside (a/b, c/d), a/b < c/d.
std::pair<u128, u128> simplest_between(u128 a, u128 b, u128 c, u128 d) {
  const u128 whole = a / b;
  if ((whole + 1) * d < c) return {whole + 1, 1};
  const u128 a_rem = a - whole * b;
  const u128 c_rem = c - whole * d;
  // x = whole + 1/y with y inside (d/c_rem, b/a_rem)
  if (a_rem == 0) {
    const u128 y = d / c_rem + 1;
    return {whole * y + 1, y};
  }
  const auto [yn, yd] = simplest_between(d, c_rem, b, a_rem);
  return {whole * yn + yd, yn};
}

}  // namespace

FrameRate to_frame_rate(double fps) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint32_t>::max();
  if (!(fps > 0.0) || !std::isfinite(fps)) throw Error(Errc::usage_error, "fps must be > 0");
  if (fps >= static_cast<double>(kMax)) return {static_cast<std::uint32_t>(kMax), 1};

  // Every rational strictly between the midpoints to the neighbouring doubles
  // rounds back to fps. Take the one with the smallest terms.
  int exp = 0;
  const double m = std::frexp(fps, &exp);
  const auto mantissa = static_cast<u128>(std::ldexp(m, 53));
  const int shift = 53 + 2 - exp;  // fps = 4 * mantissa / 2^shift
  if (shift >= 127) return {1, static_cast<std::uint32_t>(kMax)};
  const u128 den = u128{1} << shift;
  const bool power_of_two = mantissa == (u128{1} << 52);
  const u128 lo = 4 * mantissa - (power_of_two ? 1 : 2);
  const u128 hi = 4 * mantissa + 2;

  const auto [p, q] = simplest_between(lo, den, hi, den);
  if (p > 0 && p <= kMax && q <= kMax) {
    const FrameRate exact{static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(q)};
    if (exact.fps() == fps) return exact;
  }

  // No 32-bit fraction reproduces fps: nearest convergent that fits.
  u128 num = mantissa, d = u128{1} << (shift - 2);
  u128 h1 = 1, h2 = 0, k1 = 0, k2 = 1;
  FrameRate best{static_cast<std::uint32_t>(std::max(1.0, std::round(fps))), 1};
  double best_err = std::abs(best.fps() - fps);
  while (d != 0) {
    const u128 a = num / d;
    const u128 h = a * h1 + h2;
    const u128 k = a * k1 + k2;
    if (h > kMax || k > kMax) break;
    const FrameRate candidate{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(k)};
    if (candidate.rate > 0 && std::abs(candidate.fps() - fps) < best_err) {
      best = candidate;
      best_err = std::abs(candidate.fps() - fps);
    }
    const u128 rem = num - a * d;
    num = d;
    d = rem;
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
  }
  return best;
}

double nominal_fps(std::uint64_t frame_count, double length_s) {
  return static_cast<double>(frame_count) / std::max(length_s, 1.0 / 1000.0);
}

AviWriter::AviWriter(std::ostream& out, double fps) : out_(out), fps_(fps), rate_(to_frame_rate(fps)) {}

void AviWriter::write(std::span<const std::uint8_t> data) {
  out_.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out_) throw Error(Errc::sink_failure, "write to video sink failed");
  pos_ += data.size();
}

void AviWriter::write_headers() {
  const std::uint32_t frame_bytes = dib_stride(width_) * height_;
  const double usec = std::round(1e6 / fps_);
  const auto usec_per_frame = static_cast<std::uint32_t>(
      std::min(usec, static_cast<double>(std::numeric_limits<std::uint32_t>::max())));
  const double bps = std::min(std::ceil(frame_bytes * fps_),
                              static_cast<double>(std::numeric_limits<std::uint32_t>::max()));

  std::vector<std::uint8_t> h;
  h.reserve(kMoviFourccAt + 4);
  bytes::put_fourcc(h, "RIFF");
  bytes::put_u32(h, 0);  // patched
  bytes::put_fourcc(h, "AVI ");

  bytes::put_fourcc(h, "LIST");
  bytes::put_u32(h, kHdrlListSize);
  bytes::put_fourcc(h, "hdrl");

  bytes::put_fourcc(h, "avih");
  bytes::put_u32(h, kAvihSize);
  bytes::put_u32(h, usec_per_frame);
  bytes::put_u32(h, static_cast<std::uint32_t>(bps));
  bytes::put_u32(h, 0);  // dwPaddingGranularity
  bytes::put_u32(h, kAvifHasIndex);
  bytes::put_u32(h, 0);  // dwTotalFrames, patched
  bytes::put_u32(h, 0);  // dwInitialFrames
  bytes::put_u32(h, 1);  // dwStreams
  bytes::put_u32(h, frame_bytes + 8);
  bytes::put_u32(h, width_);
  bytes::put_u32(h, height_);
  for (int i = 0; i < 4; ++i) bytes::put_u32(h, 0);

  bytes::put_fourcc(h, "LIST");
  bytes::put_u32(h, kStrlListSize);
  bytes::put_fourcc(h, "strl");

  bytes::put_fourcc(h, "strh");
  bytes::put_u32(h, kStrhSize);
  bytes::put_fourcc(h, "vids");
  bytes::put_u32(h, 0);  // fccHandler: uncompressed
  bytes::put_u32(h, 0);  // dwFlags
  bytes::put_u16(h, 0);  // wPriority
  bytes::put_u16(h, 0);  // wLanguage
  bytes::put_u32(h, 0);  // dwInitialFrames
  bytes::put_u32(h, rate_.scale);
  bytes::put_u32(h, rate_.rate);
  bytes::put_u32(h, 0);  // dwStart
  bytes::put_u32(h, 0);  // dwLength, patched
  bytes::put_u32(h, frame_bytes);
  bytes::put_u32(h, 0xFFFFFFFFu);  // dwQuality: default
  bytes::put_u32(h, 0);            // dwSampleSize: varies per chunk
  bytes::put_u16(h, 0);
  bytes::put_u16(h, 0);
  bytes::put_u16(h, static_cast<std::uint16_t>(std::min<std::uint32_t>(width_, 0x7FFF)));
  bytes::put_u16(h, static_cast<std::uint16_t>(std::min<std::uint32_t>(height_, 0x7FFF)));

  bytes::put_fourcc(h, "strf");
  bytes::put_u32(h, kStrfSize);
  bytes::put_u32(h, 40);
  bytes::put_u32(h, width_);
  bytes::put_u32(h, height_);  // positive: bottom-up rows
  bytes::put_u16(h, 1);
  bytes::put_u16(h, 8);
  bytes::put_u32(h, 0);  // BI_RGB
  bytes::put_u32(h, frame_bytes);
  bytes::put_u32(h, 0);
  bytes::put_u32(h, 0);
  bytes::put_u32(h, 256);
  bytes::put_u32(h, 256);
  append_gray_palette(h);

  bytes::put_fourcc(h, "strd");
  bytes::put_u32(h, kStrdSize);
  bytes::put_f64(h, fps_);

  bytes::put_fourcc(h, "LIST");
  bytes::put_u32(h, 0);  // patched
  bytes::put_fourcc(h, "movi");
  write(h);
  movi_fourcc_pos_ = kMoviFourccAt;
}

void AviWriter::add_frame(const FrameImage& frame) {
  if (finished_) throw Error(Errc::usage_error, "AVI already finished");
  if (frame.empty()) throw Error(Errc::dimension_mismatch, "empty frame");
  if (frame_count_ == 0) {
    width_ = frame.width();
    height_ = frame.height();
    write_headers();
  } else if (frame.width() != width_ || frame.height() != height_) {
    throw Error(Errc::dimension_mismatch, "frame " + std::to_string(frame_count_) + " is " +
                                              std::to_string(frame.width()) + "x" +
                                              std::to_string(frame.height()) + ", video is " +
                                              std::to_string(width_) + "x" + std::to_string(height_));
  }
  const std::uint32_t frame_bytes = dib_stride(width_) * height_;
  if (pos_ + 8 + frame_bytes + 16ull * (frame_count_ + 1) + 8 > 0xFFFFFFFFull) {
    throw Error(Errc::sink_failure, "video exceeds the 4 GiB RIFF limit");
  }

  const auto chunk_offset = static_cast<std::uint32_t>(pos_ - movi_fourcc_pos_);
  scratch_.clear();
  bytes::put_fourcc(scratch_, "00db");
  bytes::put_u32(scratch_, frame_bytes);
  append_dib_rows(frame, scratch_);
  write(scratch_);

  bytes::put_fourcc(index_, "00db");
  bytes::put_u32(index_, kAviifKeyframe);
  bytes::put_u32(index_, chunk_offset);
  bytes::put_u32(index_, frame_bytes);
  ++frame_count_;
}

VideoMeta AviWriter::finish() {
  if (finished_) throw Error(Errc::usage_error, "AVI already finished");
  if (frame_count_ == 0) throw Error(Errc::empty_input, "no frames to mux");
  finished_ = true;

  const std::uint64_t movi_end = pos_;
  std::vector<std::uint8_t> idx;
  bytes::put_fourcc(idx, "idx1");
  bytes::put_u32(idx, static_cast<std::uint32_t>(index_.size()));
  write(idx);
  write(index_);
  index_.clear();
  index_.shrink_to_fit();

  const std::streampos end = out_.tellp();
  const std::streampos start = end - static_cast<std::streamoff>(pos_);
  if (end < 0 || start < 0) throw Error(Errc::sink_failure, "video sink is not seekable");
  auto patch = [&](std::size_t at, std::uint32_t value) {
    std::vector<std::uint8_t> b;
    bytes::put_u32(b, value);
    out_.seekp(start + static_cast<std::streamoff>(at));
    out_.write(reinterpret_cast<const char*>(b.data()), 4);
  };
  patch(kRiffSizeAt, static_cast<std::uint32_t>(pos_ - 8));
  patch(kTotalFramesAt, frame_count_);
  patch(kStreamLengthAt, frame_count_);
  patch(kMoviSizeAt, static_cast<std::uint32_t>(movi_end - kMoviFourccAt));
  out_.seekp(end);
  out_.flush();
  if (!out_) throw Error(Errc::sink_failure, "patching video headers failed");

  return {frame_count_, fps_, width_, height_, "avi-uncompressed"};
}

VideoMeta mux_avi(const std::function<std::optional<FrameImage>()>& next, double fps,
                  std::ostream& out) {
  AviWriter writer(out, fps);
  while (auto frame = next()) writer.add_frame(*frame);
  return writer.finish();
}

VideoMeta mux_avi(std::span<const FrameImage> frames, double fps, std::ostream& out) {
  AviWriter writer(out, fps);
  for (const auto& f : frames) writer.add_frame(f);
  return writer.finish();
}

VideoMeta parse_avi_header(std::span<const std::uint8_t> b) {
  static constexpr std::string_view kMagic = "RIFF";
  if (b.size() < 12) {
    const auto n = std::min<std::size_t>(b.size(), 4);
    if (std::equal(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(n), kMagic.begin())) {
      throw Error(Errc::truncated_file, "shorter than a RIFF header");
    }
    throw Error(Errc::not_avi, "missing RIFF header");
  }
  if (!bytes::fourcc_is(b, 0, "RIFF") || !bytes::fourcc_is(b, 8, "AVI ")) {
    throw Error(Errc::not_avi, "missing RIFF 'AVI ' header");
  }
  const std::uint64_t riff_end = std::uint64_t{bytes::get_u32(b, 4)} + 8;
  if (riff_end > b.size()) {
    throw Error(Errc::truncated_file, "RIFF declares " + std::to_string(riff_end) + " bytes, have " +
                                          std::to_string(b.size()));
  }
  auto need = [&](std::uint64_t end) {
    if (end > riff_end) throw Error(Errc::truncated_file, "chunk runs past end of file");
  };

  bool have_avih = false, have_strh = false, have_strf = false;
  std::optional<double> exact_fps;
  VideoMeta m;

  // Walks chunks in [pos, end); descends into 'hdrl' and 'strl' lists.
  std::function<void(std::uint64_t, std::uint64_t)> walk = [&](std::uint64_t pos, std::uint64_t end) {
    while (pos + 8 <= end) {
      need(pos + 8);
      const std::uint32_t size = bytes::get_u32(b, pos + 4);
      const std::uint64_t data = pos + 8;
      need(data + size);
      if (bytes::fourcc_is(b, pos, "LIST")) {
        if (size < 4) throw Error(Errc::not_avi, "LIST chunk too small");
        if (bytes::fourcc_is(b, data, "hdrl") || bytes::fourcc_is(b, data, "strl")) {
          walk(data + 4, data + size);
        }
      } else if (bytes::fourcc_is(b, pos, "avih")) {
        if (size < kAvihSize) throw Error(Errc::not_avi, "short avih");
        m.frame_count = bytes::get_u32(b, data + 16);
        m.width = bytes::get_u32(b, data + 32);
        m.height = bytes::get_u32(b, data + 36);
        have_avih = true;
      } else if (bytes::fourcc_is(b, pos, "strh")) {
        if (size < 48) throw Error(Errc::not_avi, "short strh");
        if (bytes::fourcc_is(b, data, "vids") && !have_strh) {
          const std::uint32_t scale = bytes::get_u32(b, data + 20);
          const std::uint32_t rate = bytes::get_u32(b, data + 24);
          if (scale == 0) throw Error(Errc::not_avi, "strh scale is zero");
          m.fps_nominal = FrameRate{rate, scale}.fps();
          have_strh = true;
        }
      } else if (bytes::fourcc_is(b, pos, "strf")) {
        if (have_strh && !have_strf) {
          if (size < 40) throw Error(Errc::not_avi, "short strf");
          m.width = bytes::get_u32(b, data + 4);
          m.height = static_cast<std::uint32_t>(std::abs(bytes::get_i32(b, data + 8)));
          have_strf = true;
        }
      } else if (bytes::fourcc_is(b, pos, "strd")) {
        if (have_strh && !exact_fps && size == kStrdSize) {
          const double f = bytes::get_f64(b, data);
          if (std::isfinite(f) && f > 0.0) exact_fps = f;
        }
      }
      if (bytes::fourcc_is(b, pos, "LIST") && bytes::fourcc_is(b, data, "movi")) break;
      pos = data + size + (size & 1u);
    }
  };
  walk(12, riff_end);

  if (!have_avih || !have_strh || !have_strf) {
    throw Error(Errc::not_avi, "no video stream header found");
  }
  if (exact_fps) m.fps_nominal = *exact_fps;
  return m;
}

}  // namespace shotvod::video
