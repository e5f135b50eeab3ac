#pragma once

// Helpers shared by the test binaries. The decoders here are written against
// the file formats directly and deliberately share no code with the library.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

namespace testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("shotvod_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  fs::path path_;
};

inline std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

inline std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}
inline std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

struct DecodedBmp {
  std::int32_t width = 0;
  std::int32_t height = 0;
  std::vector<std::uint8_t> gray;  // top row first
};

// 8-bit palettized BMP; maps each index through the palette's red channel.
inline std::optional<DecodedBmp> decode_bmp(const std::vector<std::uint8_t>& b) {
  if (b.size() < 54 || b[0] != 'B' || b[1] != 'M') return std::nullopt;
  if (le32(&b[2]) != b.size()) return std::nullopt;
  const std::uint32_t data_off = le32(&b[10]);
  const std::uint32_t info = le32(&b[14]);
  DecodedBmp out;
  out.width = static_cast<std::int32_t>(le32(&b[18]));
  const auto raw_h = static_cast<std::int32_t>(le32(&b[22]));
  if (le16(&b[28]) != 8 || le32(&b[30]) != 0) return std::nullopt;
  const bool bottom_up = raw_h > 0;
  out.height = bottom_up ? raw_h : -raw_h;
  const std::size_t palette_off = 14 + info;
  const std::size_t stride = (static_cast<std::size_t>(out.width) + 3) / 4 * 4;
  if (data_off + stride * out.height > b.size()) return std::nullopt;
  out.gray.resize(static_cast<std::size_t>(out.width) * out.height);
  for (std::int32_t y = 0; y < out.height; ++y) {
    const std::size_t src_row = bottom_up ? out.height - 1 - y : y;
    for (std::int32_t x = 0; x < out.width; ++x) {
      const std::uint8_t idx = b[data_off + src_row * stride + x];
      out.gray[static_cast<std::size_t>(y) * out.width + x] = b[palette_off + 4 * idx + 2];
    }
  }
  return out;
}

struct AviFacts {
  std::uint32_t total_frames = 0;     // avih
  std::uint32_t usec_per_frame = 0;   // avih
  std::uint32_t rate = 0, scale = 0;  // strh
  std::uint32_t strh_length = 0;
  std::int32_t width = 0, height = 0;  // strf
  std::uint32_t movi_chunks = 0;       // '00db' chunks found inside movi
  std::uint32_t idx1_entries = 0;
  bool riff_size_ok = false;
};

// Walks the RIFF tree generically; returns nullopt on any structural problem.
inline std::optional<AviFacts> walk_avi(const std::vector<std::uint8_t>& b) {
  auto is = [&](std::size_t at, const char* cc) { return std::memcmp(&b[at], cc, 4) == 0; };
  if (b.size() < 12 || !is(0, "RIFF") || !is(8, "AVI ")) return std::nullopt;
  AviFacts f;
  f.riff_size_ok = le32(&b[4]) + 8 == b.size();
  bool saw_avih = false, saw_strh = false, saw_strf = false;
  std::function<bool(std::size_t, std::size_t, bool)> walk = [&](std::size_t pos, std::size_t end,
                                                                 bool in_movi) -> bool {
    while (pos + 8 <= end) {
      const std::uint32_t size = le32(&b[pos + 4]);
      const std::size_t body = pos + 8;
      if (body + size > end) return false;
      if (is(pos, "LIST")) {
        if (size < 4) return false;
        if (!walk(body + 4, body + size, is(body, "movi"))) return false;
      } else if (is(pos, "avih") && size >= 40) {
        f.usec_per_frame = le32(&b[body]);
        f.total_frames = le32(&b[body + 16]);
        saw_avih = true;
      } else if (is(pos, "strh") && size >= 36 && is(body, "vids")) {
        f.scale = le32(&b[body + 20]);
        f.rate = le32(&b[body + 24]);
        f.strh_length = le32(&b[body + 32]);
        saw_strh = true;
      } else if (is(pos, "strf") && size >= 40) {
        f.width = static_cast<std::int32_t>(le32(&b[body + 4]));
        f.height = static_cast<std::int32_t>(le32(&b[body + 8]));
        saw_strf = true;
      } else if (is(pos, "idx1")) {
        f.idx1_entries = size / 16;
      } else if (in_movi && is(pos, "00db")) {
        ++f.movi_chunks;
      }
      pos = body + size + (size & 1);
    }
    return true;
  };
  if (!walk(12, b.size(), false) || !saw_avih || !saw_strh || !saw_strf) return std::nullopt;
  return f;
}

// Greatest index with times[i] <= t, clamped to [0, n-1].
inline std::size_t linear_frame_at(const std::vector<double>& times, double t) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] <= t) best = i;
  }
  return best;
}

inline std::vector<double> random_times(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> step(0.0, 0.05);
  std::vector<double> t(n);
  double now = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (auto& v : t) {
    v = now;
    now += step(rng);  // zero steps allowed: equal timestamps are still ordered
  }
  return t;
}

inline bool wait_until(const std::function<bool()>& pred, std::chrono::milliseconds limit) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return pred();
}

}  // namespace testing
