#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

namespace shotvod::bytes {

// Little-endian helpers for the binary formats (FSEG, RIFF, BMP).

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

inline void put_fourcc(std::vector<std::uint8_t>& out, std::string_view cc) {
  out.insert(out.end(), cc.begin(), cc.begin() + 4);
}

inline void patch_u32(std::span<std::uint8_t> buf, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint32_t{b[at]} | (std::uint32_t{b[at + 1]} << 8) | (std::uint32_t{b[at + 2]} << 16) |
         (std::uint32_t{b[at + 3]} << 24);
}

inline std::int32_t get_i32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::int32_t>(get_u32(b, at));
}

inline std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint64_t{get_u32(b, at)} | (std::uint64_t{get_u32(b, at + 4)} << 32);
}

inline double get_f64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t bits = get_u64(b, at);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

inline bool fourcc_is(std::span<const std::uint8_t> b, std::size_t at, std::string_view cc) {
  return b.size() >= at + 4 && std::memcmp(b.data() + at, cc.data(), 4) == 0;
}

}  // namespace shotvod::bytes
