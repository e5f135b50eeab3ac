#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "shotvod/types.hpp"

namespace shotvod {

/// Binary PGM (P5, maxval 255) header + raster.
std::vector<std::uint8_t> encode_pgm(const FrameImage& image);

/// Writes a P5 file followed by `padding` zero bytes. Returns bytes written.
std::uint64_t write_pgm_file(const std::filesystem::path& path, const FrameImage& image,
                             std::uint64_t padding = 0);

/// Decodes the first P5 image in `bytes`; trailing bytes after the raster are
/// ignored. Throws Errc::corrupt_frame.
FrameImage decode_pgm(std::span<const std::uint8_t> bytes);

/// Bytes per DIB row: width rounded up to a multiple of four.
constexpr std::uint32_t dib_stride(std::uint32_t width) noexcept { return (width + 3u) & ~3u; }

/// Appends the raster as bottom-up, 4-byte aligned 8-bit DIB rows.
void append_dib_rows(const FrameImage& image, std::vector<std::uint8_t>& out);

/// Appends 256 RGBQUAD entries mapping index i to gray level i.
void append_gray_palette(std::vector<std::uint8_t>& out);

/// 8-bit palettized grayscale Windows bitmap.
std::vector<std::uint8_t> encode_bmp(const FrameImage& image);

}  // namespace shotvod
