#include "shotvod/image_io.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "shotvod/bytes.hpp"
#include "shotvod/error.hpp"

namespace shotvod {

namespace {

std::string pgm_header(const FrameImage& image) {
  return "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
}

// Skips whitespace and '#' comments, then reads one unsigned decimal field.
std::uint64_t read_header_field(std::span<const std::uint8_t> b, std::size_t& pos) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= b.size() || !std::isdigit(b[pos])) {
    throw Error(Errc::corrupt_frame, "PGM header field missing");
  }
  std::uint64_t value = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    value = value * 10 + (b[pos] - '0');
    if (value > 0xFFFFFFFFu) throw Error(Errc::corrupt_frame, "PGM header field too large");
    ++pos;
  }
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode_pgm(const FrameImage& image) {
  std::string header = pgm_header(image);
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels().begin(), image.pixels().end());
  return out;
}

std::uint64_t write_pgm_file(const std::filesystem::path& path, const FrameImage& image,
                             std::uint64_t padding) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot create " + path.string());
  const std::string header = pgm_header(image);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(image.pixels().data()),
            static_cast<std::streamsize>(image.pixels().size()));
  if (padding > 0) {
    const std::vector<char> zeros(padding, 0);
    out.write(zeros.data(), static_cast<std::streamsize>(zeros.size()));
  }
  out.flush();
  if (!out) throw Error(Errc::io_failure, "write failed for " + path.string());
  return header.size() + image.pixels().size() + padding;
}

FrameImage decode_pgm(std::span<const std::uint8_t> b) {
  if (b.size() < 2 || b[0] != 'P' || b[1] != '5') {
    throw Error(Errc::corrupt_frame, "not a binary PGM (P5)");
  }
  std::size_t pos = 2;
  const auto width = read_header_field(b, pos);
  const auto height = read_header_field(b, pos);
  const auto maxval = read_header_field(b, pos);
  if (width == 0 || height == 0) throw Error(Errc::corrupt_frame, "PGM has zero dimension");
  if (maxval != 255) throw Error(Errc::corrupt_frame, "only 8-bit PGM (maxval 255) is supported");
  if (pos >= b.size() || !std::isspace(b[pos])) {
    throw Error(Errc::corrupt_frame, "PGM header not terminated");
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(width * height);
  if (b.size() - pos < n) throw Error(Errc::corrupt_frame, "PGM raster truncated");
  std::vector<std::uint8_t> data(b.begin() + static_cast<std::ptrdiff_t>(pos),
                                 b.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return FrameImage(static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height),
                    std::move(data));
}

void append_dib_rows(const FrameImage& image, std::vector<std::uint8_t>& out) {
  const std::uint32_t w = image.width();
  const std::uint32_t stride = dib_stride(w);
  const auto px = image.pixels();
  for (std::uint32_t row = image.height(); row-- > 0;) {
    const auto* src = px.data() + std::size_t{row} * w;
    out.insert(out.end(), src, src + w);
    out.insert(out.end(), stride - w, 0);
  }
}

void append_gray_palette(std::vector<std::uint8_t>& out) {
  for (int i = 0; i < 256; ++i) {
    const auto g = static_cast<std::uint8_t>(i);
    out.insert(out.end(), {g, g, g, 0});
  }
}

std::vector<std::uint8_t> encode_bmp(const FrameImage& image) {
  constexpr std::uint32_t kFileHeader = 14;
  constexpr std::uint32_t kInfoHeader = 40;
  constexpr std::uint32_t kPalette = 256 * 4;
  const std::uint32_t image_size = dib_stride(image.width()) * image.height();
  const std::uint32_t offset = kFileHeader + kInfoHeader + kPalette;

  std::vector<std::uint8_t> out;
  out.reserve(offset + image_size);
  out.push_back('B');
  out.push_back('M');
  bytes::put_u32(out, offset + image_size);
  bytes::put_u32(out, 0);
  bytes::put_u32(out, offset);

  bytes::put_u32(out, kInfoHeader);
  bytes::put_u32(out, image.width());
  bytes::put_u32(out, image.height());  // positive: bottom-up
  bytes::put_u16(out, 1);
  bytes::put_u16(out, 8);
  bytes::put_u32(out, 0);  // BI_RGB
  bytes::put_u32(out, image_size);
  bytes::put_u32(out, 2835);  // 72 dpi
  bytes::put_u32(out, 2835);
  bytes::put_u32(out, 256);
  bytes::put_u32(out, 256);
  append_gray_palette(out);
  append_dib_rows(image, out);
  return out;
}

}  // namespace shotvod
