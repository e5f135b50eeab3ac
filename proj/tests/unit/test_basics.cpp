#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "../support.hpp"
#include "shotvod/error.hpp"
#include "shotvod/image_io.hpp"
#include "shotvod/types.hpp"

using namespace shotvod;

TEST_CASE("camera names") {
  for (CameraId c : kAllCameras) CHECK(parse_camera(to_string(c)) == c);
  CHECK(to_string(CameraId::wk_ir) == "WK-IR");
  CHECK(to_string(CameraId::wd_vis) == "WD-VIS");
  CHECK_FALSE(parse_camera("WX-IR"));
  CHECK_FALSE(parse_camera("wk-ir"));
  CHECK_FALSE(parse_camera(""));
}

TEST_CASE("status names") {
  for (auto s : {ShotStatus::ingesting, ShotStatus::complete, ShotStatus::failed}) {
    CHECK(parse_status(to_string(s)) == s);
  }
  CHECK_FALSE(parse_status("done"));
}

TEST_CASE("error carries code and name") {
  const Error e(Errc::duplicate_shot, "77212/WK-IR");
  CHECK(e.code() == Errc::duplicate_shot);
  CHECK(std::string(e.what()) == "DuplicateShot: 77212/WK-IR");
  CHECK(to_string(Errc::index_out_of_range) == "IndexOutOfRange");
}

TEST_CASE("FrameImage validates size") {
  CHECK_THROWS_AS(FrameImage(2, 2, std::vector<std::uint8_t>(3)), Error);
  CHECK_THROWS_AS(FrameImage(0, 2, {}), Error);
  const FrameImage img(3, 2, {1, 2, 3, 4, 5, 6});
  CHECK(img.at(0, 1) == 4);
  CHECK(img.at(2, 0) == 3);
}

TEST_CASE("seconds text round trips exactly") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 200.0);
  for (int i = 0; i < 10000; ++i) {
    const double v = i % 3 == 0 ? static_cast<double>(i) / 124.35897435897435 : d(rng);
    const auto back = parse_seconds(format_seconds(v));
    REQUIRE(back);
    REQUIRE(*back == v);
  }
  CHECK(format_seconds(0.1) == "0.1");
  CHECK(format_seconds(0.0) == "0");
  CHECK_FALSE(parse_seconds(""));
  CHECK_FALSE(parse_seconds("abc"));
  CHECK_FALSE(parse_seconds("1.5x"));
  CHECK_FALSE(parse_seconds("nan"));
  CHECK_FALSE(parse_seconds("inf"));
  CHECK(parse_seconds("-1") == -1.0);
  CHECK(parse_seconds("1e9") == 1e9);
}

TEST_CASE("PGM encode and decode") {
  std::vector<std::uint8_t> px(12);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 20);
  const FrameImage img(4, 3, px);
  auto bytes = encode_pgm(img);
  const std::string head(bytes.begin(), bytes.begin() + 11);
  CHECK(head == "P5\n4 3\n255\n");
  CHECK(bytes.size() == 11 + 12);
  CHECK(decode_pgm(bytes) == img);

  bytes.insert(bytes.end(), 100, 0);  // padding is ignored
  CHECK(decode_pgm(bytes) == img);

  const std::string commented = "P5\n# camera\n4 3\n255\n";
  std::vector<std::uint8_t> c(commented.begin(), commented.end());
  c.insert(c.end(), px.begin(), px.end());
  CHECK(decode_pgm(c) == img);

  auto expect_corrupt = [](std::vector<std::uint8_t> b) {
    try {
      decode_pgm(b);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::corrupt_frame);
    }
  };
  expect_corrupt({});
  expect_corrupt({'P', '2', '\n'});
  std::vector<std::uint8_t> short_raster(bytes.begin(), bytes.begin() + 20);
  expect_corrupt(short_raster);
  const std::string wide = "P5\n4 3\n65535\n";
  std::vector<std::uint8_t> w(wide.begin(), wide.end());
  w.resize(w.size() + 24);
  expect_corrupt(w);
}

TEST_CASE("BMP matches an independent decoder") {
  std::mt19937 rng(3);
  for (std::uint32_t w : {1u, 2u, 3u, 4u, 5u, 17u}) {
    for (std::uint32_t h : {1u, 2u, 7u}) {
      std::vector<std::uint8_t> px(std::size_t{w} * h);
      for (auto& p : px) p = static_cast<std::uint8_t>(rng());
      const FrameImage img(w, h, px);
      const auto bmp = encode_bmp(img);
      CHECK(bmp.size() == 14 + 40 + 1024 + std::size_t{dib_stride(w)} * h);
      const auto decoded = testing::decode_bmp(bmp);
      REQUIRE(decoded);
      CHECK(decoded->width == static_cast<std::int32_t>(w));
      CHECK(decoded->height == static_cast<std::int32_t>(h));
      CHECK(decoded->gray == px);
    }
  }
  CHECK(dib_stride(1) == 4);
  CHECK(dib_stride(4) == 4);
  CHECK(dib_stride(5) == 8);
}
