#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "../support.hpp"
#include "shotvod/acquisition.hpp"
#include "shotvod/error.hpp"
#include "shotvod/image_io.hpp"
#include "shotvod/net.hpp"
#include "shotvod/profiles.hpp"

using namespace shotvod;
using namespace shotvod::acq;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::uint64_t dir_bytes(const fs::path& dir, const std::string& prefix) {
  std::uint64_t total = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename().string().starts_with(prefix)) total += e.file_size();
  }
  return total;
}

}  // namespace

TEST_CASE("test pattern") {
  CHECK(generate_frame(0, 0, 8, 8).at(0, 0) == 0);
  CHECK(generate_frame(10, 2, 8, 8).at(3, 4) == 31);
  const auto f = generate_frame(77212, 5, 33, 17);
  for (std::uint32_t y = 0; y < 17; ++y) {
    for (std::uint32_t x = 0; x < 33; ++x) {
      REQUIRE(f.at(x, y) == (x + y + 7 * 5 + 77212) % 256);
    }
  }
  CHECK(generate_frame(3, 4, 20, 10) == generate_frame(3, 4, 20, 10));
  CHECK_FALSE(generate_frame(3, 4, 20, 10) == generate_frame(3, 5, 20, 10));
}

TEST_CASE("frame count rule") {
  CHECK(frames_for(25, 1) == 25);
  CHECK(frames_for(25, 0) == 1);
  CHECK(frames_for(97 / 0.78, 0.78) == 97);
  CHECK(frames_for(1198 / 9.79, 9.79) == 1198);
  CHECK(frames_for(12810 / 104.78, 104.78) == 12810);
}

TEST_CASE("time line format") {
  CHECK(format_time_line(0.0) == "0.000000");
  CHECK(format_time_line(0.04) == "0.040000");
  CHECK(format_time_line(1.5) == "1.500000");
  const double v = 1.0 / 124.35897435897435;
  CHECK(std::strtod(format_time_line(v).c_str(), nullptr) == v);
}

TEST_CASE("produce without daemon") {
  TempDir dir;
  AcqConfig cfg;
  cfg.incoming_dir = dir.path();
  cfg.width = 16;
  cfg.height = 12;
  cfg.fps = 97 / 0.78;
  cfg.duration_s = 0.78;
  const auto m = produce_shot(cfg, 77212);
  CHECK(m.frame_count == 97);
  CHECK_FALSE(m.ack);
  CHECK(m.dir == dir.path() / "77212" / "WK-IR");
  CHECK(fs::exists(m.dir / "frame_000000.pgm"));
  CHECK(fs::exists(m.dir / "frame_000096.pgm"));
  CHECK_FALSE(fs::exists(m.dir / "frame_000097.pgm"));

  const auto lines = testing::read_lines(m.dir / "times.txt");
  REQUIRE(lines.size() == 97);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    REQUIRE(std::abs(std::strtod(lines[i].c_str(), nullptr) - static_cast<double>(i) / cfg.fps) <= 1e-9);
  }
  // 97 frames at 97/0.78 fps cover 0.78 s of frame intervals
  CHECK(97 / cfg.fps == doctest::Approx(0.78));

  const auto f5 = decode_pgm(testing::read_file(m.dir / "frame_000005.pgm"));
  CHECK(f5 == generate_frame(77212, 5, 16, 12));
  CHECK(m.total_bytes == dir_bytes(m.dir, "frame_") + fs::file_size(m.dir / "times.txt"));
}

TEST_CASE("zero duration") {
  TempDir dir;
  AcqConfig cfg;
  cfg.incoming_dir = dir.path();
  cfg.duration_s = 0;
  const auto m = produce_shot(cfg, 3);
  CHECK(m.frame_count == 1);
  CHECK(testing::read_lines(m.times_file) == std::vector<std::string>{"0.000000"});
}

TEST_CASE("restaging replaces old files") {
  TempDir dir;
  AcqConfig cfg;
  cfg.incoming_dir = dir.path();
  cfg.width = 4;
  cfg.height = 4;
  cfg.duration_s = 2;
  produce_shot(cfg, 3);
  cfg.duration_s = 1;
  const auto m = produce_shot(cfg, 3);
  CHECK_FALSE(fs::exists(m.dir / "frame_000025.pgm"));
}

TEST_CASE("invalid config") {
  TempDir dir;
  AcqConfig cfg;
  cfg.incoming_dir = dir.path();
  cfg.fps = 0;
  CHECK_THROWS_AS(produce_shot(cfg, 1), Error);
  cfg.fps = 25;
  cfg.width = 0;
  CHECK_THROWS_AS(produce_shot(cfg, 1), Error);
  cfg.width = 4;
  CHECK_THROWS_AS(produce_shot(cfg, 0), Error);
}

TEST_CASE("notification failure keeps staged files") {
  TempDir dir;
  std::uint16_t port;
  {
    auto l = net::listen_tcp("127.0.0.1", 0);
    port = net::local_port(l);
  }
  AcqConfig cfg;
  cfg.incoming_dir = dir.path();
  cfg.width = 4;
  cfg.height = 4;
  cfg.daemon = protocol::Endpoint{"127.0.0.1", port};
  try {
    produce_shot(cfg, 8);
    FAIL("notified nobody");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::connect_failure);
  }
  CHECK(fs::exists(incoming_shot_dir(dir.path(), 8, CameraId::wk_ir) / "times.txt"));
}

TEST_CASE("reference profiles") {
  const auto p = reference_profiles();
  REQUIRE(p.size() == 6);
  CHECK(find_profile(77212).frames == 97);
  CHECK(find_profile(77212).length_s == 0.78);
  CHECK(find_profile(77212).size_mb == 1.02);
  CHECK(find_profile(77213).frames == 1198);
  CHECK(find_profile(77213).size_mb == 30.9);
  CHECK(find_profile(77214).frames == 650);
  CHECK(find_profile(77215).frames == 1146);
  CHECK(find_profile(77216).frames == 1160);
  CHECK(find_profile(73999).frames == 12810);
  CHECK(find_profile(73999).old_time_s == 271.607);
  CHECK(find_profile(73999).new_time_s == 91.875);
  CHECK(find_profile(77212).size_bytes() == 1020000);
  try {
    find_profile(1);
    FAIL("found");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_profile);
  }
  // aggregate old/new over the table sits near three
  double old_sum = 0, new_sum = 0;
  for (const auto& r : p) {
    old_sum += r.old_time_s;
    new_sum += r.new_time_s;
  }
  CHECK(old_sum / new_sum == doctest::Approx(3.01).epsilon(0.01));
}

TEST_CASE("replay dimensions fit the per-frame budget") {
  CHECK(replay_dimensions(320, 240, 1000000) == std::pair<std::uint32_t, std::uint32_t>{320, 240});
  for (const auto& p : reference_profiles()) {
    const std::uint64_t budget = p.size_bytes() / p.frames;
    const auto [w, h] = replay_dimensions(320, 240, budget);
    CAPTURE(p.shot_no);
    CHECK(w * 3 == h * 4);
    CHECK(encode_pgm(FrameImage(w, h, std::vector<std::uint8_t>(std::size_t{w} * h))).size() <= budget);
    const auto bigger = encode_pgm(FrameImage(w + 4, h + 3, std::vector<std::uint8_t>(std::size_t{w + 4} * (h + 3))));
    CHECK((bigger.size() > budget || w == 320));
  }
}

TEST_CASE("replay reproduces frame counts and sizes") {
  TempDir dir;
  AcqConfig cfg;
  cfg.incoming_dir = dir.path();
  for (ShotId id : {77212ull, 77213ull}) {
    const auto& p = find_profile(id);
    const auto m = replay_profile(cfg, id);
    CAPTURE(id);
    CHECK(m.frame_count == p.frames);
    CHECK(dir_bytes(m.dir, "frame_") == p.size_bytes());
    CHECK(m.fps == doctest::Approx(p.frames / p.length_s));
    const auto lines = testing::read_lines(m.times_file);
    CHECK(lines.size() == p.frames);
    const auto last = decode_pgm(testing::read_file(m.dir / frame_file_name(p.frames - 1)));
    CHECK(last == generate_frame(id, p.frames - 1, m.width, m.height));
  }
  CHECK(std::abs(static_cast<double>(dir_bytes(incoming_shot_dir(dir.path(), 77213, CameraId::wk_ir), "frame_")) - 30.9e6) < 1);
}
