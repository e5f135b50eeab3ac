#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include "../support.hpp"
#include "shotvod/acquisition.hpp"
#include "shotvod/error.hpp"
#include "shotvod/profiles.hpp"
#include "shotvod/storage_daemon.hpp"
#include "shotvod/video_synth.hpp"
#include "shotvod/vod_api.hpp"

using namespace shotvod;
using nlohmann::json;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kW = 13, kH = 7;

void ingest(store::FrameStore& s, const fs::path& incoming, ShotId id, std::uint64_t frames,
            CameraId cam = CameraId::wk_ir, bool video = true) {
  acq::AcqConfig cfg;
  cfg.incoming_dir = incoming;
  cfg.width = kW;
  cfg.height = kH;
  cfg.fps = 97 / 0.78;
  cfg.camera = cam;
  acq::stage_shot(cfg, id, frames);
  daemon::IngestOptions opt;
  opt.incoming_dir = incoming;
  opt.synthesize_video = video;
  daemon::ingest_shot(s, {id, cam}, opt);
}

struct Fixture {
  TempDir dir;
  store::FrameStore store = store::FrameStore::open(dir / "store", true);
  std::unique_ptr<api::VodServer> server;
  std::unique_ptr<httplib::Client> client;

  void serve(std::string cors = {}) {
    server = std::make_unique<api::VodServer>(
        api::ServerConfig{dir / "store", "127.0.0.1", 0, std::move(cors)});
    server->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", server->port());
  }
  json get_json(const std::string& path, int expect_status) {
    auto res = client->Get(path);
    REQUIRE(res);
    CHECK(res->status == expect_status);
    CHECK(res->get_header_value("Content-Type") == "application/json");
    const auto body = json::parse(res->body);
    CHECK(body.at("schema_version") == "1");
    return body;
  }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "shot list") {
  serve();
  CHECK(get_json("/api/shots", 200).at("shots") == json::array());

  for (const auto& p : reference_profiles()) ingest(store, dir / "in", p.shot_no, 3);
  ingest(store, dir / "in", 77214, 2, CameraId::wd_vis);
  auto unfinished = store.create_shot(80000, CameraId::wk_ir);

  const auto ir = get_json("/api/shots?camera=WK-IR", 200).at("shots");
  REQUIRE(ir.size() == 6);
  CHECK(ir.front().at("shot_id") == 77216);
  CHECK(ir.back().at("shot_id") == 73999);
  for (const auto& s : ir) {
    CHECK(s.at("camera_id") == "WK-IR");
    CHECK(s.at("frame_count") == 3);
    CHECK(s.at("has_video") == true);
  }
  CHECK(get_json("/api/shots?from=77213&to=77215&camera=WK-IR", 200).at("shots").size() == 3);
  CHECK(get_json("/api/shots", 200).at("shots").size() == 7);
  CHECK(get_json("/api/shots?limit=2", 200).at("shots").size() == 2);
  CHECK(get_json("/api/shots?limit=0", 200).at("shots").empty());
  get_json("/api/shots?from=x", 400);
  get_json("/api/shots?limit=-1", 400);
  get_json("/api/shots?camera=XX", 400);

  const auto health = get_json("/api/health", 200);
  CHECK(health.at("status") == "ok");
  CHECK(health.at("shots") == get_json("/api/shots?limit=1000", 200).at("shots").size());
}

TEST_CASE_FIXTURE(Fixture, "shot metadata") {
  ingest(store, dir / "in", 77212, 97);
  auto unfinished = store.create_shot(77213, CameraId::wk_ir);
  serve();
  const auto s = get_json("/api/shots/77212/WK-IR", 200);
  CHECK(s.at("frame_count") == 97);
  CHECK(s.at("shot_id") == 77212);
  CHECK(s.at("width") == kW);
  // last timestamp is 96/fps with fps = 97/0.78: one frame interval short of 0.78 s
  CHECK(s.at("length_s").get<double>() == doctest::Approx(0.78).epsilon(0.011));
  CHECK(s.at("length_s").get<double>() == store.timestamps(77212, CameraId::wk_ir).back());

  get_json("/api/shots/1/WK-IR", 404);
  get_json("/api/shots/77212/WD-VIS", 404);
  get_json("/api/shots/77212/NOPE", 404);
  const auto pending = get_json("/api/shots/77213/WK-IR", 404);
  CHECK(pending.at("status") == "ingesting");
}

TEST_CASE_FIXTURE(Fixture, "frames by index") {
  ingest(store, dir / "in", 501, 97);
  serve();
  for (std::size_t i : {0ul, 1ul, 63ul, 64ul, 96ul}) {
    auto res = client->Get("/api/shots/501/WK-IR/frames/" + std::to_string(i));
    REQUIRE(res);
    REQUIRE(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "image/bmp");
    CHECK(res->get_header_value("X-Frame-Index") == std::to_string(i));
    const double t = std::stod(res->get_header_value("X-Frame-Time"));
    CHECK(t == store.get_frame(501, CameraId::wk_ir, i).time_s);
    const auto bmp = testing::decode_bmp({res->body.begin(), res->body.end()});
    REQUIRE(bmp);
    const auto want = acq::generate_frame(501, i, kW, kH);
    CHECK(bmp->gray == std::vector<std::uint8_t>(want.pixels().begin(), want.pixels().end()));
  }
  auto res = client->Get("/api/shots/501/WK-IR/frames/97");
  REQUIRE(res);
  CHECK(res->status == 416);
  CHECK(json::parse(res->body).at("frame_count") == 97);
  res = client->Get("/api/shots/502/WK-IR/frames/0");
  REQUIRE(res);
  CHECK(res->status == 404);
}

TEST_CASE_FIXTURE(Fixture, "frame lookup by time") {
  {
    auto w = store.create_shot(600, CameraId::wg_vis);
    std::vector<FrameImage> f;
    for (int i = 0; i < 3; ++i) f.push_back(acq::generate_frame(600, i, kW, kH));
    w.append_segment(f, std::vector<double>{0.0, 0.1, 0.2});
    w.finalize(0);
  }
  serve();
  auto at = [&](const std::string& t) {
    auto res = client->Get("/api/shots/600/WG-VIS/frame_at?t=" + t);
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return std::make_pair(res->get_header_value("X-Frame-Index"), res->get_header_value("X-Frame-Time"));
  };
  CHECK(at("0.15") == std::make_pair(std::string("1"), std::string("0.1")));
  CHECK(at("-1").first == "0");
  CHECK(at("1e9") == std::make_pair(std::string("2"), std::string("0.2")));
  CHECK(at("0.2").first == "2");
  auto bad = client->Get("/api/shots/600/WG-VIS/frame_at?t=soon");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  bad = client->Get("/api/shots/600/WG-VIS/frame_at");
  REQUIRE(bad);
  CHECK(bad->status == 400);
}

TEST_CASE_FIXTURE(Fixture, "sampled frame listing") {
  ingest(store, dir / "in", 700, 97);
  serve();
  const auto body = get_json("/api/shots/700/WK-IR/frames?stride=10", 200);
  const auto& frames = body.at("frames");
  REQUIRE(frames.size() == 10);
  const auto times = store.timestamps(700, CameraId::wk_ir);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    CHECK(frames[k].at("index") == k * 10);
    CHECK(frames[k].at("time_s").get<double>() == times[k * 10]);
  }
  CHECK(body.at("stride") == 10);
  CHECK(body.at("frame_count") == 97);
  CHECK(get_json("/api/shots/700/WK-IR/frames?stride=1", 200).at("frames").size() == 97);
  CHECK(get_json("/api/shots/700/WK-IR/frames", 200).at("frames").size() == 97);
  get_json("/api/shots/700/WK-IR/frames?stride=0", 400);
  get_json("/api/shots/700/WK-IR/frames?stride=1.5", 400);
}

TEST_CASE_FIXTURE(Fixture, "video download") {
  ingest(store, dir / "in", 800, 97);
  ingest(store, dir / "in", 801, 4, CameraId::wk_ir, false);
  serve();
  auto res = client->Get("/api/shots/800/WK-IR/video");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "video/x-msvideo");
  CHECK(res->get_header_value("Accept-Ranges") == "bytes");
  const std::vector<std::uint8_t> bytes(res->body.begin(), res->body.end());
  CHECK(video::parse_avi_header(bytes).frame_count == 97);
  const auto facts = testing::walk_avi(bytes);
  REQUIRE(facts);
  CHECK(facts->total_frames == 97);

  res = client->Get("/api/shots/800/WK-IR/video", {{"Range", "bytes=0-11"}});
  REQUIRE(res);
  CHECK(res->status == 206);
  CHECK(res->body.size() == 12);
  CHECK(res->body.substr(0, 4) == "RIFF");
  CHECK(res->body.substr(8, 4) == "AVI ");

  res = client->Get("/api/shots/800/WK-IR/video", {{"Range", "bytes=1000-1003"}});
  REQUIRE(res);
  CHECK(res->status == 206);
  CHECK(res->body == std::string(bytes.begin() + 1000, bytes.begin() + 1004));

  CHECK(get_json("/api/shots/801/WK-IR", 200).at("has_video") == false);
  res = client->Get("/api/shots/801/WK-IR/video");
  REQUIRE(res);
  CHECK(res->status == 404);
}

TEST_CASE_FIXTURE(Fixture, "health reports a missing store") {
  serve();
  CHECK(get_json("/api/health", 200).at("status") == "ok");
  fs::remove_all(dir / "store");
  CHECK(get_json("/api/health", 503).at("status") == "unavailable");
}

TEST_CASE_FIXTURE(Fixture, "cors") {
  ingest(store, dir / "in", 900, 2);
  serve("http://localhost:5173");
  auto res = client->Get("/api/shots");
  REQUIRE(res);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  CHECK(res->get_header_value("Access-Control-Expose-Headers").find("X-Frame-Time") != std::string::npos);
  res = client->Options("/api/shots/900/WK-IR/video");
  REQUIRE(res);
  CHECK(res->status == 204);
}

TEST_CASE("server startup errors") {
  TempDir dir;
  try {
    api::VodServer s({dir / "missing", "127.0.0.1", 0, {}});
    FAIL("served a missing store");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::path_unwritable);
  }
  { auto st = store::FrameStore::open(dir / "store", true); }
  api::VodServer first({dir / "store", "127.0.0.1", 0, {}});
  try {
    api::VodServer second({dir / "store", "127.0.0.1", first.port(), {}});
    FAIL("bound twice");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bind_failure);
  }
}
