// Simulated acquisition: stage a shot's frames in the incoming directory and
// notify the storage daemon.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <json.hpp>

#include "shotvod/acquisition.hpp"
#include "shotvod/error.hpp"

using namespace shotvod;

namespace {

nlohmann::json manifest_json(const acq::ShotManifest& m) {
  nlohmann::json j{{"shot_id", m.shot_id},       {"camera_id", to_string(m.camera)},
                   {"frame_count", m.frame_count}, {"width", m.width},
                   {"height", m.height},         {"fps", m.fps},
                   {"dir", m.dir.string()},      {"total_bytes", m.total_bytes}};
  if (m.ack) j["ack"] = m.ack->accepted ? "ACK" : "NAK";
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stage simulated camera shots and notify the storage daemon"};
  app.require_subcommand(1);

  acq::AcqConfig cfg;
  std::string camera = "WK-IR";
  std::string daemon;
  ShotId shot = 0;
  ShotId profile = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--incoming", cfg.incoming_dir, "Incoming directory")->required();
    sub->add_option("--camera", camera, "Camera id")->capture_default_str();
    sub->add_option("--daemon", daemon, "Storage daemon HOST:PORT (omit to skip notification)");
    sub->add_option("--width", cfg.width)->capture_default_str();
    sub->add_option("--height", cfg.height)->capture_default_str();
  };

  auto* produce = app.add_subcommand("produce", "Generate a synthetic shot");
  add_common(produce);
  produce->add_option("--shot", shot, "Shot number")->required();
  produce->add_option("--fps", cfg.fps)->capture_default_str();
  produce->add_option("--duration", cfg.duration_s, "Seconds")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Reproduce a reference shot");
  add_common(replay);
  replay->add_option("--profile", profile, "Reference shot number")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cam = parse_camera(camera);
    if (!cam) throw Error(Errc::usage_error, "unknown camera " + camera);
    cfg.camera = *cam;
    if (!daemon.empty()) cfg.daemon = protocol::Endpoint::parse(daemon);

    const acq::ShotManifest m =
        produce->parsed() ? acq::produce_shot(cfg, shot) : acq::replay_profile(cfg, profile);
    std::cout << manifest_json(m).dump() << '\n';
    if (m.ack && !m.ack->accepted) {
      std::fprintf(stderr, "acq: daemon refused shot %llu\n",
                   static_cast<unsigned long long>(m.shot_id));
      return 3;
    }
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "acq: %s\n", e.what());
    return e.code() == Errc::usage_error ? 2 : 1;
  }
}
