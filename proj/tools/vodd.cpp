// Storage daemon: receives shot notifications and ingests the staged frames.

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <cstdio>

#include "shotvod/error.hpp"
#include "shotvod/storage_daemon.hpp"

using namespace shotvod;

namespace {
std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shot storage daemon"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Listen for notifications and ingest shots");

  daemon::DaemonConfig cfg;
  std::string listen = ":9000";
  bool no_video = false;
  run->add_option("--store", cfg.store_root, "Store root")->required();
  run->add_option("--incoming", cfg.ingest.incoming_dir, "Incoming directory")->required();
  run->add_option("--listen", listen, "[HOST]:PORT")->capture_default_str();
  run->add_option("--segment-size", cfg.ingest.segment_size, "Frames per segment")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_option("--queue-cap", cfg.queue_capacity, "Pending notification limit")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_flag("--overwrite", cfg.ingest.overwrite, "Replace complete shots on re-notification");
  run->add_flag("--delete-incoming", cfg.ingest.delete_incoming,
                "Remove staged files after a successful ingest");
  run->add_option("--post-encode", cfg.ingest.post_encode_cmd,
                  "Command run as CMD <video.avi> <output>");
  run->add_flag("--no-video", no_video, "Skip video synthesis");

  CLI11_PARSE(app, argc, argv);
  cfg.ingest.synthesize_video = !no_video;
  cfg.events = daemon::stderr_event_sink();

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::signal(SIGPIPE, SIG_IGN);

  try {
    cfg.listen = protocol::Endpoint::parse(listen, "0.0.0.0");
    return daemon::run_daemon(std::move(cfg), g_stop);
  } catch (const Error& e) {
    std::fprintf(stderr, "vodd: %s\n", e.what());
    return e.code() == Errc::usage_error ? 2 : 1;
  }
}
