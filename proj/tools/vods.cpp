// Read-only HTTP server over a frame store.

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <thread>

#include "shotvod/error.hpp"
#include "shotvod/shot_protocol.hpp"
#include "shotvod/vod_api.hpp"

using namespace shotvod;

namespace {
std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shot video-on-demand server"};
  app.require_subcommand(1);
  auto* serve = app.add_subcommand("serve", "Serve the store over HTTP");

  api::ServerConfig cfg;
  std::string listen = ":8080";
  serve->add_option("--store", cfg.store_root, "Store root")->required();
  serve->add_option("--listen", listen, "[HOST]:PORT")->capture_default_str();
  serve->add_option("--cors-origin", cfg.cors_origin, "Allowed browser origin");

  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::signal(SIGPIPE, SIG_IGN);

  try {
    const auto ep = protocol::Endpoint::parse(listen, "0.0.0.0");
    cfg.host = ep.host;
    cfg.port = ep.port;
    api::VodServer server(cfg);
    server.start();
    std::fprintf(stderr, "vods: serving %s on %s:%u\n", cfg.store_root.c_str(), cfg.host.c_str(),
                 static_cast<unsigned>(server.port()));
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "vods: %s\n", e.what());
    return e.code() == Errc::usage_error ? 2 : 1;
  }
}
