#pragma once

// Read-only HTTP interface over a frame store.
//
//   GET /api/health
//   GET /api/shots?from=&to=&camera=&limit=
//   GET /api/shots/{id}/{camera}
//   GET /api/shots/{id}/{camera}/frames?stride=k
//   GET /api/shots/{id}/{camera}/frames/{i}        BMP, X-Frame-Index, X-Frame-Time
//   GET /api/shots/{id}/{camera}/frame_at?t=       BMP, X-Frame-Index, X-Frame-Time
//   GET /api/shots/{id}/{camera}/video             AVI, byte ranges supported
//
// Only shots with status=complete are visible. JSON bodies carry
// "schema_version": "1".

#include <cstdint>
#include <filesystem>
#include <memory>
#include <json.hpp>
#include <string>

#include "shotvod/types.hpp"

namespace shotvod::api {

inline constexpr std::uint16_t kDefaultPort = 8080;
inline constexpr std::size_t kDefaultListLimit = 50;
inline constexpr const char* kSchemaVersion = "1";

struct ServerConfig {
  std::filesystem::path store_root;
  std::string host = "0.0.0.0";
  std::uint16_t port = kDefaultPort;  // 0 picks an ephemeral port
  std::string cors_origin;            // empty disables CORS headers
};

/// Wire form of a complete shot.
nlohmann::json shot_summary(const ShotRecord& record, bool has_video);

class VodServer {
 public:
  /// Opens the store read-only and binds the port.
  /// Errors: PathUnwritable, CatalogCorrupt, BindFailure.
  explicit VodServer(ServerConfig config);
  ~VodServer();
  VodServer(const VodServer&) = delete;
  VodServer& operator=(const VodServer&) = delete;

  std::uint16_t port() const noexcept;

  /// Serves on a background thread.
  void start();

  /// Serves on the calling thread until stop() is called from elsewhere.
  void run();

  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace shotvod::api
