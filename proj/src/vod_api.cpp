#include "shotvod/vod_api.hpp"

#include <httplib.h>

#include <charconv>
#include <fstream>
#include <optional>
#include <thread>

#include "shotvod/error.hpp"
#include "shotvod/frame_store.hpp"
#include "shotvod/image_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace shotvod::api {

namespace {

constexpr const char* kShotPath = R"(/api/shots/(\d+)/([A-Za-z-]+))";

template <typename T>
std::optional<T> parse_uint(const std::string& text) {
  if (text.empty()) return std::nullopt;
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

void send_json(httplib::Response& res, int status, json body) {
  body["schema_version"] = kSchemaVersion;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, json extra = {}) {
  json body = extra.is_object() ? std::move(extra) : json::object();
  body["error"] = message;
  send_json(res, status, std::move(body));
}

int http_status_for(Errc code) {
  switch (code) {
    case Errc::unknown_shot: return 404;
    case Errc::index_out_of_range: return 416;
    case Errc::invalid_stride:
    case Errc::usage_error: return 400;
    default: return 500;
  }
}

void send_frame(httplib::Response& res, std::size_t index, const store::StoredFrame& frame) {
  const auto bmp = encode_bmp(frame.image);
  res.status = 200;
  res.set_header("X-Frame-Index", std::to_string(index));
  res.set_header("X-Frame-Time", format_seconds(frame.time_s));
  res.set_header("Cache-Control", "public, max-age=3600");
  res.set_content(reinterpret_cast<const char*>(bmp.data()), bmp.size(), "image/bmp");
}

}  // namespace

json shot_summary(const ShotRecord& r, bool has_video) {
  return {{"shot_id", r.shot_id},         {"camera_id", to_string(r.camera)},
          {"length_s", r.length_s},       {"frame_count", r.frame_count},
          {"size_bytes", r.size_bytes},   {"has_video", has_video},
          {"width", r.width},             {"height", r.height}};
}

struct VodServer::Impl {
  ServerConfig config;
  store::FrameStore store;
  httplib::Server server;
  int port = 0;
  std::thread thread;

  explicit Impl(ServerConfig cfg)
      : config(std::move(cfg)),
        store(store::FrameStore::open(config.store_root, false, store::OpenMode::read_only)) {
    routes();
    // SO_REUSEADDR only: the library default also sets SO_REUSEPORT, which
    // would let a second server silently share the port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    port = config.port == 0 ? server.bind_to_any_port(config.host)
                            : (server.bind_to_port(config.host, config.port) ? config.port : -1);
    if (port <= 0) {
      throw Error(Errc::bind_failure, "cannot listen on " + config.host + ":" +
                                          std::to_string(config.port));
    }
  }

  bool has_video(const ShotRecord& r) const {
    std::error_code ec;
    return fs::is_regular_file(store.video_path(r.shot_id, r.camera), ec);
  }

  // Resolves {id}/{camera} to a complete record or writes the error response.
  std::optional<ShotRecord> complete_shot(const httplib::Request& req, httplib::Response& res) const {
    const auto id = parse_uint<ShotId>(req.matches[1].str());
    const auto camera = parse_camera(req.matches[2].str());
    if (!id || !camera) {
      send_error(res, 404, "unknown shot");
      return std::nullopt;
    }
    const auto record = store.find(*id, *camera);
    if (!record) {
      send_error(res, 404, "unknown shot");
      return std::nullopt;
    }
    if (record->status != ShotStatus::complete) {
      send_error(res, 404, "shot not complete", {{"status", to_string(record->status)}});
      return std::nullopt;
    }
    return record;
  }

  void routes() {
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                    std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const Error& e) {
        send_error(res, http_status_for(e.code()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    });

    if (!config.cors_origin.empty()) {
      server.set_post_routing_handler([origin = config.cors_origin](const httplib::Request&,
                                                                    httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Expose-Headers",
                       "X-Frame-Index, X-Frame-Time, Content-Range, Content-Length");
        res.set_header("Vary", "Origin");
      });
      server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Range");
      });
    }

    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      std::error_code ec;
      const json base{{"store_path", config.store_root.string()}};
      if (!fs::is_directory(config.store_root, ec)) {
        json body = base;
        body["status"] = "unavailable";
        send_json(res, 503, body);
        return;
      }
      try {
        std::size_t complete = 0;
        for (const auto& r : store.list_shots()) complete += r.status == ShotStatus::complete;
        json body = base;
        body["status"] = "ok";
        body["shots"] = complete;
        send_json(res, 200, body);
      } catch (const std::exception& e) {
        json body = base;
        body["status"] = "unavailable";
        body["error"] = e.what();
        send_json(res, 503, body);
      }
    });

    server.Get("/api/shots", [this](const httplib::Request& req, httplib::Response& res) {
      store::ShotFilter filter;
      std::size_t limit = kDefaultListLimit;
      if (req.has_param("from")) {
        filter.from = parse_uint<ShotId>(req.get_param_value("from"));
        if (!filter.from) return send_error(res, 400, "from must be a non-negative integer");
      }
      if (req.has_param("to")) {
        filter.to = parse_uint<ShotId>(req.get_param_value("to"));
        if (!filter.to) return send_error(res, 400, "to must be a non-negative integer");
      }
      if (req.has_param("camera") && !req.get_param_value("camera").empty()) {
        filter.camera = parse_camera(req.get_param_value("camera"));
        if (!filter.camera) return send_error(res, 400, "unknown camera");
      }
      if (req.has_param("limit")) {
        const auto l = parse_uint<std::size_t>(req.get_param_value("limit"));
        if (!l) return send_error(res, 400, "limit must be a non-negative integer");
        limit = *l;
      }
      json shots = json::array();
      for (const auto& r : store.list_shots(filter)) {
        if (shots.size() >= limit) break;
        if (r.status != ShotStatus::complete) continue;
        shots.push_back(shot_summary(r, has_video(r)));
      }
      send_json(res, 200, {{"shots", shots}});
    });

    server.Get(kShotPath, [this](const httplib::Request& req, httplib::Response& res) {
      const auto r = complete_shot(req, res);
      if (!r) return;
      send_json(res, 200, shot_summary(*r, has_video(*r)));
    });

    server.Get(std::string(kShotPath) + "/frames",
               [this](const httplib::Request& req, httplib::Response& res) {
                 const auto r = complete_shot(req, res);
                 if (!r) return;
                 std::size_t stride = 1;
                 if (req.has_param("stride")) {
                   const auto s = parse_uint<std::size_t>(req.get_param_value("stride"));
                   if (!s || *s < 1) return send_error(res, 400, "stride must be an integer >= 1");
                   stride = *s;
                 }
                 const auto indices = store.sampled_indices(r->shot_id, r->camera, stride);
                 const auto times = store.timestamps(r->shot_id, r->camera);
                 json frames = json::array();
                 for (std::size_t i : indices) frames.push_back({{"index", i}, {"time_s", times[i]}});
                 send_json(res, 200,
                           {{"shot_id", r->shot_id}, {"camera_id", to_string(r->camera)},
                            {"stride", stride}, {"frame_count", r->frame_count}, {"frames", frames}});
               });

    server.Get(std::string(kShotPath) + R"(/frames/(\d+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 const auto r = complete_shot(req, res);
                 if (!r) return;
                 const auto index = parse_uint<std::size_t>(req.matches[3].str());
                 if (!index || *index >= r->frame_count) {
                   return send_error(res, 416, "frame index out of range",
                                     {{"frame_count", r->frame_count}});
                 }
                 send_frame(res, *index, store.get_frame(r->shot_id, r->camera, *index));
               });

    server.Get(std::string(kShotPath) + "/frame_at",
               [this](const httplib::Request& req, httplib::Response& res) {
                 const auto r = complete_shot(req, res);
                 if (!r) return;
                 const auto t = parse_seconds(req.get_param_value("t"));
                 if (!t) return send_error(res, 400, "t must be decimal seconds");
                 const auto at = store.frame_at_time(r->shot_id, r->camera, *t);
                 send_frame(res, at.index, store.get_frame(r->shot_id, r->camera, at.index));
               });

    server.Get(std::string(kShotPath) + "/video",
               [this](const httplib::Request& req, httplib::Response& res) {
                 const auto r = complete_shot(req, res);
                 if (!r) return;
                 const fs::path path = store.video_path(r->shot_id, r->camera);
                 std::error_code ec;
                 const auto size = fs::file_size(path, ec);
                 if (ec) return send_error(res, 404, "no video for this shot");
                 auto file = std::make_shared<std::ifstream>(path, std::ios::binary);
                 if (!*file) return send_error(res, 404, "no video for this shot");
                 res.set_header("Accept-Ranges", "bytes");
                 res.set_header("Content-Disposition",
                                "inline; filename=\"" + std::to_string(r->shot_id) + "_" +
                                    std::string(to_string(r->camera)) + ".avi\"");
                 // Status stays unset so the server applies Range and answers 206.
                 res.set_content_provider(
                     static_cast<std::size_t>(size), "video/x-msvideo",
                     [file](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
                       std::vector<char> buf(std::min<std::size_t>(length, 1 << 16));
                       file->clear();
                       file->seekg(static_cast<std::streamoff>(offset));
                       file->read(buf.data(), static_cast<std::streamsize>(buf.size()));
                       const auto got = static_cast<std::size_t>(file->gcount());
                       if (got == 0) return false;
                       return sink.write(buf.data(), got);
                     });
               });
  }
};

VodServer::VodServer(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

VodServer::~VodServer() { stop(); }

std::uint16_t VodServer::port() const noexcept { return static_cast<std::uint16_t>(impl_->port); }

void VodServer::start() {
  if (impl_->thread.joinable()) return;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void VodServer::run() { impl_->server.listen_after_bind(); }

void VodServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace shotvod::api
