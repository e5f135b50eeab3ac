#include "shotvod/storage_daemon.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "shotvod/acquisition.hpp"
#include "shotvod/error.hpp"
#include "shotvod/image_io.hpp"
#include "shotvod/mapped_file.hpp"
#include "shotvod/video_synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace shotvod::daemon {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double wall_seconds() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
}

json shot_fields(const ShotMessage& msg) {
  return {{"shot_id", msg.shot_id}, {"camera", to_string(msg.camera)}};
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

EventSink stderr_event_sink() {
  auto mu = std::make_shared<std::mutex>();
  return [mu](const json& event) {
    std::lock_guard lock(*mu);
    std::cerr << event.dump() << '\n';
  };
}

// ---------------------------------------------------------------------------
// ShotQueue

ShotQueue::ShotQueue(std::size_t capacity) : capacity_(capacity) {}

ShotQueue::PushResult ShotQueue::push(const ShotMessage& msg) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return PushResult::closed;
    if (pending_keys_.contains(msg.key())) return PushResult::coalesced;
    if (pending_.size() >= capacity_) return PushResult::full;
    pending_.push_back(msg);
    pending_keys_.insert(msg.key());
  }
  cv_.notify_one();
  return PushResult::enqueued;
}

std::optional<ShotMessage> ShotQueue::take_locked() {
  if (pending_.empty()) return std::nullopt;
  ShotMessage msg = pending_.front();
  pending_.pop_front();
  pending_keys_.erase(msg.key());
  return msg;
}

std::optional<ShotMessage> ShotQueue::pop() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return closed_ || !pending_.empty(); });
  return take_locked();
}

std::optional<ShotMessage> ShotQueue::pop_for(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || !pending_.empty(); });
  return take_locked();
}

void ShotQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::size_t ShotQueue::size() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

// ---------------------------------------------------------------------------
// Ingest

json IngestReport::to_json() const {
  return {{"shot_id", shot_id},
          {"camera", to_string(camera)},
          {"frames_ingested", frames_ingested},
          {"bytes_read", bytes_read},
          {"segments_written", segments_written},
          {"video_bytes", video_bytes},
          {"elapsed_s", elapsed_s},
          {"phases", {{"read_s", read_s}, {"store_s", store_s}, {"synth_s", synth_s},
                      {"finalize_s", finalize_s}}}};
}

std::vector<double> read_times_file(const fs::path& dir) {
  const fs::path path = dir / "times.txt";
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(Errc::missing_times_file, path.string() + " not found");
  }
  const MappedFile file(path);
  const auto b = file.bytes();
  const std::string_view text(reinterpret_cast<const char*>(b.data()), b.size());

  std::vector<double> times;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto t = parse_seconds(line);
    if (!t) {
      throw Error(Errc::corrupt_frame,
                  path.string() + " line " + std::to_string(line_no) + " is not a number");
    }
    times.push_back(*t);
    pos = nl + 1;
  }
  return times;
}

std::uint64_t count_frame_files(const fs::path& dir) {
  std::error_code ec;
  std::uint64_t count = 0;
  std::uint64_t max_index = 0;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    const std::string name = it->path().filename().string();
    if (name.size() != 16 || !name.starts_with("frame_") || !name.ends_with(".pgm")) continue;
    std::uint64_t index = 0;
    auto [p, err] = std::from_chars(name.data() + 6, name.data() + 12, index);
    if (err != std::errc{} || p != name.data() + 12) continue;
    ++count;
    max_index = std::max(max_index, index);
  }
  if (count > 0 && max_index + 1 != count) {
    throw Error(Errc::frame_count_mismatch, dir.string() + " has " + std::to_string(count) +
                                                " frame files but highest index " +
                                                std::to_string(max_index));
  }
  return count;
}

FrameImage read_frame_file(const fs::path& path, std::uint64_t* bytes_read) {
  const MappedFile file(path);
  if (bytes_read) *bytes_read += file.size();
  try {
    return decode_pgm(file.bytes());
  } catch (const Error& e) {
    throw Error(Errc::corrupt_frame, path.string() + ": " + e.what());
  }
}

IngestReport ingest_shot(store::FrameStore& store, const ShotMessage& msg,
                         const IngestOptions& options, const EventSink& events) {
  const auto start = Clock::now();
  IngestReport report;
  report.shot_id = msg.shot_id;
  report.camera = msg.camera;
  const std::size_t segment_size = std::max<std::size_t>(1, options.segment_size);
  const fs::path dir = acq::incoming_shot_dir(options.incoming_dir, msg.shot_id, msg.camera);

  store::ShotWriter writer = store.create_shot(msg.shot_id, msg.camera, options.overwrite);
  const fs::path video_tmp = writer.dir() / "video.avi.tmp";
  try {
    auto phase = Clock::now();
    const std::vector<double> times = read_times_file(dir);
    report.bytes_read += fs::file_size(dir / "times.txt");
    const std::uint64_t n = count_frame_files(dir);
    if (n == 0 || n != times.size()) {
      throw Error(Errc::frame_count_mismatch, std::to_string(n) + " frame files, " +
                                                  std::to_string(times.size()) + " timestamps");
    }
    report.read_s += seconds_since(phase);

    std::optional<std::ofstream> video_file;
    std::optional<video::AviWriter> avi;
    if (options.synthesize_video) {
      video_file.emplace(video_tmp, std::ios::binary | std::ios::trunc);
      if (!*video_file) throw Error(Errc::io_failure, "create " + video_tmp.string());
      avi.emplace(*video_file, video::nominal_fps(n, times.back() - times.front()));
    }

    std::vector<FrameImage> chunk;
    chunk.reserve(std::min<std::uint64_t>(segment_size, n));
    for (std::uint64_t begin = 0; begin < n; begin += segment_size) {
      const std::uint64_t end = std::min<std::uint64_t>(begin + segment_size, n);
      chunk.clear();
      phase = Clock::now();
      for (std::uint64_t i = begin; i < end; ++i) {
        chunk.push_back(read_frame_file(dir / acq::frame_file_name(i), &report.bytes_read));
      }
      report.read_s += seconds_since(phase);

      phase = Clock::now();
      const std::span<const double> seg_times(times.data() + begin, end - begin);
      const std::size_t seg = writer.append_segment(chunk, seg_times);
      report.store_s += seconds_since(phase);
      if (events) {
        json e = shot_fields(msg);
        e["event"] = "segment";
        e["segment"] = seg;
        e["frames"] = end - begin;
        e["t_begin"] = seg_times.front();
        e["t_end"] = seg_times.back();
        events(e);
      }

      if (avi) {
        phase = Clock::now();
        for (const auto& f : chunk) avi->add_frame(f);
        report.synth_s += seconds_since(phase);
      }
    }
    report.frames_ingested = writer.frame_count();
    report.segments_written = writer.segments_written();

    if (avi) {
      phase = Clock::now();
      avi->finish();
      video_file->close();
      if (!*video_file) throw Error(Errc::io_failure, "write " + video_tmp.string());
      const fs::path video_path = writer.dir() / "video.avi";
      fs::rename(video_tmp, video_path);
      report.video_bytes = fs::file_size(video_path);
      if (!options.post_encode_cmd.empty()) {
        const fs::path encoded = writer.dir() / "video.encoded";
        const std::string cmd = options.post_encode_cmd + " " + shell_quote(video_path.string()) +
                                " " + shell_quote(encoded.string());
        const int rc = std::system(cmd.c_str());
        if (events) {
          json e = shot_fields(msg);
          e["event"] = "post_encode";
          e["exit_code"] = rc;
          events(e);
        }
      }
      report.synth_s += seconds_since(phase);
    }

    phase = Clock::now();
    writer.finalize(report.bytes_read);
    report.finalize_s = seconds_since(phase);
  } catch (...) {
    std::error_code ec;
    fs::remove(video_tmp, ec);
    if (writer.active()) writer.mark_failed();
    throw;
  }

  if (options.delete_incoming) {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  report.elapsed_s = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// Daemon

Daemon::Daemon(DaemonConfig config)
    : config_(std::move(config)),
      store_(store::FrameStore::open(config_.store_root, true, store::OpenMode::read_write)),
      listener_(net::listen_tcp(config_.listen.host, config_.listen.port)),
      port_(net::local_port(listener_)),
      queue_(std::max<std::size_t>(1, config_.queue_capacity)) {}

Daemon::~Daemon() { stop(); }

void Daemon::emit(json event) const {
  if (!config_.events) return;
  event["ts"] = wall_seconds();
  config_.events(event);
}

void Daemon::start() {
  if (listener_thread_.joinable()) return;
  stopping_ = false;
  emit({{"event", "listening"}, {"port", port_}, {"store", config_.store_root.string()}});
  ingest_thread_ = std::thread([this] { ingest_loop(); });
  listener_thread_ = std::thread([this] { listen_loop(); });
}

void Daemon::stop() {
  stopping_ = true;
  if (listener_thread_.joinable()) listener_thread_.join();
  queue_.close();
  if (ingest_thread_.joinable()) ingest_thread_.join();
  while (auto msg = queue_.pop_for(std::chrono::milliseconds(0))) {
    json e = shot_fields(*msg);
    e["event"] = "dropped";
    emit(e);
  }
}

QueueStatus Daemon::queue_status() const {
  std::lock_guard lock(status_mu_);
  return {queue_.size(), current_};
}

void Daemon::listen_loop() {
  while (!stopping_) {
    net::Socket client = net::accept_for(listener_, std::chrono::milliseconds(100));
    if (!client) continue;
    handle_client(std::move(client));
  }
}

void Daemon::handle_client(net::Socket client) {
  std::optional<std::string> line;
  try {
    line = net::recv_line(client, protocol::kMaxLineLength, config_.client_timeout);
  } catch (const std::exception& e) {
    emit({{"event", "rejected"}, {"reason", e.what()}});
    return;
  }
  if (!line) return;  // peer went away

  ShotMessage msg;
  try {
    msg = protocol::decode_shot_msg(*line);
  } catch (const Error& e) {
    emit({{"event", "rejected"}, {"reason", e.what()}});
    return;
  }

  const auto result = queue_.push(msg);
  const bool accepted = result == ShotQueue::PushResult::enqueued ||
                        result == ShotQueue::PushResult::coalesced;
  json e = shot_fields(msg);
  e["event"] = "received";
  e["accepted"] = accepted;
  e["coalesced"] = result == ShotQueue::PushResult::coalesced;
  emit(e);
  try {
    net::send_all(client, protocol::encode_ack({msg.shot_id, accepted}), config_.client_timeout);
  } catch (const std::exception&) {
    // The client disconnected before reading its ack; the queue entry stands.
  }
}

void Daemon::ingest_loop() {
  while (!stopping_) {
    auto msg = queue_.pop_for(std::chrono::milliseconds(100));
    if (!msg) continue;
    {
      std::lock_guard lock(status_mu_);
      current_ = msg;
    }
    if (config_.before_ingest) config_.before_ingest(*msg);

    json started = shot_fields(*msg);
    started["event"] = "started";
    emit(started);
    try {
      const IngestReport report =
          ingest_shot(store_, *msg, config_.ingest, [this](const json& e) { emit(e); });
      json done = report.to_json();
      done["event"] = "completed";
      emit(done);
      ++completed_;
    } catch (const std::exception& ex) {
      json fail = shot_fields(*msg);
      fail["event"] = "failed";
      fail["error"] = ex.what();
      if (const auto* err = dynamic_cast<const Error*>(&ex)) fail["code"] = to_string(err->code());
      emit(fail);
      ++failed_;
    }
    std::lock_guard lock(status_mu_);
    current_.reset();
  }
}

int run_daemon(DaemonConfig config, const std::atomic<bool>& stop_requested) {
  Daemon daemon(std::move(config));
  daemon.start();
  while (!stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  daemon.stop();
  return 0;
}

}  // namespace shotvod::daemon
