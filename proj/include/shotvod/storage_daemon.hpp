#pragma once

// The storage side of the pipeline. A listener thread accepts shot
// notifications into a bounded FIFO; a single ingest thread drains it, reading
// the staged frames and times, writing segments, synthesizing the video and
// finalizing the catalog record.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include "shotvod/frame_store.hpp"
#include "shotvod/net.hpp"
#include "shotvod/shot_protocol.hpp"

namespace shotvod::daemon {

using protocol::ShotMessage;

/// Receives one JSON object per pipeline event.
using EventSink = std::function<void(const nlohmann::json&)>;

/// Writes events as JSON lines to stderr.
EventSink stderr_event_sink();

/// Bounded FIFO of pending notifications, safe for concurrent producers and
/// consumers. A (shot, camera) pending twice is coalesced.
class ShotQueue {
 public:
  enum class PushResult { enqueued, coalesced, full, closed };

  explicit ShotQueue(std::size_t capacity);

  PushResult push(const ShotMessage& msg);

  /// Blocks until an entry is available or the queue is closed and empty.
  std::optional<ShotMessage> pop();

  /// Like pop() but gives up after `timeout`.
  std::optional<ShotMessage> pop_for(std::chrono::milliseconds timeout);

  /// Wakes blocked consumers; later pushes return `closed`.
  void close();

  std::size_t size() const;
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::optional<ShotMessage> take_locked();

  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<ShotMessage> pending_;
  std::set<ShotKey> pending_keys_;
  bool closed_ = false;
};

struct IngestOptions {
  std::filesystem::path incoming_dir;
  std::size_t segment_size = store::kDefaultSegmentSize;
  bool synthesize_video = true;
  bool overwrite = false;
  bool delete_incoming = false;
  /// Run as `<cmd> <video.avi> <output>` after synthesis; failures are logged only.
  std::string post_encode_cmd;
};

struct IngestReport {
  ShotId shot_id = 0;
  CameraId camera = CameraId::wk_ir;
  std::uint64_t frames_ingested = 0;
  std::uint64_t bytes_read = 0;
  std::size_t segments_written = 0;
  std::uint64_t video_bytes = 0;
  double elapsed_s = 0.0;
  // Per-phase breakdown of elapsed_s.
  double read_s = 0.0;
  double store_s = 0.0;
  double synth_s = 0.0;
  double finalize_s = 0.0;

  nlohmann::json to_json() const;
};

/// Times in times.txt of `dir`, in file order. Errors: MissingTimesFile,
/// CorruptFrame (unparseable line).
std::vector<double> read_times_file(const std::filesystem::path& dir);

/// Number of contiguous frame_%06d.pgm files starting at index 0, or
/// FrameCountMismatch if the sequence has gaps.
std::uint64_t count_frame_files(const std::filesystem::path& dir);

/// Maps and decodes one staged frame. Errors: IoFailure, CorruptFrame.
FrameImage read_frame_file(const std::filesystem::path& path, std::uint64_t* bytes_read = nullptr);

/// Ingests one staged shot into `store`. On any failure after the record is
/// created the record is journaled as failed and the error rethrown.
/// Errors: MissingTimesFile, FrameCountMismatch, CorruptFrame, DuplicateShot,
/// TimeOrderViolation, DimensionMismatch, IoFailure.
IngestReport ingest_shot(store::FrameStore& store, const ShotMessage& msg,
                         const IngestOptions& options, const EventSink& events = {});

struct DaemonConfig {
  std::filesystem::path store_root;
  protocol::Endpoint listen{"0.0.0.0", protocol::kDefaultDaemonPort};
  std::size_t queue_capacity = 128;
  IngestOptions ingest;
  EventSink events;
  std::chrono::milliseconds client_timeout{2000};
  /// Called on the ingest thread before each shot is processed.
  std::function<void(const ShotMessage&)> before_ingest;
};

struct QueueStatus {
  std::size_t pending = 0;
  std::optional<ShotMessage> current;
};

/// Listener + ingester pair. Construction opens the store (writer lock) and
/// binds the listen socket; start() launches both threads.
class Daemon {
 public:
  /// Errors: BindFailure, StoreLocked, PathUnwritable, CatalogCorrupt.
  explicit Daemon(DaemonConfig config);
  ~Daemon();
  Daemon(const Daemon&) = delete;
  Daemon& operator=(const Daemon&) = delete;

  void start();

  /// Stops accepting, lets the in-flight ingest finish, and joins both threads.
  /// Shots still queued are logged as dropped.
  void stop();

  std::uint16_t port() const noexcept { return port_; }
  QueueStatus queue_status() const;
  store::FrameStore& store() noexcept { return store_; }

  std::uint64_t completed() const noexcept { return completed_.load(); }
  std::uint64_t failed() const noexcept { return failed_.load(); }

 private:
  void listen_loop();
  void ingest_loop();
  void handle_client(net::Socket client);
  void emit(nlohmann::json event) const;

  DaemonConfig config_;
  store::FrameStore store_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
  ShotQueue queue_;

  mutable std::mutex status_mu_;
  std::optional<ShotMessage> current_;

  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> completed_{0};
  std::atomic<std::uint64_t> failed_{0};
  std::thread listener_thread_;
  std::thread ingest_thread_;
};

/// Runs a daemon until `stop_requested` becomes true (polled), then shuts down
/// cleanly. Returns the process exit code.
int run_daemon(DaemonConfig config, const std::atomic<bool>& stop_requested);

}  // namespace shotvod::daemon
