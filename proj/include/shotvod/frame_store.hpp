#pragma once

// Append-only, hierarchical frame storage.
//
// Layout under the store root:
//
//   catalog.jsonl                      one JSON record per line, last entry per
//                                      (shot_id, camera) wins
//   .writer.lock                       flock()ed by the single writer
//   <shot_id>/<camera>/seg_00000.fseg  FSEG1 segments, numbered from 0
//   <shot_id>/<camera>/video.avi       synthesized container (optional)
//
// FSEG1 segment file, all integers little-endian:
//
//   "FSEG1" | u32 width | u32 height | u32 frame_count
//   | frame_count x f64 timestamp | frame_count x (width*height) raw bytes

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "shotvod/types.hpp"

namespace shotvod::store {

inline constexpr std::size_t kDefaultSegmentSize = 64;
inline constexpr char kSegmentMagic[] = "FSEG1";
inline constexpr std::size_t kSegmentHeaderSize = 5 + 3 * 4;

enum class OpenMode { read_only, read_write };

struct ShotFilter {
  std::optional<ShotId> from;  // inclusive
  std::optional<ShotId> to;    // inclusive
  std::optional<CameraId> camera;
};

struct StoredFrame {
  FrameImage image;
  double time_s = 0.0;
};

struct FrameAt {
  std::size_t index = 0;
  double time_s = 0.0;
};

struct SegmentHeader {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t frame_count = 0;
};

/// Serializes one segment in FSEG1 layout. Frames must share dimensions.
std::vector<std::uint8_t> encode_segment(std::span<const FrameImage> frames,
                                         std::span<const double> times);

/// Validates magic and sizes against `file_size`. Throws Errc::io_failure.
SegmentHeader decode_segment_header(std::span<const std::uint8_t> bytes, std::uint64_t file_size);

namespace detail {
struct StoreState;
}

class ShotWriter;

/// Shared handle to an opened store. Copies refer to the same store and may be
/// used concurrently for reads.
class FrameStore {
 public:
  /// Opens (and optionally creates) the store at `root`. In read_write mode the
  /// writer lock is taken for the lifetime of the last handle copy.
  /// Errors: PathUnwritable, CatalogCorrupt, StoreLocked.
  static FrameStore open(const std::filesystem::path& root, bool create_if_missing,
                         OpenMode mode = OpenMode::read_write);

  /// Starts (or restarts) ingestion of one shot/camera. Non-complete records
  /// are truncated and restarted; a complete record needs `overwrite`.
  /// Errors: DuplicateShot, UsageError (read-only handle or writer already active).
  ShotWriter create_shot(ShotId shot_id, CameraId camera, bool overwrite = false);

  /// Errors: UnknownShot.
  std::uint64_t frame_count(ShotId shot_id, CameraId camera) const;

  /// Errors: UnknownShot, IndexOutOfRange.
  StoredFrame get_frame(ShotId shot_id, CameraId camera, std::size_t index) const;

  /// Greatest index whose time is <= t, clamped to [0, frame_count-1].
  /// Errors: UnknownShot (also for shots without frames).
  FrameAt frame_at_time(ShotId shot_id, CameraId camera, double t) const;

  /// [0, stride, 2*stride, ...) below frame_count. Errors: UnknownShot, InvalidStride.
  std::vector<std::size_t> sampled_indices(ShotId shot_id, CameraId camera,
                                           std::size_t stride) const;

  /// Full timestamp index of the shot. Errors: UnknownShot.
  std::vector<double> timestamps(ShotId shot_id, CameraId camera) const;

  /// Records sorted by shot_id descending, then camera; filters are conjunctive.
  std::vector<ShotRecord> list_shots(const ShotFilter& filter = {}) const;

  std::optional<ShotRecord> find(ShotId shot_id, CameraId camera) const;

  const std::filesystem::path& root() const noexcept;
  std::filesystem::path shot_dir(ShotId shot_id, CameraId camera) const;
  std::filesystem::path video_path(ShotId shot_id, CameraId camera) const;
  OpenMode mode() const noexcept;

  /// Pulls in journal lines appended by other handles or processes. Read
  /// operations call this implicitly.
  void refresh() const;

 private:
  explicit FrameStore(std::shared_ptr<detail::StoreState> state);
  std::shared_ptr<detail::StoreState> state_;
};

/// Appends segments for one (shot, camera). Consumed by finalize() or
/// mark_failed(); any later call throws UsageError.
class ShotWriter {
 public:
  ShotWriter(ShotWriter&&) noexcept;
  ShotWriter& operator=(ShotWriter&&) noexcept;
  ShotWriter(const ShotWriter&) = delete;
  ShotWriter& operator=(const ShotWriter&) = delete;
  ~ShotWriter();

  /// Persists one segment and returns its index (0, 1, ...).
  /// Errors: TimeOrderViolation, DimensionMismatch, IoFailure, UsageError.
  std::size_t append_segment(std::span<const FrameImage> frames, std::span<const double> times);

  /// Flushes segments, marks the record complete, and journals it durably.
  /// Errors: EmptyShot, UsageError, IoFailure.
  ShotRecord finalize(std::uint64_t total_size_bytes);

  /// Journals status=failed. Never leaves a complete record behind.
  void mark_failed();

  std::uint64_t frame_count() const noexcept;
  std::size_t segments_written() const noexcept;
  std::filesystem::path dir() const;
  bool active() const noexcept;

 private:
  friend class FrameStore;
  struct Impl;
  explicit ShotWriter(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace shotvod::store
