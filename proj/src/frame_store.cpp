#include "shotvod/frame_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <limits>
#include <map>
#include <mutex>
#include <json.hpp>
#include <set>
#include <shared_mutex>
#include <string>

#include "shotvod/bytes.hpp"
#include "shotvod/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace shotvod::store {

namespace {

constexpr const char* kJournalName = "catalog.jsonl";
constexpr const char* kLockName = ".writer.lock";

std::string errno_text() { return std::strerror(errno); }

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

void write_all(int fd, const void* data, std::size_t size, const fs::path& what) {
  const auto* p = static_cast<const char*>(data);
  while (size > 0) {
    const ssize_t n = ::write(fd, p, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::io_failure, "write " + what.string() + ": " + errno_text());
    }
    p += n;
    size -= static_cast<std::size_t>(n);
  }
}

void read_exact(int fd, void* data, std::size_t size, std::uint64_t offset, const fs::path& what) {
  auto* p = static_cast<char*>(data);
  while (size > 0) {
    const ssize_t n = ::pread(fd, p, size, static_cast<off_t>(offset));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::io_failure, "read " + what.string() + ": " + errno_text());
    }
    if (n == 0) throw Error(Errc::io_failure, "unexpected end of " + what.string());
    p += n;
    size -= static_cast<std::size_t>(n);
    offset += static_cast<std::uint64_t>(n);
  }
}

void fsync_path(const fs::path& path, bool directory) {
  Fd fd(::open(path.c_str(), (directory ? O_RDONLY | O_DIRECTORY : O_RDONLY) | O_CLOEXEC));
  if (!fd) throw Error(Errc::io_failure, "open " + path.string() + ": " + errno_text());
  if (::fsync(fd.get()) != 0 && errno != EINVAL) {
    throw Error(Errc::io_failure, "fsync " + path.string() + ": " + errno_text());
  }
}

std::string segment_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seg_%05zu.fseg", index);
  return buf;
}

std::chrono::system_clock::time_point now_micros() {
  return std::chrono::time_point_cast<std::chrono::microseconds>(std::chrono::system_clock::now());
}

std::string format_iso8601(std::chrono::system_clock::time_point tp) {
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(tp.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(us / 1000000);
  long frac = static_cast<long>(us % 1000000);
  if (frac < 0) {
    frac += 1000000;
    --secs;
  }
  std::tm tm{};
  ::gmtime_r(&secs, &tm);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06ldZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
  return buf;
}

std::optional<std::chrono::system_clock::time_point> parse_iso8601(const std::string& text) {
  std::tm tm{};
  long frac = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%6ldZ%n", &tm.tm_year, &tm.tm_mon,
                  &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &frac, &consumed) != 7 ||
      static_cast<std::size_t>(consumed) != text.size()) {
    return std::nullopt;
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t secs = ::timegm(&tm);
  return std::chrono::system_clock::time_point{std::chrono::seconds{secs} +
                                               std::chrono::microseconds{frac}};
}

json record_to_json(const ShotRecord& r) {
  return json{{"shot_id", r.shot_id},
              {"camera", to_string(r.camera)},
              {"status", to_string(r.status)},
              {"frame_count", r.frame_count},
              {"length_s", r.length_s},
              {"size_bytes", r.size_bytes},
              {"width", r.width},
              {"height", r.height},
              {"segments", r.segments},
              {"created_at", format_iso8601(r.created_at)}};
}

ShotRecord record_from_json(const json& j) {
  ShotRecord r;
  r.shot_id = j.at("shot_id").get<ShotId>();
  auto camera = parse_camera(j.at("camera").get<std::string>());
  auto status = parse_status(j.at("status").get<std::string>());
  auto created = parse_iso8601(j.at("created_at").get<std::string>());
  if (!camera || !status || !created || r.shot_id == 0) {
    throw std::invalid_argument("bad camera, status, created_at or shot_id");
  }
  r.camera = *camera;
  r.status = *status;
  r.created_at = *created;
  r.frame_count = j.at("frame_count").get<std::uint64_t>();
  r.length_s = j.at("length_s").get<double>();
  r.size_bytes = j.at("size_bytes").get<std::uint64_t>();
  r.width = j.value("width", 0u);
  r.height = j.value("height", 0u);
  r.segments = j.value("segments", 0u);
  return r;
}

struct SegmentInfo {
  fs::path file;
  std::size_t first_index = 0;
  std::size_t count = 0;
  std::uint64_t pixel_offset = 0;
};

/// Read-side view of one shot's segments.
struct ShotIndex {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<SegmentInfo> segments;
  std::vector<double> times;
};

ShotIndex build_index(const fs::path& dir) {
  ShotIndex index;
  std::vector<std::pair<std::uint64_t, fs::path>> numbered;
  std::error_code ec;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    const auto name = it->path().filename().string();
    if (name.size() < 10 || !name.starts_with("seg_") || !name.ends_with(".fseg")) continue;
    std::uint64_t n = 0;
    const char* first = name.data() + 4;
    const char* last = name.data() + name.size() - 5;
    auto [ptr, err] = std::from_chars(first, last, n);
    if (err == std::errc{} && ptr == last) numbered.emplace_back(n, it->path());
  }
  std::sort(numbered.begin(), numbered.end());
  std::vector<fs::path> files;
  for (auto& [n, path] : numbered) files.push_back(std::move(path));
  for (const auto& file : files) {
    Fd fd(::open(file.c_str(), O_RDONLY | O_CLOEXEC));
    if (!fd) throw Error(Errc::io_failure, "open " + file.string() + ": " + errno_text());
    struct stat st {};
    ::fstat(fd.get(), &st);
    std::vector<std::uint8_t> head(kSegmentHeaderSize);
    read_exact(fd.get(), head.data(), head.size(), 0, file);
    const SegmentHeader h = decode_segment_header(head, static_cast<std::uint64_t>(st.st_size));
    if (index.segments.empty()) {
      index.width = h.width;
      index.height = h.height;
    } else if (h.width != index.width || h.height != index.height) {
      throw Error(Errc::dimension_mismatch, "segment " + file.string() + " changes dimensions");
    }
    std::vector<std::uint8_t> raw(std::size_t{h.frame_count} * 8);
    read_exact(fd.get(), raw.data(), raw.size(), kSegmentHeaderSize, file);
    for (std::size_t i = 0; i < h.frame_count; ++i) index.times.push_back(bytes::get_f64(raw, i * 8));
    index.segments.push_back({file, index.times.size() - h.frame_count, h.frame_count,
                              kSegmentHeaderSize + std::uint64_t{h.frame_count} * 8});
  }
  return index;
}

}  // namespace

std::vector<std::uint8_t> encode_segment(std::span<const FrameImage> frames,
                                         std::span<const double> times) {
  if (frames.empty() || frames.size() != times.size()) {
    throw Error(Errc::usage_error, "segment needs matching, non-empty frames and times");
  }
  const std::uint32_t w = frames.front().width();
  const std::uint32_t h = frames.front().height();
  const std::size_t frame_bytes = std::size_t{w} * h;
  std::vector<std::uint8_t> out;
  out.reserve(kSegmentHeaderSize + frames.size() * (8 + frame_bytes));
  out.insert(out.end(), kSegmentMagic, kSegmentMagic + 5);
  bytes::put_u32(out, w);
  bytes::put_u32(out, h);
  bytes::put_u32(out, static_cast<std::uint32_t>(frames.size()));
  for (double t : times) bytes::put_f64(out, t);
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h) {
      throw Error(Errc::dimension_mismatch, "frames within a segment must share dimensions");
    }
    out.insert(out.end(), f.pixels().begin(), f.pixels().end());
  }
  return out;
}

SegmentHeader decode_segment_header(std::span<const std::uint8_t> b, std::uint64_t file_size) {
  if (b.size() < kSegmentHeaderSize || std::memcmp(b.data(), kSegmentMagic, 5) != 0) {
    throw Error(Errc::io_failure, "not an FSEG1 segment");
  }
  SegmentHeader h{bytes::get_u32(b, 5), bytes::get_u32(b, 9), bytes::get_u32(b, 13)};
  const std::uint64_t expected =
      kSegmentHeaderSize + std::uint64_t{h.frame_count} * (8 + std::uint64_t{h.width} * h.height);
  if (h.width == 0 || h.height == 0 || h.frame_count == 0 || expected != file_size) {
    throw Error(Errc::io_failure, "FSEG1 header inconsistent with file size");
  }
  return h;
}

namespace detail {

struct StoreState {
  fs::path root;
  fs::path journal_path;
  OpenMode mode = OpenMode::read_only;
  Fd lock_fd;

  mutable std::shared_mutex mu;
  mutable std::map<ShotKey, ShotRecord> catalog;
  mutable std::map<ShotKey, std::uint64_t> generation;
  mutable std::uint64_t journal_offset = 0;
  std::set<ShotKey> active_writers;

  mutable std::mutex cache_mu;
  mutable std::map<ShotKey, std::pair<std::uint64_t, std::shared_ptr<const ShotIndex>>> cache;

  fs::path shot_dir(ShotKey key) const {
    return root / std::to_string(key.shot_id) / std::string(to_string(key.camera));
  }

  // Caller holds `mu` exclusively.
  void apply(const ShotRecord& r) const {
    catalog[r.key()] = r;
    ++generation[r.key()];
  }

  // Caller holds `mu` exclusively. Consumes complete lines past journal_offset.
  void load_new_lines() const {
    std::error_code ec;
    const auto size = fs::file_size(journal_path, ec);
    if (ec) {
      if (journal_offset != 0) {
        catalog.clear();
        journal_offset = 0;
      }
      return;
    }
    if (size < journal_offset) {
      catalog.clear();
      journal_offset = 0;
    }
    if (size == journal_offset) return;

    Fd fd(::open(journal_path.c_str(), O_RDONLY | O_CLOEXEC));
    if (!fd) throw Error(Errc::io_failure, "open " + journal_path.string() + ": " + errno_text());
    std::string chunk(size - journal_offset, '\0');
    read_exact(fd.get(), chunk.data(), chunk.size(), journal_offset, journal_path);

    std::size_t pos = 0;
    std::uint64_t line_no = 0;
    for (;;) {
      const auto nl = chunk.find('\n', pos);
      if (nl == std::string::npos) break;  // an unterminated tail is a write in progress
      const std::string_view line(chunk.data() + pos, nl - pos);
      ++line_no;
      if (!line.empty()) {
        try {
          apply(record_from_json(json::parse(line)));
        } catch (const std::exception& e) {
          throw Error(Errc::catalog_corrupt, journal_path.string() + " entry " +
                                                 std::to_string(line_no) + ": " + e.what());
        }
      }
      pos = nl + 1;
    }
    journal_offset += pos;
  }

  // Caller holds `mu` exclusively and has consumed the journal.
  void journal(const ShotRecord& r, bool durable) {
    const std::string line = record_to_json(r).dump() + "\n";
    Fd fd(::open(journal_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
    if (!fd) throw Error(Errc::io_failure, "open " + journal_path.string() + ": " + errno_text());
    write_all(fd.get(), line.data(), line.size(), journal_path);
    if (durable && ::fsync(fd.get()) != 0) {
      throw Error(Errc::io_failure, "fsync " + journal_path.string() + ": " + errno_text());
    }
    journal_offset += line.size();
    apply(r);
  }

  void refresh() const {
    {
      std::shared_lock lock(mu);
      std::error_code ec;
      const auto size = fs::file_size(journal_path, ec);
      if (!ec && size == journal_offset) return;
      if (ec && journal_offset == 0) return;
    }
    std::unique_lock lock(mu);
    load_new_lines();
  }

  ShotRecord record(ShotKey key) const {
    refresh();
    std::shared_lock lock(mu);
    auto it = catalog.find(key);
    if (it == catalog.end()) {
      throw Error(Errc::unknown_shot, "shot " + std::to_string(key.shot_id) + " camera " +
                                          std::string(to_string(key.camera)));
    }
    return it->second;
  }

  std::shared_ptr<const ShotIndex> index(ShotKey key) const {
    const ShotRecord r = record(key);
    std::uint64_t gen;
    {
      std::shared_lock lock(mu);
      gen = generation.at(key);
    }
    if (r.status == ShotStatus::complete) {
      std::lock_guard lock(cache_mu);
      auto it = cache.find(key);
      if (it != cache.end() && it->second.first == gen) return it->second.second;
    }
    auto built = std::make_shared<const ShotIndex>(build_index(shot_dir(key)));
    if (r.status == ShotStatus::complete) {
      if (built->times.size() != r.frame_count) {
        throw Error(Errc::io_failure, "segments of shot " + std::to_string(key.shot_id) +
                                          " hold " + std::to_string(built->times.size()) +
                                          " frames, catalog says " +
                                          std::to_string(r.frame_count));
      }
      std::lock_guard lock(cache_mu);
      cache[key] = {gen, built};
    }
    return built;
  }
};

}  // namespace detail

struct ShotWriter::Impl {
  std::shared_ptr<detail::StoreState> state;
  ShotRecord record;
  fs::path dir;
  std::vector<fs::path> segment_files;
  double first_time = 0.0;
  double last_time = 0.0;
  bool consumed = false;

  void require_active() const {
    if (consumed) throw Error(Errc::usage_error, "shot writer already finalized or failed");
  }

  void publish() {
    std::unique_lock lock(state->mu);
    state->catalog[record.key()] = record;
  }

  void release() {
    if (!state) return;
    {
      std::unique_lock lock(state->mu);
      state->active_writers.erase(record.key());
    }
    state.reset();
  }
};

// ---------------------------------------------------------------------------
// FrameStore

FrameStore::FrameStore(std::shared_ptr<detail::StoreState> state) : state_(std::move(state)) {}

FrameStore FrameStore::open(const fs::path& root, bool create_if_missing, OpenMode mode) {
  std::error_code ec;
  if (!fs::exists(root, ec)) {
    if (!create_if_missing) throw Error(Errc::path_unwritable, root.string() + " does not exist");
    fs::create_directories(root, ec);
    if (ec) throw Error(Errc::path_unwritable, "create " + root.string() + ": " + ec.message());
  }
  if (!fs::is_directory(root, ec)) {
    throw Error(Errc::path_unwritable, root.string() + " is not a directory");
  }

  auto state = std::make_shared<detail::StoreState>();
  state->root = root;
  state->journal_path = root / kJournalName;
  state->mode = mode;

  if (mode == OpenMode::read_write) {
    if (::access(root.c_str(), W_OK) != 0) {
      throw Error(Errc::path_unwritable, root.string() + " is not writable");
    }
    const fs::path lock_path = root / kLockName;
    Fd fd(::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644));
    if (!fd) throw Error(Errc::path_unwritable, "open " + lock_path.string() + ": " + errno_text());
    if (::flock(fd.get(), LOCK_EX | LOCK_NB) != 0) {
      if (errno == EWOULDBLOCK) throw Error(Errc::store_locked, root.string() + " has an active writer");
      throw Error(Errc::io_failure, "flock " + lock_path.string() + ": " + errno_text());
    }
    state->lock_fd = std::move(fd);
  }

  {
    std::unique_lock lock(state->mu);
    state->load_new_lines();
  }
  return FrameStore(std::move(state));
}

ShotWriter FrameStore::create_shot(ShotId shot_id, CameraId camera, bool overwrite) {
  if (state_->mode != OpenMode::read_write) {
    throw Error(Errc::usage_error, "store handle is read-only");
  }
  if (shot_id == 0) throw Error(Errc::usage_error, "shot id must be positive");
  const ShotKey key{shot_id, camera};

  std::unique_lock lock(state_->mu);
  state_->load_new_lines();
  if (state_->active_writers.contains(key)) {
    throw Error(Errc::usage_error, "a writer for this shot is already active");
  }
  if (auto it = state_->catalog.find(key);
      it != state_->catalog.end() && it->second.status == ShotStatus::complete && !overwrite) {
    throw Error(Errc::duplicate_shot, "shot " + std::to_string(shot_id) + " camera " +
                                          std::string(to_string(camera)) + " is already complete");
  }

  const fs::path dir = state_->shot_dir(key);
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_failure, "create " + dir.string() + ": " + ec.message());

  ShotRecord record;
  record.shot_id = shot_id;
  record.camera = camera;
  record.status = ShotStatus::ingesting;
  record.created_at = now_micros();
  state_->journal(record, false);
  state_->active_writers.insert(key);

  auto impl = std::make_unique<ShotWriter::Impl>();
  impl->state = state_;
  impl->record = record;
  impl->dir = dir;
  return ShotWriter(std::move(impl));
}

std::uint64_t FrameStore::frame_count(ShotId shot_id, CameraId camera) const {
  return state_->record({shot_id, camera}).frame_count;
}

StoredFrame FrameStore::get_frame(ShotId shot_id, CameraId camera, std::size_t index) const {
  const auto idx = state_->index({shot_id, camera});
  if (index >= idx->times.size()) {
    throw Error(Errc::index_out_of_range, "frame " + std::to_string(index) + " of " +
                                              std::to_string(idx->times.size()));
  }
  auto seg = std::upper_bound(idx->segments.begin(), idx->segments.end(), index,
                              [](std::size_t i, const SegmentInfo& s) { return i < s.first_index; });
  --seg;
  const std::size_t frame_bytes = std::size_t{idx->width} * idx->height;
  std::vector<std::uint8_t> data(frame_bytes);
  Fd fd(::open(seg->file.c_str(), O_RDONLY | O_CLOEXEC));
  if (!fd) throw Error(Errc::io_failure, "open " + seg->file.string() + ": " + errno_text());
  read_exact(fd.get(), data.data(), data.size(),
             seg->pixel_offset + (index - seg->first_index) * frame_bytes, seg->file);
  return {FrameImage(idx->width, idx->height, std::move(data)), idx->times[index]};
}

FrameAt FrameStore::frame_at_time(ShotId shot_id, CameraId camera, double t) const {
  if (std::isnan(t)) throw Error(Errc::usage_error, "time is NaN");
  const auto idx = state_->index({shot_id, camera});
  const auto& times = idx->times;
  if (times.empty()) {
    throw Error(Errc::unknown_shot, "shot " + std::to_string(shot_id) + " has no frames");
  }
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
  return {i, times[i]};
}

std::vector<std::size_t> FrameStore::sampled_indices(ShotId shot_id, CameraId camera,
                                                     std::size_t stride) const {
  const std::uint64_t n = frame_count(shot_id, camera);
  if (stride == 0) throw Error(Errc::invalid_stride, "stride must be at least 1");
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>((n + stride - 1) / stride));
  for (std::uint64_t i = 0; i < n; i += stride) out.push_back(static_cast<std::size_t>(i));
  return out;
}

std::vector<double> FrameStore::timestamps(ShotId shot_id, CameraId camera) const {
  return state_->index({shot_id, camera})->times;
}

std::vector<ShotRecord> FrameStore::list_shots(const ShotFilter& filter) const {
  state_->refresh();
  std::vector<ShotRecord> out;
  {
    std::shared_lock lock(state_->mu);
    for (const auto& [key, r] : state_->catalog) {
      if (filter.from && r.shot_id < *filter.from) continue;
      if (filter.to && r.shot_id > *filter.to) continue;
      if (filter.camera && r.camera != *filter.camera) continue;
      out.push_back(r);
    }
  }
  std::sort(out.begin(), out.end(), [](const ShotRecord& a, const ShotRecord& b) {
    if (a.shot_id != b.shot_id) return a.shot_id > b.shot_id;
    return a.camera < b.camera;
  });
  return out;
}

std::optional<ShotRecord> FrameStore::find(ShotId shot_id, CameraId camera) const {
  state_->refresh();
  std::shared_lock lock(state_->mu);
  auto it = state_->catalog.find({shot_id, camera});
  if (it == state_->catalog.end()) return std::nullopt;
  return it->second;
}

const fs::path& FrameStore::root() const noexcept { return state_->root; }

fs::path FrameStore::shot_dir(ShotId shot_id, CameraId camera) const {
  return state_->shot_dir({shot_id, camera});
}

fs::path FrameStore::video_path(ShotId shot_id, CameraId camera) const {
  return shot_dir(shot_id, camera) / "video.avi";
}

OpenMode FrameStore::mode() const noexcept { return state_->mode; }

void FrameStore::refresh() const { state_->refresh(); }

// ---------------------------------------------------------------------------
// ShotWriter

ShotWriter::ShotWriter(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
ShotWriter::ShotWriter(ShotWriter&&) noexcept = default;
ShotWriter& ShotWriter::operator=(ShotWriter&& other) noexcept {
  if (this != &other) {
    if (impl_) impl_->release();
    impl_ = std::move(other.impl_);
  }
  return *this;
}
ShotWriter::~ShotWriter() {
  if (impl_) impl_->release();
}

std::size_t ShotWriter::append_segment(std::span<const FrameImage> frames,
                                       std::span<const double> times) {
  if (!impl_) throw Error(Errc::usage_error, "moved-from shot writer");
  impl_->require_active();
  auto& rec = impl_->record;
  if (frames.empty() || frames.size() != times.size()) {
    throw Error(Errc::usage_error, "append_segment needs |frames| == |times| >= 1");
  }
  double prev = rec.frame_count > 0 ? impl_->last_time : -std::numeric_limits<double>::infinity();
  for (double t : times) {
    if (!std::isfinite(t) || t < prev) {
      throw Error(Errc::time_order_violation,
                  "timestamp " + format_seconds(t) + " after " + format_seconds(prev));
    }
    prev = t;
  }
  const std::uint32_t w = rec.frame_count > 0 ? rec.width : frames.front().width();
  const std::uint32_t h = rec.frame_count > 0 ? rec.height : frames.front().height();
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h) {
      throw Error(Errc::dimension_mismatch, "frame is " + std::to_string(f.width()) + "x" +
                                                std::to_string(f.height()) + ", shot is " +
                                                std::to_string(w) + "x" + std::to_string(h));
    }
  }

  const std::size_t seg_index = rec.segments;
  const fs::path file = impl_->dir / segment_name(seg_index);
  const auto payload = encode_segment(frames, times);
  {
    Fd fd(::open(file.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644));
    if (!fd) throw Error(Errc::io_failure, "create " + file.string() + ": " + errno_text());
    write_all(fd.get(), payload.data(), payload.size(), file);
  }
  impl_->segment_files.push_back(file);

  if (rec.frame_count == 0) impl_->first_time = times.front();
  impl_->last_time = times.back();
  rec.width = w;
  rec.height = h;
  rec.frame_count += frames.size();
  rec.segments += 1;
  rec.length_s = impl_->last_time - impl_->first_time;
  impl_->publish();
  return seg_index;
}

ShotRecord ShotWriter::finalize(std::uint64_t total_size_bytes) {
  if (!impl_) throw Error(Errc::usage_error, "moved-from shot writer");
  impl_->require_active();
  auto& rec = impl_->record;
  if (rec.frame_count == 0) throw Error(Errc::empty_shot, "no segments appended");
  for (const auto& f : impl_->segment_files) fsync_path(f, false);
  fsync_path(impl_->dir, true);

  rec.status = ShotStatus::complete;
  rec.size_bytes = total_size_bytes;
  {
    std::unique_lock lock(impl_->state->mu);
    impl_->state->load_new_lines();
    impl_->state->journal(rec, true);
  }
  impl_->consumed = true;
  impl_->release();
  return rec;
}

void ShotWriter::mark_failed() {
  if (!impl_) throw Error(Errc::usage_error, "moved-from shot writer");
  impl_->require_active();
  auto& rec = impl_->record;
  rec.status = ShotStatus::failed;
  {
    std::unique_lock lock(impl_->state->mu);
    impl_->state->load_new_lines();
    impl_->state->journal(rec, true);
  }
  impl_->consumed = true;
  impl_->release();
}

std::uint64_t ShotWriter::frame_count() const noexcept { return impl_ ? impl_->record.frame_count : 0; }
std::size_t ShotWriter::segments_written() const noexcept { return impl_ ? impl_->record.segments : 0; }
fs::path ShotWriter::dir() const { return impl_ ? impl_->dir : fs::path{}; }
bool ShotWriter::active() const noexcept { return impl_ && !impl_->consumed; }

}  // namespace shotvod::store
