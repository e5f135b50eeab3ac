#include "shotvod/bench.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <optional>

#include "shotvod/error.hpp"
#include "shotvod/frame_store.hpp"
#include "shotvod/image_io.hpp"
#include "shotvod/storage_daemon.hpp"
#include "shotvod/video_synth.hpp"

namespace fs = std::filesystem;

namespace shotvod::bench {

namespace {

using Clock = std::chrono::steady_clock;

void write_file(const fs::path& path, std::span<const std::uint8_t> data) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(Errc::io_failure, "create " + path.string() + ": " + std::strerror(errno));
  const auto* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw Error(Errc::io_failure, "write " + path.string() + ": " + std::strerror(err));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  ::close(fd);
}

void fsync_file(const fs::path& path, bool directory = false) {
  const int fd = ::open(path.c_str(), (directory ? O_RDONLY | O_DIRECTORY : O_RDONLY) | O_CLOEXEC);
  if (fd < 0) throw Error(Errc::io_failure, "open " + path.string() + ": " + std::strerror(errno));
  ::fsync(fd);
  ::close(fd);
}

std::uint64_t tree_bytes(const fs::path& root, std::uint64_t* files = nullptr) {
  std::uint64_t total = 0;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(root, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file(ec) && it->path().filename() != ".writer.lock") {
      total += it->file_size(ec);
      if (files) ++*files;
    }
  }
  return total;
}

void reset_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_failure, "create " + dir.string() + ": " + ec.message());
}

}  // namespace

Workload prepare_workload(const ReferenceProfile& profile, const fs::path& workdir) {
  Workload w;
  w.profile = profile;
  w.incoming_dir = workdir / "incoming";
  acq::AcqConfig cfg;
  cfg.incoming_dir = w.incoming_dir;
  w.manifest = acq::replay_profile(cfg, profile);
  return w;
}

PathRun run_old_path(const Workload& workload, const fs::path& out_dir, bool include_synth) {
  reset_dir(out_dir);
  PathRun run;
  const auto& m = workload.manifest;
  std::vector<fs::path> written;
  written.reserve(m.frame_count + 2);

  const auto start = Clock::now();
  const std::vector<double> times = daemon::read_times_file(m.dir);
  std::optional<std::ofstream> video_file;
  std::optional<video::AviWriter> avi;
  if (include_synth) {
    written.push_back(out_dir / "video.avi");
    video_file.emplace(written.back(), std::ios::binary | std::ios::trunc);
    avi.emplace(*video_file, video::nominal_fps(times.size(), times.back() - times.front()));
  }
  for (std::uint64_t i = 0; i < m.frame_count; ++i) {
    const FrameImage frame = daemon::read_frame_file(m.dir / acq::frame_file_name(i));
    const auto pgm = encode_pgm(frame);
    written.push_back(out_dir / acq::frame_file_name(i));
    write_file(written.back(), pgm);
    if (avi) avi->add_frame(frame);
  }
  if (avi) {
    avi->finish();
    video_file->close();
  }

  std::string xml = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<frames>\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    xml += "  <frame index=\"" + std::to_string(i) + "\" t=\"" + acq::format_time_line(times[i]) +
           "\"/>\n";
  }
  xml += "</frames>\n";
  written.push_back(out_dir / "times.xml");
  write_file(written.back(), {reinterpret_cast<const std::uint8_t*>(xml.data()), xml.size()});

  for (const auto& f : written) fsync_file(f);
  fsync_file(out_dir, true);
  run.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  run.bytes_written = tree_bytes(out_dir, &run.files_written);
  return run;
}

PathRun run_new_path(const Workload& workload, const fs::path& store_dir, std::size_t segment_size,
                     bool include_synth) {
  reset_dir(store_dir);
  PathRun run;
  daemon::IngestOptions options;
  options.incoming_dir = workload.incoming_dir;
  options.segment_size = segment_size;
  options.synthesize_video = include_synth;

  const auto start = Clock::now();
  {
    auto store = store::FrameStore::open(store_dir, true);
    daemon::ingest_shot(store, {workload.manifest.shot_id, workload.manifest.camera}, options);
  }
  run.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  run.bytes_written = tree_bytes(store_dir, &run.files_written);
  return run;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<BenchResult> run_comparison(std::span<const ReferenceProfile> profiles,
                                        const BenchOptions& options) {
  if (profiles.empty()) throw Error(Errc::usage_error, "no profiles selected");
  const std::size_t reps = std::max<std::size_t>(1, options.repetitions);
  std::vector<BenchResult> results;
  for (const auto& profile : profiles) {
    const fs::path work = options.workdir / std::to_string(profile.shot_no);
    reset_dir(work);
    const Workload workload = prepare_workload(profile, work);
    const fs::path old_dir = work / "old";
    const fs::path new_dir = work / "new";

    if (options.warmup) {
      run_old_path(workload, old_dir, options.include_synth);
      run_new_path(workload, new_dir, options.segment_size, options.include_synth);
    }
    BenchResult r;
    r.profile = profile;
    r.payload_bytes = workload.manifest.total_bytes;
    for (std::size_t i = 0; i < reps; ++i) {
      r.old_runs.push_back(run_old_path(workload, old_dir, options.include_synth).elapsed_s);
      const PathRun fresh = run_new_path(workload, new_dir, options.segment_size, options.include_synth);
      r.new_runs.push_back(fresh.elapsed_s);
      r.bytes_written = fresh.bytes_written;
    }
    r.old_elapsed_s = median(r.old_runs);
    r.new_elapsed_s = median(r.new_runs);
    r.ratio = r.new_elapsed_s > 0 ? r.old_elapsed_s / r.new_elapsed_s : 0.0;
    results.push_back(std::move(r));

    std::error_code ec;
    fs::remove_all(work, ec);
  }
  return results;
}

void write_csv(std::ostream& out, std::span<const BenchResult> results) {
  out << "shot_no,frames,bytes,old_s,new_s,ratio,paper_old_s,paper_new_s\n";
  char line[256];
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%llu,%llu,%llu,%.6f,%.6f,%.4f,%.4f,%.4f\n",
                  static_cast<unsigned long long>(r.profile.shot_no),
                  static_cast<unsigned long long>(r.profile.frames),
                  static_cast<unsigned long long>(r.payload_bytes), r.old_elapsed_s,
                  r.new_elapsed_s, r.ratio, r.profile.old_time_s, r.profile.new_time_s);
    out << line;
  }
}

}  // namespace shotvod::bench
