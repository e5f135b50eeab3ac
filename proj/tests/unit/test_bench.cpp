#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <sstream>

#include "../support.hpp"
#include "shotvod/bench.hpp"
#include "shotvod/error.hpp"
#include "shotvod/frame_store.hpp"

using namespace shotvod;
using namespace shotvod::bench;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::uintmax_t> file_sizes(const fs::path& dir) {
  std::map<std::string, std::uintmax_t> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = e.file_size();
  }
  return out;
}

}  // namespace

TEST_CASE("old path writes one file per frame plus the timestamp file") {
  TempDir dir;
  const auto w = prepare_workload(find_profile(77212), dir / "work");
  const auto run = run_old_path(w, dir / "old");
  CHECK(run.files_written == 98);
  const auto files = file_sizes(dir / "old");
  CHECK(files.count("times.xml") == 1);
  CHECK(files.count("frame_000096.pgm") == 1);
  CHECK(run.elapsed_s > 0);

  const auto lines = testing::read_lines(dir / "old" / "times.xml");
  CHECK(lines.at(2).find("index=\"0\" t=\"0.000000\"") != std::string::npos);
  CHECK(lines.size() == 97 + 3);

  // deterministic rerun
  const auto again = run_old_path(w, dir / "old");
  CHECK(again.bytes_written == run.bytes_written);
  CHECK(file_sizes(dir / "old") == files);
}

TEST_CASE("single-frame workload") {
  TempDir dir;
  const ReferenceProfile tiny{1, 0.04, 0.0002, 1, 0.0, 0.0};
  const auto w = prepare_workload(tiny, dir / "work");
  CHECK(w.manifest.frame_count == 1);
  CHECK(run_old_path(w, dir / "old").files_written == 2);
  CHECK(run_new_path(w, dir / "new").elapsed_s > 0);
}

TEST_CASE("new path ingests into a fresh store") {
  TempDir dir;
  const auto w = prepare_workload(find_profile(77213), dir / "work");
  const auto first = run_new_path(w, dir / "new");
  {
    auto s = store::FrameStore::open(dir / "new", false, store::OpenMode::read_only);
    CHECK(s.frame_count(77213, CameraId::wk_ir) == 1198);
    CHECK_FALSE(fs::exists(s.video_path(77213, CameraId::wk_ir)));
  }
  const auto second = run_new_path(w, dir / "new");
  CHECK(first.bytes_written == second.bytes_written);
}

TEST_CASE("segment size does not change stored content") {
  TempDir dir;
  const auto w = prepare_workload(find_profile(77212), dir / "work");
  run_new_path(w, dir / "s16", 16);
  run_new_path(w, dir / "s64", 64);
  auto a = store::FrameStore::open(dir / "s16", false, store::OpenMode::read_only);
  auto b = store::FrameStore::open(dir / "s64", false, store::OpenMode::read_only);
  CHECK(a.find(77212, CameraId::wk_ir)->segments == 7);
  CHECK(b.find(77212, CameraId::wk_ir)->segments == 2);
  CHECK(a.timestamps(77212, CameraId::wk_ir) == b.timestamps(77212, CameraId::wk_ir));
  for (std::size_t i = 0; i < 97; ++i) {
    REQUIRE(a.get_frame(77212, CameraId::wk_ir, i).image == b.get_frame(77212, CameraId::wk_ir, i).image);
  }
}

TEST_CASE("synthesis flag writes the video on both paths") {
  TempDir dir;
  const auto w = prepare_workload(find_profile(77212), dir / "work");
  CHECK(run_old_path(w, dir / "old", true).files_written == 99);
  run_new_path(w, dir / "new", 64, true);
  CHECK(fs::exists(dir / "new" / "77212" / "WK-IR" / "video.avi"));
}

TEST_CASE("median") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({5.0, 1.0, 3.0}) == 3.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(median({}) == 0.0);
}

TEST_CASE("comparison and csv") {
  TempDir dir;
  CHECK_THROWS_AS(run_comparison({}, {dir.path()}), Error);

  const std::vector<ReferenceProfile> picked{find_profile(77212)};
  BenchOptions opt;
  opt.workdir = dir / "bench";
  opt.repetitions = 1;
  const auto results = run_comparison(picked, opt);
  REQUIRE(results.size() == 1);
  const auto& r = results[0];
  CHECK(r.old_runs.size() == 1);
  CHECK(r.old_elapsed_s == r.old_runs[0]);
  CHECK(r.new_elapsed_s == r.new_runs[0]);
  CHECK(r.ratio == doctest::Approx(r.old_elapsed_s / r.new_elapsed_s));
  CHECK(r.payload_bytes > 1020000);
  CHECK_FALSE(fs::exists(dir / "bench" / "77212"));

  std::ostringstream csv;
  write_csv(csv, results);
  std::istringstream in(csv.str());
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "shot_no,frames,bytes,old_s,new_s,ratio,paper_old_s,paper_new_s");
  CHECK(row.starts_with("77212,97," + std::to_string(r.payload_bytes) + ","));
  CHECK(row.ends_with(",7.9735,1.0145"));
  CHECK_FALSE(std::getline(in, extra));
}
