#pragma once

// Storage-path comparison on the reference shot workloads.
//
// Both paths consume the same staged incoming shot (frame files + times.txt):
//   old path  one PGM file per frame plus times.xml, every file fsynced at the end
//   new path  ingest_shot into a fresh segmented store (segments fsynced at finalize)
// Video synthesis is off for both unless requested.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "shotvod/acquisition.hpp"
#include "shotvod/profiles.hpp"

namespace shotvod::bench {

struct Workload {
  ReferenceProfile profile;
  std::filesystem::path incoming_dir;  // root passed to the ingest pipeline
  acq::ShotManifest manifest;
};

/// Stages the profile's payload once under `workdir`. Errors: IoFailure, UsageError.
Workload prepare_workload(const ReferenceProfile& profile, const std::filesystem::path& workdir);

struct PathRun {
  double elapsed_s = 0.0;
  std::uint64_t bytes_written = 0;
  std::uint64_t files_written = 0;
};

/// Writes into `out_dir` (created fresh). Errors: IoFailure.
PathRun run_old_path(const Workload& workload, const std::filesystem::path& out_dir,
                     bool include_synth = false);

/// Ingests into a fresh store at `store_dir`. Errors: IoFailure and ingest errors.
PathRun run_new_path(const Workload& workload, const std::filesystem::path& store_dir,
                     std::size_t segment_size = 64, bool include_synth = false);

struct BenchOptions {
  std::filesystem::path workdir;
  std::size_t repetitions = 3;
  bool warmup = true;
  bool include_synth = false;
  std::size_t segment_size = 64;
};

struct BenchResult {
  ReferenceProfile profile;
  std::uint64_t payload_bytes = 0;
  double old_elapsed_s = 0.0;  // median
  double new_elapsed_s = 0.0;  // median
  double ratio = 0.0;          // old / new
  std::uint64_t bytes_written = 0;
  std::vector<double> old_runs;
  std::vector<double> new_runs;
};

double median(std::vector<double> values);

/// Runs both paths `repetitions` times per profile, strictly sequentially,
/// after one discarded warm-up run of each. Errors: UsageError (no profiles).
std::vector<BenchResult> run_comparison(std::span<const ReferenceProfile> profiles,
                                        const BenchOptions& options);

/// Header "shot_no,frames,bytes,old_s,new_s,ratio,paper_old_s,paper_new_s" then
/// one row per result.
void write_csv(std::ostream& out, std::span<const BenchResult> results);

}  // namespace shotvod::bench
