// Old vs new storage path timings on the reference shot workloads.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "shotvod/bench.hpp"
#include "shotvod/error.hpp"

using namespace shotvod;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Compare per-file and segmented storage of reference shots"};
  std::string profiles = "all";
  fs::path out = "results.csv";
  bench::BenchOptions opts;
  opts.workdir = fs::temp_directory_path() / "vodbench";
  bool no_warmup = false;
  app.add_option("--profiles", profiles, "all or comma-separated shot numbers")
      ->capture_default_str();
  app.add_option("--reps", opts.repetitions, "Timed repetitions per path")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out, "CSV output")->capture_default_str();
  app.add_option("--workdir", opts.workdir, "Scratch directory")->capture_default_str();
  app.add_option("--segment-size", opts.segment_size)->capture_default_str();
  app.add_flag("--include-synth", opts.include_synth, "Also write the AVI on both paths");
  app.add_flag("--no-warmup", no_warmup, "Skip the discarded warm-up run");
  CLI11_PARSE(app, argc, argv);
  opts.warmup = !no_warmup;

  try {
    std::vector<ReferenceProfile> selected;
    if (profiles == "all") {
      const auto all = reference_profiles();
      selected.assign(all.begin(), all.end());
    } else {
      std::stringstream ss(profiles);
      for (std::string item; std::getline(ss, item, ',');) {
        try {
          selected.push_back(find_profile(std::stoull(item)));
        } catch (const std::logic_error&) {
          throw Error(Errc::usage_error, "bad profile '" + item + "'");
        }
      }
    }
    const auto results = bench::run_comparison(selected, opts);
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(Errc::io_failure, "cannot write " + out.string());
    bench::write_csv(file, results);
    bench::write_csv(std::cout, results);
    std::error_code ec;
    fs::remove_all(opts.workdir, ec);
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "vodbench: %s\n", e.what());
    return e.code() == Errc::usage_error || e.code() == Errc::unknown_profile ? 2 : 1;
  }
}
