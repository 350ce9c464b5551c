#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crispbench/benchmark.hpp"
#include "crispbench/report_json.hpp"

namespace crispbench::cli {

namespace fs = std::filesystem;

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitMissingFiles = 2;
inline constexpr int kExitEntryFailed = 3;

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string id;
  fs::path pred;
  std::vector<fs::path> gt;
};

/// Line-oriented JSON: one object per line. Entry lines carry
/// {"id", "pred", "gt": [...]}; an optional line without "id" carries
/// metadata {"dataset": name, "dims": "strict"}. Relative paths are resolved
/// against the manifest's directory.
struct DatasetManifest {
  std::string dataset;
  std::string dims_policy = "strict";
  std::vector<ManifestEntry> entries;

  /// Every referenced path that does not exist, in manifest order.
  std::vector<fs::path> missing_files() const;
};

DatasetManifest parse_manifest(std::istream& in, const fs::path& base_dir);
DatasetManifest load_manifest(const fs::path& path);
void write_manifest(std::ostream& out, const DatasetManifest& manifest);

/// --jobs when given (> 0), else CRISPBENCH_JOBS, else hardware concurrency.
int resolve_jobs(std::optional<int> flag);

struct EvalOptions {
  fs::path manifest;
  BenchmarkConfig config;
  fs::path out;                    // JSON report
  std::optional<fs::path> csv;     // PR curve; defaults to <out>.csv
  std::optional<int> jobs;
};

struct SweepOptions {
  EvalOptions eval;
  std::vector<double> factors{1.0, 0.5, 0.25};
  std::optional<fs::path> compare_manifest;  // second detector for gap analysis
};

struct ConsensusOptions {
  fs::path gt_dir;  // one sub-directory of annotator maps per image id
  int min_positive = 3;
  fs::path out_dir;
};

struct FuseOptions {
  std::vector<fs::path> scale_dirs;  // same order as scales
  std::vector<double> scales{0.5, 1.0, 2.0};
  std::optional<fs::path> reference_dir;  // original-resolution images, if no 1.0 scale
  fs::path out_dir;
};

struct NetDemoOptions {
  int levels = 3;
  std::uint64_t seed = 0;
  int base_size = 8;
  std::optional<fs::path> dump_dir;
  bool dump_params = false;
};

// Each command logs progress and errors to `log` and returns an exit code.
int cmd_eval(const EvalOptions& opts, std::ostream& log);
int cmd_sweep(const SweepOptions& opts, std::ostream& log);
int cmd_consensus(const ConsensusOptions& opts, std::ostream& log);
int cmd_fuse(const FuseOptions& opts, std::ostream& log);
int cmd_net_demo(const NetDemoOptions& opts, std::ostream& out, std::ostream& log);

/// Copy of a report with the "timing" block removed, for comparisons.
Json without_timing(Json report);

}  // namespace crispbench::cli
