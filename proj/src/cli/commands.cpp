#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "crispbench/cli.hpp"
#include "crispbench/crispnet.hpp"
#include "crispbench/image_io.hpp"
#include "crispbench/matching.hpp"
#include "crispbench/parallel.hpp"
#include "crispbench/pipeline.hpp"

namespace crispbench::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path default_csv(const fs::path& out) {
  fs::path csv = out;
  csv.replace_extension(".csv");
  return csv;
}

void report_missing(const std::vector<fs::path>& missing, std::ostream& log) {
  log << "error: " << missing.size() << " missing file(s):\n";
  for (const auto& p : missing) log << "  " << p.string() << '\n';
}

// Counts for one manifest entry at every requested tolerance factor.
struct EntryResult {
  bool ok = false;
  std::string error;
  int width = 0;
  int height = 0;
  std::vector<ThresholdCounts> per_factor;
};

EntryResult evaluate_entry(const ManifestEntry& entry, const BenchmarkConfig& cfg,
                           const std::vector<double>& factors) {
  EntryResult r;
  try {
    const EdgeProbabilityMap pred = load_gray(entry.pred);
    std::vector<BinaryBoundaryMap> maps;
    maps.reserve(entry.gt.size());
    for (const auto& g : entry.gt) {
      maps.push_back(load_binary(g));
      if (maps.back().width() != pred.width() || maps.back().height() != pred.height()) {
        throw DimensionError("ground truth " + g.filename().string() + " is " +
                             std::to_string(maps.back().width()) + "x" +
                             std::to_string(maps.back().height()) + ", prediction is " +
                             std::to_string(pred.width()) + "x" + std::to_string(pred.height()));
      }
    }
    const AnnotationSet gt(std::move(maps));
    r.width = pred.width();
    r.height = pred.height();
    for (double f : factors) {
      BenchmarkConfig scaled = cfg;
      scaled.d_fraction = cfg.d_fraction * f;
      r.per_factor.push_back(evaluate_image(pred, gt, scaled));
    }
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

std::vector<EntryResult> evaluate_manifest(const DatasetManifest& manifest,
                                           const BenchmarkConfig& cfg,
                                           const std::vector<double>& factors, int jobs) {
  std::vector<EntryResult> results(manifest.entries.size());
  parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
    results[i] = evaluate_entry(manifest.entries[i], cfg, factors);
  });
  return results;
}

Json failed_json(const DatasetManifest& manifest, const std::vector<EntryResult>& results,
                 std::ostream& log) {
  Json failed = Json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].ok) continue;
    log << "error: entry " << manifest.entries[i].id << ": " << results[i].error << '\n';
    Json f;
    f["id"] = manifest.entries[i].id;
    f["error"] = results[i].error;
    failed.push_back(std::move(f));
  }
  return failed;
}

bool any_failed(const std::vector<EntryResult>& results) {
  return std::any_of(results.begin(), results.end(), [](const auto& r) { return !r.ok; });
}

std::vector<ThresholdCounts> counts_for_factor(const std::vector<EntryResult>& results,
                                               std::size_t factor_index) {
  std::vector<ThresholdCounts> out;
  for (const auto& r : results) {
    if (r.ok) out.push_back(r.per_factor[factor_index]);
  }
  return out;
}

Json image_json(const ManifestEntry& entry, const EntryResult& r,
                const std::vector<double>& thresholds) {
  Json img;
  img["id"] = entry.id;
  img["width"] = r.width;
  img["height"] = r.height;
  Json table = Json::array();
  PRPoint best;
  best.f1 = -1.0;
  const ThresholdCounts& counts = r.per_factor.front();
  for (std::size_t t = 0; t < counts.size(); ++t) {
    const MatchCounts& c = counts[t];
    PRPoint p{thresholds[t], c.precision(), c.recall(), 0.0};
    p.f1 = f_measure(p.precision, p.recall);
    if (p.f1 > best.f1) best = p;
    Json row;
    row["threshold"] = p.threshold;
    row["sum_p"] = c.sum_p;
    row["cnt_p"] = c.cnt_p;
    row["sum_r"] = c.sum_r;
    row["cnt_r"] = c.cnt_r;
    table.push_back(std::move(row));
  }
  img["counts"] = std::move(table);
  img["best"] = to_json(best);
  return img;
}

Json timing_json(Clock::time_point start, int jobs) {
  Json t;
  t["wall_seconds"] = seconds_since(start);
  t["jobs"] = jobs;
  return t;
}

// Per-factor metrics over the successful entries, or nullopt if none succeeded.
std::optional<CrispnessSweep> sweep_from_results(const std::vector<EntryResult>& results,
                                                 const BenchmarkConfig& cfg,
                                                 const std::vector<double>& factors) {
  const auto first = std::find_if(results.begin(), results.end(), [](const auto& r) { return r.ok; });
  if (first == results.end()) return std::nullopt;
  const auto thresholds = cfg.thresholds();
  CrispnessSweep sweep;
  sweep.factors = factors;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    sweep.max_dist_px.push_back(
        max_dist_pixels(cfg.d_fraction * factors[f], first->width, first->height));
    sweep.reports.push_back(aggregate(counts_for_factor(results, f), thresholds));
  }
  return sweep;
}

std::string sweep_csv(const CrispnessSweep& sweep, double d_fraction) {
  std::ostringstream os;
  os << "factor,d_fraction,max_dist_px,ods,ois,ap\n";
  char buf[256];
  for (std::size_t i = 0; i < sweep.factors.size(); ++i) {
    const auto& m = sweep.reports[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", sweep.factors[i],
                  d_fraction * sweep.factors[i], sweep.max_dist_px[i], m.ods, m.ois, m.ap);
    os << buf;
  }
  return os.str();
}

}  // namespace

Json without_timing(Json report) {
  report.erase("timing");
  return report;
}

int cmd_eval(const EvalOptions& opts, std::ostream& log) {
  const auto start = Clock::now();
  opts.config.validate();
  const DatasetManifest manifest = load_manifest(opts.manifest);
  if (const auto missing = manifest.missing_files(); !missing.empty()) {
    report_missing(missing, log);
    return kExitMissingFiles;
  }
  const int jobs = resolve_jobs(opts.jobs);
  const auto thresholds = opts.config.thresholds();
  const auto results = evaluate_manifest(manifest, opts.config, {1.0}, jobs);

  Json report;
  report["config"] = to_json(opts.config);
  report["dataset"] = manifest.dataset;
  Json images = Json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].ok) images.push_back(image_json(manifest.entries[i], results[i], thresholds));
  }
  report["images"] = std::move(images);
  report["failed"] = failed_json(manifest, results, log);

  const auto ok_counts = counts_for_factor(results, 0);
  std::vector<PRPoint> curve;
  if (ok_counts.empty()) {
    report["metrics"] = nullptr;
  } else {
    const MetricsReport metrics = aggregate(ok_counts, thresholds);
    report["metrics"] = to_json(metrics);
    curve = metrics.curve;
    log << "ODS " << metrics.ods << "  OIS " << metrics.ois << "  AP " << metrics.ap << '\n';
  }
  report["timing"] = timing_json(start, jobs);
  write_json(opts.out, report);

  std::ostringstream csv;
  write_pr_csv(csv, curve);
  write_text(opts.csv.value_or(default_csv(opts.out)), csv.str());
  return any_failed(results) ? kExitEntryFailed : kExitOk;
}

int cmd_sweep(const SweepOptions& opts, std::ostream& log) {
  const auto start = Clock::now();
  const BenchmarkConfig& cfg = opts.eval.config;
  cfg.validate();
  if (opts.factors.empty()) throw std::invalid_argument("--factors must not be empty");
  for (double f : opts.factors) {
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("sweep factors must lie in (0, 1]");
  }
  const DatasetManifest manifest = load_manifest(opts.eval.manifest);
  std::optional<DatasetManifest> compare;
  if (opts.compare_manifest) compare = load_manifest(*opts.compare_manifest);
  auto missing = manifest.missing_files();
  if (compare) {
    const auto more = compare->missing_files();
    missing.insert(missing.end(), more.begin(), more.end());
  }
  if (!missing.empty()) {
    report_missing(missing, log);
    return kExitMissingFiles;
  }
  const int jobs = resolve_jobs(opts.eval.jobs);

  const auto results = evaluate_manifest(manifest, cfg, opts.factors, jobs);
  const auto sweep = sweep_from_results(results, cfg, opts.factors);
  bool failed = any_failed(results);

  Json report;
  report["config"] = to_json(cfg);
  report["dataset"] = manifest.dataset;
  report["failed"] = failed_json(manifest, results, log);
  report["sweep"] = sweep ? to_json(*sweep) : Json(nullptr);

  const fs::path csv_path = opts.eval.csv.value_or(default_csv(opts.eval.out));
  if (sweep) write_text(csv_path, sweep_csv(*sweep, cfg.d_fraction));

  if (compare) {
    const auto other = evaluate_manifest(*compare, cfg, opts.factors, jobs);
    const auto other_sweep = sweep_from_results(other, cfg, opts.factors);
    failed = failed || any_failed(other);
    Json c;
    c["dataset"] = compare->dataset;
    c["failed"] = failed_json(*compare, other, log);
    c["sweep"] = other_sweep ? to_json(*other_sweep) : Json(nullptr);
    report["compare"] = std::move(c);
    report["gaps"] = sweep && other_sweep ? to_json(sweep_gaps(*sweep, *other_sweep)) : Json(nullptr);
    if (other_sweep) {
      fs::path compare_csv = csv_path;
      compare_csv.replace_extension(".compare.csv");
      write_text(compare_csv, sweep_csv(*other_sweep, cfg.d_fraction));
    }
  }
  if (sweep) {
    for (std::size_t i = 0; i < sweep->factors.size(); ++i) {
      log << "factor " << sweep->factors[i] << "  ODS " << sweep->reports[i].ods << "  OIS "
          << sweep->reports[i].ois << "  AP " << sweep->reports[i].ap << '\n';
    }
  }
  report["timing"] = timing_json(start, jobs);
  write_json(opts.eval.out, report);
  return failed ? kExitEntryFailed : kExitOk;
}

namespace {

bool is_image_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".png" || ext == ".pgm";
}

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::optional<fs::path> find_image(const fs::path& dir, const std::string& id) {
  for (const char* ext : {".png", ".pgm"}) {
    fs::path p = dir / (id + ext);
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

}  // namespace

int cmd_consensus(const ConsensusOptions& opts, std::ostream& log) {
  if (opts.min_positive < 1) throw std::invalid_argument("--min-positive must be >= 1");
  if (!fs::is_directory(opts.gt_dir)) {
    log << "error: not a directory: " << opts.gt_dir.string() << '\n';
    return kExitMissingFiles;
  }
  std::vector<fs::path> ids;
  for (const auto& e : fs::directory_iterator(opts.gt_dir)) {
    if (e.is_directory()) ids.push_back(e.path());
  }
  std::sort(ids.begin(), ids.end());
  fs::create_directories(opts.out_dir);
  bool failed = false;
  for (const auto& dir : ids) {
    const std::string id = dir.filename().string();
    try {
      const auto files = sorted_images(dir);
      if (files.empty()) throw std::runtime_error("no annotation images");
      std::vector<BinaryBoundaryMap> maps;
      for (const auto& f : files) maps.push_back(load_binary(f));
      const LabelMap labels = consensus_labels(AnnotationSet(std::move(maps)), opts.min_positive);
      GrayImage img;
      img.width = labels.width();
      img.height = labels.height();
      img.max_value = 255;
      img.samples.reserve(labels.labels().size());
      for (Label l : labels.labels()) img.samples.push_back(encode_label(l));
      write_gray_image(opts.out_dir / (id + ".png"), img);
    } catch (const std::exception& e) {
      log << "error: " << id << ": " << e.what() << '\n';
      failed = true;
    }
  }
  log << "wrote consensus labels for " << ids.size() << " id(s)\n";
  return failed ? kExitEntryFailed : kExitOk;
}

int cmd_fuse(const FuseOptions& opts, std::ostream& log) {
  if (opts.scale_dirs.empty()) throw std::invalid_argument("fuse needs at least one scale directory");
  if (opts.scale_dirs.size() != opts.scales.size()) {
    throw std::invalid_argument("got " + std::to_string(opts.scale_dirs.size()) +
                                " directories for " + std::to_string(opts.scales.size()) +
                                " scales");
  }
  for (double s : opts.scales) {
    if (!(s > 0.0)) throw std::invalid_argument("scale factors must be > 0");
  }
  std::vector<fs::path> missing;
  for (const auto& d : opts.scale_dirs) {
    if (!fs::is_directory(d)) missing.push_back(d);
  }
  if (!missing.empty()) {
    report_missing(missing, log);
    return kExitMissingFiles;
  }
  std::set<std::string> ids;
  for (const auto& d : opts.scale_dirs) {
    for (const auto& f : sorted_images(d)) ids.insert(f.stem().string());
  }
  std::map<std::string, std::vector<fs::path>> inputs;
  for (const auto& id : ids) {
    for (const auto& d : opts.scale_dirs) {
      if (auto p = find_image(d, id)) {
        inputs[id].push_back(*p);
      } else {
        missing.push_back(d / (id + ".png"));
      }
    }
  }
  if (!missing.empty()) {
    report_missing(missing, log);
    return kExitMissingFiles;
  }
  const auto unit = std::find(opts.scales.begin(), opts.scales.end(), 1.0);
  fs::create_directories(opts.out_dir);
  bool failed = false;
  for (const auto& [id, paths] : inputs) {
    try {
      std::vector<EdgeProbabilityMap> maps;
      for (const auto& p : paths) maps.push_back(load_gray(p));
      int w = 0;
      int h = 0;
      if (unit != opts.scales.end()) {
        const auto& m = maps[static_cast<std::size_t>(unit - opts.scales.begin())];
        w = m.width();
        h = m.height();
      } else if (opts.reference_dir) {
        const auto ref = find_image(*opts.reference_dir, id);
        if (!ref) throw std::runtime_error("no reference image in " + opts.reference_dir->string());
        const GrayImage img = read_gray_image(*ref);
        w = img.width;
        h = img.height;
      } else {
        w = std::max(1, static_cast<int>(std::lround(maps.front().width() / opts.scales.front())));
        h = std::max(1, static_cast<int>(std::lround(maps.front().height() / opts.scales.front())));
      }
      save_gray(opts.out_dir / (id + ".png"), fuse_to_size(maps, w, h), 16);
    } catch (const std::exception& e) {
      log << "error: " << id << ": " << e.what() << '\n';
      failed = true;
    }
  }
  log << "fused " << inputs.size() << " map(s)\n";
  return failed ? kExitEntryFailed : kExitOk;
}

int cmd_net_demo(const NetDemoOptions& opts, std::ostream& out, std::ostream& log) {
  using namespace net;
  if (opts.base_size < 1) throw std::invalid_argument("base size must be >= 1");
  const PathwayConfig cfg = PathwayConfig::with_levels(opts.levels);
  SeededRng rng(opts.seed);

  // Side features coarse to fine; each doubles in size to meet the running map.
  std::vector<Tensor4> sides;
  std::vector<Shape4> shapes;
  for (int i = 0; i < cfg.module_count(); ++i) {
    const int size = opts.base_size << i;
    const Shape4 s{1, cfg.module_channels[static_cast<std::size_t>(i)], size, size};
    shapes.push_back(s);
    sides.push_back(random_tensor(s, rng));
  }
  const PathwayParams params = random_pathway_params(cfg, shapes, rng);
  PathwayTrace trace;
  const Tensor4 output = refinement_pathway(sides, cfg, params, &trace);

  out << "schedule:";
  for (std::size_t i = 0; i < cfg.module_channels.size(); ++i) {
    out << (i == 0 ? " " : " -> ") << cfg.module_channels[i];
  }
  out << '\n';
  for (const auto& s : trace.steps) {
    if (s.name == "top") {
      out << "top: " << s.lateral.str() << " -> " << s.output.str() << '\n';
      continue;
    }
    out << s.name << ": top-down " << s.top_down.str() << " + lateral " << s.lateral.str()
        << " -> " << s.output.str() << '\n';
  }

  if (!opts.dump_dir) return kExitOk;
  const fs::path dir = *opts.dump_dir;
  fs::create_directories(dir);
  Json sidecar;
  sidecar["seed"] = opts.seed;
  sidecar["levels"] = opts.levels;
  sidecar["base_size"] = opts.base_size;
  sidecar["module_channels"] = cfg.module_channels;
  Json tensors = Json::array();
  auto dump = [&](const std::string& name, const Tensor4& t) {
    const std::string file = name + ".bin";
    write_tensor(dir / file, t);
    Json entry;
    entry["name"] = name;
    entry["file"] = file;
    const Shape4& s = t.shape();
    entry["shape"] = {s.n, s.c, s.h, s.w};
    tensors.push_back(std::move(entry));
  };
  auto bias = [](const std::vector<double>& b) {
    return Tensor4(Shape4{1, static_cast<int>(b.size()), 1, 1}, b);
  };
  for (std::size_t i = 0; i < sides.size(); ++i) dump("side" + std::to_string(i), sides[i]);
  dump("output", output);
  if (opts.dump_params) {
    dump("seed.weight", params.seed_w);
    dump("seed.bias", bias(params.seed_b));
    for (std::size_t i = 0; i < params.modules.size(); ++i) {
      const auto& m = params.modules[i];
      const std::string p = "refine" + std::to_string(i + 1) + ".";
      dump(p + "top_down.weight", m.top_down_w);
      dump(p + "top_down.bias", bias(m.top_down_b));
      dump(p + "lateral.weight", m.lateral_w);
      dump(p + "lateral.bias", bias(m.lateral_b));
      dump(p + "fuse.weight", m.fuse_w);
      dump(p + "fuse.bias", bias(m.fuse_b));
      dump(p + "up.weight", m.up_w);
      dump(p + "up.bias", bias(m.up_b));
    }
  }
  sidecar["tensors"] = std::move(tensors);
  write_json(dir / "tensors.json", sidecar);
  log << "dumped " << sidecar["tensors"].size() << " tensor(s) to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace crispbench::cli
