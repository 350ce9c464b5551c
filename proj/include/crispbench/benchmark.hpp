#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "crispbench/edgemap.hpp"

namespace crispbench {

/// Standard tolerance: fraction of the image diagonal (about 4.3 px at 321x481).
inline constexpr double kStandardDFraction = 0.0075;
/// Looser tolerance used for PASCAL-Context style evaluation.
inline constexpr double kPascalDFraction = 0.011;

struct BenchmarkConfig {
  double d_fraction = kStandardDFraction;
  int n_thresholds = 99;
  bool thin_predictions = true;

  void validate() const;
  /// k / (n + 1) for k = 1..n.
  std::vector<double> thresholds() const;

  friend bool operator==(const BenchmarkConfig&, const BenchmarkConfig&) = default;
};

/// The four benchmark accumulators at one threshold.
struct MatchCounts {
  std::int64_t sum_p = 0;  // predicted on-pixels
  std::int64_t cnt_p = 0;  // predicted pixels matched in at least one annotator map
  std::int64_t sum_r = 0;  // GT on-pixels over all annotators
  std::int64_t cnt_r = 0;  // GT pixels matched, summed over annotators

  MatchCounts& operator+=(const MatchCounts& o) {
    sum_p += o.sum_p;
    cnt_p += o.cnt_p;
    sum_r += o.sum_r;
    cnt_r += o.cnt_r;
    return *this;
  }
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;

  /// 1 when nothing was predicted.
  double precision() const;
  /// 1 when there is no ground truth.
  double recall() const;
};

using ThresholdCounts = std::vector<MatchCounts>;

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double ods = 0.0;
  double ods_threshold = 0.0;
  double ois = 0.0;
  double ap = 0.0;
  std::vector<PRPoint> curve;
};

struct CrispnessSweep {
  std::vector<double> factors;
  std::vector<double> max_dist_px;  // pixel tolerance per factor for the first image
  std::vector<MetricsReport> reports;
};

/// Harmonic mean, 0 when both inputs are 0.
double f_measure(double precision, double recall);

/// Evaluates one image at every threshold of the config.
std::vector<MatchCounts> evaluate_image(const EdgeProbabilityMap& pred, const AnnotationSet& gt,
                                        const BenchmarkConfig& cfg);

/// Folds per-image counts into ODS / OIS / AP. `thresholds` labels the curve;
/// when empty the default k/(n+1) grid for the grid size is used.
MetricsReport aggregate(const std::vector<ThresholdCounts>& per_image,
                        const std::vector<double>& thresholds = {});

/// 101-point interpolated average precision over a curve.
double average_precision(const std::vector<PRPoint>& curve);

struct DatasetItem {
  EdgeProbabilityMap pred;
  AnnotationSet gt;
};

/// Evaluates every image, fanning out over `jobs` worker threads. The output
/// order matches the input order and does not depend on `jobs`.
std::vector<ThresholdCounts> evaluate_dataset(const std::vector<DatasetItem>& dataset,
                                              const BenchmarkConfig& cfg, int jobs = 1);

CrispnessSweep crispness_sweep(const std::vector<DatasetItem>& dataset,
                               const BenchmarkConfig& cfg,
                               const std::vector<double>& factors = {1.0, 0.5, 0.25},
                               int jobs = 1);

struct MetricGap {
  double factor = 0.0;
  double ods = 0.0;
  double ois = 0.0;
  double ap = 0.0;
};

/// Per-factor metric differences `a - b` between two sweeps over the same factors.
std::vector<MetricGap> sweep_gaps(const CrispnessSweep& a, const CrispnessSweep& b);

inline constexpr const char* kPrCsvHeader = "threshold,precision,recall,f1";

/// PR curve as CSV with header kPrCsvHeader; values printed round-trip exact.
void write_pr_csv(std::ostream& out, const std::vector<PRPoint>& curve);

}  // namespace crispbench
