#include "crispbench/benchmark.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

#include "crispbench/matching.hpp"
#include "crispbench/parallel.hpp"
#include "crispbench/pipeline.hpp"

namespace crispbench {

void BenchmarkConfig::validate() const {
  if (!(d_fraction > 0.0)) {
    throw std::invalid_argument("d_fraction must be > 0");
  }
  if (n_thresholds < 1) {
    throw std::invalid_argument("n_thresholds must be >= 1");
  }
}

std::vector<double> BenchmarkConfig::thresholds() const {
  std::vector<double> out(static_cast<std::size_t>(n_thresholds));
  for (int k = 1; k <= n_thresholds; ++k) {
    out[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) / (n_thresholds + 1);
  }
  return out;
}

double MatchCounts::precision() const {
  return sum_p == 0 ? 1.0 : static_cast<double>(cnt_p) / static_cast<double>(sum_p);
}

double MatchCounts::recall() const {
  return sum_r == 0 ? 1.0 : static_cast<double>(cnt_r) / static_cast<double>(sum_r);
}

double f_measure(double precision, double recall) {
  const double denom = precision + recall;
  return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

std::vector<MatchCounts> evaluate_image(const EdgeProbabilityMap& pred, const AnnotationSet& gt,
                                        const BenchmarkConfig& cfg) {
  cfg.validate();
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw DimensionError("prediction " + std::to_string(pred.width()) + "x" +
                         std::to_string(pred.height()) + " vs ground truth " +
                         std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
  }
  const double max_dist = max_dist_pixels(cfg.d_fraction, pred.width(), pred.height());
  std::vector<PixelMatcher> matchers;
  matchers.reserve(gt.annotator_count());
  std::int64_t sum_r = 0;
  for (const auto& m : gt.maps()) {
    matchers.emplace_back(m, max_dist);
    sum_r += static_cast<std::int64_t>(matchers.back().gt_count());
  }

  const auto thresholds = cfg.thresholds();
  std::vector<MatchCounts> out(thresholds.size());
  std::vector<std::uint8_t> matched(pred.size());
  BinaryBoundaryMap previous(pred.width(), pred.height());
  BinaryBoundaryMap previous_candidate(pred.width(), pred.height());
  bool have_previous = false;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    BinaryBoundaryMap binary = binarize(pred, thresholds[t]);
    // Neighbouring thresholds often select the same pixels, or thin to the same set.
    if (have_previous && binary == previous) {
      out[t] = out[t - 1];
      continue;
    }
    previous = binary;
    BinaryBoundaryMap candidate = cfg.thin_predictions ? thin(binary) : std::move(binary);
    if (have_previous && candidate == previous_candidate) {
      out[t] = out[t - 1];
      continue;
    }
    have_previous = true;

    MatchCounts counts;
    counts.sum_r = sum_r;
    counts.sum_p = static_cast<std::int64_t>(candidate.count());
    if (counts.sum_p > 0) {
      std::fill(matched.begin(), matched.end(), std::uint8_t{0});
      for (auto& matcher : matchers) {
        counts.cnt_r += static_cast<std::int64_t>(matcher.match(candidate, &matched));
      }
      counts.cnt_p = std::count(matched.begin(), matched.end(), std::uint8_t{1});
    }
    out[t] = counts;
    previous_candidate = std::move(candidate);
  }
  return out;
}

double average_precision(const std::vector<PRPoint>& curve) {
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    double best = 0.0;
    for (const auto& p : curve) {
      if (p.recall >= r) best = std::max(best, p.precision);
    }
    sum += best;
  }
  return sum / 101.0;
}

MetricsReport aggregate(const std::vector<ThresholdCounts>& per_image,
                        const std::vector<double>& thresholds) {
  if (per_image.empty()) {
    throw std::invalid_argument("aggregate needs at least one image");
  }
  const std::size_t n = per_image.front().size();
  if (n == 0) {
    throw std::invalid_argument("aggregate needs at least one threshold");
  }
  for (const auto& image : per_image) {
    if (image.size() != n) {
      throw std::invalid_argument("images were evaluated on different threshold grids");
    }
  }
  std::vector<double> grid = thresholds;
  if (grid.empty()) {
    BenchmarkConfig cfg;
    cfg.n_thresholds = static_cast<int>(n);
    grid = cfg.thresholds();
  } else if (grid.size() != n) {
    throw std::invalid_argument("threshold labels do not match the count grid");
  }

  std::vector<MatchCounts> totals(n);
  for (const auto& image : per_image) {
    for (std::size_t t = 0; t < n; ++t) totals[t] += image[t];
  }

  MetricsReport report;
  report.curve.reserve(n);
  std::size_t best = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double p = totals[t].precision();
    const double r = totals[t].recall();
    report.curve.push_back({grid[t], p, r, f_measure(p, r)});
    // Strict comparison keeps the lowest threshold on ties.
    if (report.curve[t].f1 > report.curve[best].f1) best = t;
  }
  report.ods = report.curve[best].f1;
  report.ods_threshold = report.curve[best].threshold;

  MatchCounts ois_total;
  for (const auto& image : per_image) {
    std::size_t image_best = 0;
    double image_best_f = -1.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double f = f_measure(image[t].precision(), image[t].recall());
      if (f > image_best_f) {
        image_best_f = f;
        image_best = t;
      }
    }
    ois_total += image[image_best];
  }
  report.ois = f_measure(ois_total.precision(), ois_total.recall());
  report.ap = average_precision(report.curve);
  return report;
}

std::vector<ThresholdCounts> evaluate_dataset(const std::vector<DatasetItem>& dataset,
                                              const BenchmarkConfig& cfg, int jobs) {
  std::vector<ThresholdCounts> out(dataset.size());
  parallel_for(dataset.size(), jobs, [&](std::size_t i) {
    out[i] = evaluate_image(dataset[i].pred, dataset[i].gt, cfg);
  });
  return out;
}

CrispnessSweep crispness_sweep(const std::vector<DatasetItem>& dataset,
                               const BenchmarkConfig& cfg, const std::vector<double>& factors,
                               int jobs) {
  if (factors.empty()) {
    throw std::invalid_argument("crispness sweep needs at least one factor");
  }
  for (double f : factors) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw std::invalid_argument("sweep factors must lie in (0,1]");
    }
  }
  if (dataset.empty()) {
    throw std::invalid_argument("crispness sweep needs at least one image");
  }
  CrispnessSweep sweep;
  sweep.factors = factors;
  for (double f : factors) {
    BenchmarkConfig scaled = cfg;
    scaled.d_fraction = cfg.d_fraction * f;
    sweep.max_dist_px.push_back(max_dist_pixels(scaled.d_fraction, dataset.front().pred.width(),
                                                dataset.front().pred.height()));
    sweep.reports.push_back(aggregate(evaluate_dataset(dataset, scaled, jobs), scaled.thresholds()));
  }
  return sweep;
}

std::vector<MetricGap> sweep_gaps(const CrispnessSweep& a, const CrispnessSweep& b) {
  if (a.factors != b.factors) {
    throw std::invalid_argument("sweeps use different factor lists");
  }
  std::vector<MetricGap> gaps;
  for (std::size_t i = 0; i < a.factors.size(); ++i) {
    gaps.push_back({a.factors[i], a.reports[i].ods - b.reports[i].ods,
                    a.reports[i].ois - b.reports[i].ois, a.reports[i].ap - b.reports[i].ap});
  }
  return gaps;
}

}  // namespace crispbench
