#include "crispbench/edgemap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crispbench {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw DimensionError("raster dimensions must be >= 1, got " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
}

std::size_t area(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

}  // namespace

EdgeProbabilityMap::EdgeProbabilityMap(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  if (!(fill >= 0.0 && fill <= 1.0)) {
    throw std::out_of_range("edge probability must lie in [0,1]");
  }
  values_.assign(area(width, height), fill);
}

EdgeProbabilityMap::EdgeProbabilityMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != area(width, height)) {
    throw DimensionError("value count " + std::to_string(values_.size()) + " does not match " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
  for (double v : values_) {
    // NaN fails both comparisons.
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::out_of_range("edge probability must lie in [0,1]");
    }
  }
}

double EdgeProbabilityMap::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double EdgeProbabilityMap::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

BinaryBoundaryMap::BinaryBoundaryMap(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(area(width, height), 0);
}

BinaryBoundaryMap::BinaryBoundaryMap(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  check_dims(width, height);
  if (bits_.size() != area(width, height)) {
    throw DimensionError("bit count does not match dimensions");
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::size_t BinaryBoundaryMap::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

AnnotationSet::AnnotationSet(std::vector<BinaryBoundaryMap> maps) : maps_(std::move(maps)) {
  if (maps_.empty()) {
    throw std::invalid_argument("annotation set must contain at least one map");
  }
  for (const auto& m : maps_) {
    if (!m.same_dims(maps_.front())) {
      throw DimensionError("annotator maps differ in dimensions");
    }
  }
}

BinaryBoundaryMap binarize(const EdgeProbabilityMap& map, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::out_of_range("threshold must lie in [0,1]");
  }
  std::vector<std::uint8_t> bits(map.size());
  auto values = map.values();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = values[i] >= threshold ? 1 : 0;
  }
  return BinaryBoundaryMap(map.width(), map.height(), std::move(bits));
}

namespace {

struct Tap {
  int lo;
  int hi;
  double t;
};

// Source taps for one axis. The interpolated value is lo + t * (hi - lo).
std::vector<Tap> axis_taps(int in, int out, SamplingGrid grid) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  for (int i = 0; i < out; ++i) {
    double src;
    if (grid == SamplingGrid::kCornerAligned) {
      src = out == 1 ? 0.5 * (in - 1) : static_cast<double>(i) * (in - 1) / (out - 1);
    } else {
      src = (i + 0.5) * static_cast<double>(in) / out - 0.5;
    }
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    int lo = static_cast<int>(std::floor(src));
    int hi = std::min(lo + 1, in - 1);
    taps[static_cast<std::size_t>(i)] = {lo, hi, src - lo};
  }
  return taps;
}

// Linear blend that never leaves [min(a,b), max(a,b)], even under rounding.
double lerp_bounded(double a, double b, double t) {
  if (a == b) return a;
  double v = a + t * (b - a);
  return std::clamp(v, std::min(a, b), std::max(a, b));
}

}  // namespace

EdgeProbabilityMap resize_bilinear(const EdgeProbabilityMap& map, int target_width,
                                   int target_height, SamplingGrid grid) {
  check_dims(target_width, target_height);
  if (target_width == map.width() && target_height == map.height()) {
    return map;
  }
  const auto xs = axis_taps(map.width(), target_width, grid);
  const auto ys = axis_taps(map.height(), target_height, grid);
  std::vector<double> out(area(target_width, target_height));
  for (int y = 0; y < target_height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < target_width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      double top = lerp_bounded(map.at(tx.lo, ty.lo), map.at(tx.hi, ty.lo), tx.t);
      double bottom = lerp_bounded(map.at(tx.lo, ty.hi), map.at(tx.hi, ty.hi), tx.t);
      out[static_cast<std::size_t>(y) * target_width + x] = lerp_bounded(top, bottom, ty.t);
    }
  }
  return EdgeProbabilityMap(target_width, target_height, std::move(out));
}

EdgeProbabilityMap average_maps(std::span<const EdgeProbabilityMap> maps) {
  if (maps.empty()) {
    throw std::invalid_argument("average_maps needs at least one map");
  }
  const auto& first = maps.front();
  for (const auto& m : maps) {
    if (m.width() != first.width() || m.height() != first.height()) {
      throw DimensionError("average_maps: dimension mismatch");
    }
  }
  const double n = static_cast<double>(maps.size());
  std::vector<double> out(first.size());
  std::vector<double> column(maps.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t k = 0; k < maps.size(); ++k) column[k] = maps[k].values()[i];
    // Sorted summation makes the result independent of input order.
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double v : column) sum += v;
    out[i] = std::clamp(sum / n, column.front(), column.back());
  }
  return EdgeProbabilityMap(first.width(), first.height(), std::move(out));
}

}  // namespace crispbench
