#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace crispbench {

/// Raised when a raster is built or combined with inconsistent dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-pixel edge confidence in [0,1], row-major. Immutable once built.
class EdgeProbabilityMap {
 public:
  EdgeProbabilityMap(int width, int height, double fill = 0.0);
  EdgeProbabilityMap(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const double> values() const { return values_; }

  double min_value() const;
  double max_value() const;

  friend bool operator==(const EdgeProbabilityMap&, const EdgeProbabilityMap&) = default;

 private:
  int width_;
  int height_;
  std::vector<double> values_;
};

/// Binary boundary raster, row-major, one byte per pixel (0 or 1).
class BinaryBoundaryMap {
 public:
  BinaryBoundaryMap(int width, int height);
  BinaryBoundaryMap(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool on) { bits_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0; }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<std::uint8_t> bits() { return bits_; }

  std::size_t count() const;
  bool same_dims(const BinaryBoundaryMap& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const BinaryBoundaryMap&, const BinaryBoundaryMap&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// Multi-annotator ground truth for one image. Non-empty, all maps the same size.
class AnnotationSet {
 public:
  explicit AnnotationSet(std::vector<BinaryBoundaryMap> maps);

  int width() const { return maps_.front().width(); }
  int height() const { return maps_.front().height(); }
  std::size_t annotator_count() const { return maps_.size(); }

  const std::vector<BinaryBoundaryMap>& maps() const { return maps_; }
  const BinaryBoundaryMap& operator[](std::size_t i) const { return maps_[i]; }

 private:
  std::vector<BinaryBoundaryMap> maps_;
};

/// Bit on iff value >= threshold. Throws std::out_of_range for thresholds outside [0,1].
BinaryBoundaryMap binarize(const EdgeProbabilityMap& map, double threshold);

/// Where output samples land on the input grid.
enum class SamplingGrid {
  kCornerAligned,  // first/last output pixel centers coincide with first/last input pixel centers
  kHalfPixel,      // pixel areas aligned; src = (dst + 0.5) * in / out - 0.5, clamped at the border
};

EdgeProbabilityMap resize_bilinear(const EdgeProbabilityMap& map, int target_width,
                                   int target_height,
                                   SamplingGrid grid = SamplingGrid::kCornerAligned);

/// Per-pixel arithmetic mean.
EdgeProbabilityMap average_maps(std::span<const EdgeProbabilityMap> maps);

}  // namespace crispbench
