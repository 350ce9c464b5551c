#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "crispbench/edgemap.hpp"

namespace crispbench {

enum class Label : std::uint8_t { kNegative = 0, kIgnore = 1, kPositive = 2 };

/// Tri-state training label per pixel.
class LabelMap {
 public:
  LabelMap(int width, int height, std::vector<Label> labels);

  int width() const { return width_; }
  int height() const { return height_; }
  Label at(int x, int y) const { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::vector<Label>& labels() const { return labels_; }
  std::size_t count(Label label) const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  int width_;
  int height_;
  std::vector<Label> labels_;
};

/// Positive where at least `min_positive` annotators agree, negative where
/// nobody marked the pixel, ignore in between.
LabelMap consensus_labels(const AnnotationSet& annotations, int min_positive = 3);

/// 8-bit file encoding of labels: 0 negative, 128 ignore, 255 positive.
std::uint8_t encode_label(Label label);
Label decode_label(std::uint16_t sample);

/// One parallel Guo-Hall pass pair repeated until nothing changes.
/// Exposed separately so it can be checked against a reference implementation.
BinaryBoundaryMap guo_hall_thin(const BinaryBoundaryMap& map);

/// Thinning used in place of NMS before matching.
///
/// Guo-Hall to convergence, then any pixel of a fully-on 2x2 block whose
/// removal keeps its 8-neighbourhood connected is removed; both steps repeat
/// until stable, so thin(thin(m)) == thin(m). A 2x2 block can survive only
/// when each of its four pixels carries a branch that would otherwise detach
/// (two crossing diagonal lines are the smallest case).
BinaryBoundaryMap thin(const BinaryBoundaryMap& map);

/// True if removing (x, y) leaves its on-neighbours 8-connected among themselves.
bool is_removable_without_split(const BinaryBoundaryMap& map, int x, int y);

struct ScaleSet {
  std::vector<double> factors{0.5, 1.0, 2.0};
};

using Detector = std::function<EdgeProbabilityMap(const EdgeProbabilityMap&)>;

/// Scaled dimension used for a resize factor: max(1, round(dim * factor)).
int scaled_dim(int dim, double factor);

/// Resizes each map to width x height and averages them.
EdgeProbabilityMap fuse_to_size(std::span<const EdgeProbabilityMap> maps, int width, int height);

/// Runs the detector on each rescaled copy of the image, resizes every output
/// back to the original size and averages them.
EdgeProbabilityMap multiscale_fuse(const Detector& run_detector, const EdgeProbabilityMap& image,
                                   const ScaleSet& scales);

}  // namespace crispbench
