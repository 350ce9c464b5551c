#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "crispbench/edgemap.hpp"

namespace crispbench {

struct PixelPair {
  std::int32_t pred;  // row-major pixel index in the prediction
  std::int32_t gt;    // row-major pixel index in the ground truth
};

struct Correspondence {
  std::vector<PixelPair> pairs;  // sorted by prediction index
  double total_distance = 0.0;

  std::size_t cardinality() const { return pairs.size(); }
};

/// Pixel correspondence between a predicted and a ground-truth boundary map.
///
/// Edges join an on-pixel of `pred` to an on-pixel of `gt` whenever their
/// Euclidean distance is <= max_dist_px. The result is a maximum-cardinality
/// matching and, among those, one of minimum total distance.
Correspondence correspond_pixels(const BinaryBoundaryMap& pred, const BinaryBoundaryMap& gt,
                                 double max_dist_px);

/// Reusable matcher for one ground-truth map. Scratch buffers are kept
/// between calls, so an instance must not be shared across threads.
class PixelMatcher {
 public:
  PixelMatcher(const BinaryBoundaryMap& gt, double max_dist_px);

  /// Matches `pred` and marks matched prediction pixels in `matched_pred`
  /// (indexed like the raster). Returns the number of matched pairs.
  std::size_t match(const BinaryBoundaryMap& pred, std::vector<std::uint8_t>* matched_pred);

  Correspondence match_pairs(const BinaryBoundaryMap& pred);

  std::size_t gt_count() const { return gt_pixels_.size(); }

 private:
  struct Offset {
    int dx;
    int dy;
    std::int64_t cost;
  };

  void build(const BinaryBoundaryMap& pred);
  void solve();
  void augment_row(std::int32_t source);

  int width_;
  int height_;
  std::vector<std::int32_t> gt_index_;   // raster -> gt pixel id or -1
  std::vector<std::int32_t> gt_pixels_;  // gt pixel id -> raster index
  std::vector<Offset> offsets_;          // ascending cost, then dy, then dx

  // Per-call state. Rows are prediction pixels, columns are gt pixels.
  std::vector<std::int32_t> rows_;  // row -> raster index
  std::vector<std::int32_t> adj_start_;
  std::vector<std::int32_t> adj_col_;
  std::vector<std::int64_t> adj_cost_;
  std::vector<std::int32_t> row_match_;  // row -> column or -1
  std::vector<std::int32_t> col_match_;  // column -> row or -1
  std::vector<std::int32_t> row_match_edge_;

  // Shortest-path scratch. Nodes are columns, then one "unmatched" node per row.
  std::int64_t unmatched_cost_ = 0;
  std::vector<std::int64_t> row_dual_;
  std::vector<std::int64_t> col_dual_;
  std::vector<std::int64_t> dist_;
  std::vector<std::int32_t> via_edge_;  // edge used to reach a node, -1 for "unmatched"
  std::vector<std::int32_t> via_row_;
  std::vector<std::uint8_t> done_;
  std::vector<std::int32_t> touched_;
  std::vector<std::int32_t> settled_;
  std::vector<std::pair<std::int64_t, std::int32_t>> heap_;
};

/// Converts a distance-fraction tolerance to pixels for a width x height image.
double max_dist_pixels(double d_fraction, int width, int height);

}  // namespace crispbench
