#include "crispbench/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crispbench {

namespace {

constexpr std::int32_t kNone = -1;

// Integer edge cost so that cost comparisons are exact: micro-pixels.
std::int64_t scaled_cost(int d2) {
  return std::llround(std::sqrt(static_cast<double>(d2)) * 1e6);
}


}  // namespace

double max_dist_pixels(double d_fraction, int width, int height) {
  return d_fraction * std::hypot(static_cast<double>(width), static_cast<double>(height));
}

PixelMatcher::PixelMatcher(const BinaryBoundaryMap& gt, double max_dist_px)
    : width_(gt.width()), height_(gt.height()) {
  if (!(max_dist_px >= 0.0) || !std::isfinite(max_dist_px)) {
    throw std::invalid_argument("max_dist_px must be a finite value >= 0");
  }
  gt_index_.assign(gt.size(), kNone);
  auto bits = gt.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) {
      gt_index_[i] = static_cast<std::int32_t>(gt_pixels_.size());
      gt_pixels_.push_back(static_cast<std::int32_t>(i));
    }
  }

  // Pixel offsets inside the tolerance disc. The radius never needs to exceed
  // the image extent.
  const double limit = max_dist_px * max_dist_px * (1.0 + 1e-12);
  const int radius = static_cast<int>(
      std::min(std::floor(max_dist_px), static_cast<double>(std::max(width_, height_))));
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (d2 <= limit) offsets_.push_back({dx, dy, scaled_cost(d2)});
    }
  }
  std::stable_sort(offsets_.begin(), offsets_.end(),
                   [](const Offset& a, const Offset& b) { return a.cost < b.cost; });
}

void PixelMatcher::build(const BinaryBoundaryMap& pred) {
  if (pred.width() != width_ || pred.height() != height_) {
    throw DimensionError("prediction and ground truth differ in dimensions");
  }
  rows_.clear();
  adj_start_.clear();
  adj_col_.clear();
  adj_cost_.clear();
  auto bits = pred.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) rows_.push_back(static_cast<std::int32_t>(i));
  }
  adj_start_.reserve(rows_.size() + 1);
  adj_start_.push_back(0);
  if (!gt_pixels_.empty()) {
    for (std::int32_t raster : rows_) {
      const int x = raster % width_;
      const int y = raster / width_;
      for (const Offset& o : offsets_) {
        const int nx = x + o.dx;
        const int ny = y + o.dy;
        if (nx < 0 || ny < 0 || nx >= width_ || ny >= height_) continue;
        const std::int32_t col = gt_index_[static_cast<std::size_t>(ny) * width_ + nx];
        if (col != kNone) {
          adj_col_.push_back(col);
          adj_cost_.push_back(o.cost);
        }
      }
      adj_start_.push_back(static_cast<std::int32_t>(adj_col_.size()));
    }
  } else {
    adj_start_.resize(rows_.size() + 1, 0);
  }
  row_match_.assign(rows_.size(), kNone);
  row_match_edge_.assign(rows_.size(), kNone);
  col_match_.assign(gt_pixels_.size(), kNone);
}

// Maximum cardinality with minimum total cost is solved as an assignment in
// which every row must be placed: row r may also take a private "unmatched"
// node at a cost above any real matching total. Rows are added one at a time
// along shortest augmenting paths in reduced costs (Dijkstra that stops at the
// first free node); the duals of the settled columns are then shifted so that
// reduced costs stay non-negative and the new matching is tight.
void PixelMatcher::solve() {
  const std::size_t nr = rows_.size();
  const std::size_t nc = gt_pixels_.size();
  if (nr == 0 || nc == 0 || adj_col_.empty()) return;
  const std::int64_t max_cost = offsets_.back().cost;
  unmatched_cost_ = (static_cast<std::int64_t>(nr) + 1) * (max_cost + 1);

  row_dual_.assign(nr, 0);
  col_dual_.assign(nc, 0);
  dist_.assign(nc + nr, std::numeric_limits<std::int64_t>::max());
  via_edge_.assign(nc + nr, kNone);
  via_row_.assign(nc + nr, kNone);
  done_.assign(nc + nr, 0);

  // Each row starts at its cheapest edge cost; take a free column at that cost.
  for (std::size_t r = 0; r < nr; ++r) {
    const std::int32_t first = adj_start_[r];
    if (first == adj_start_[r + 1]) continue;
    row_dual_[r] = adj_cost_[static_cast<std::size_t>(first)];
    for (std::int32_t e = first; e < adj_start_[r + 1]; ++e) {
      if (adj_cost_[static_cast<std::size_t>(e)] != row_dual_[r]) break;
      const auto c = static_cast<std::size_t>(adj_col_[static_cast<std::size_t>(e)]);
      if (col_match_[c] == kNone) {
        col_match_[c] = static_cast<std::int32_t>(r);
        row_match_[r] = static_cast<std::int32_t>(c);
        row_match_edge_[r] = e;
        break;
      }
    }
  }
  // A row pushed onto its "unmatched" node by an earlier path is already placed.
  for (std::size_t r = 0; r < nr; ++r) {
    if (row_match_[r] == kNone && adj_start_[r] != adj_start_[r + 1] &&
        row_dual_[r] != unmatched_cost_) {
      augment_row(static_cast<std::int32_t>(r));
    }
  }
}

void PixelMatcher::augment_row(std::int32_t source) {
  const auto nc = static_cast<std::int32_t>(gt_pixels_.size());
  using Entry = std::pair<std::int64_t, std::int32_t>;
  auto later = [](const Entry& a, const Entry& b) { return a > b; };
  heap_.clear();
  touched_.clear();
  settled_.clear();

  auto reach = [&](std::int32_t node, std::int64_t d, std::int32_t row, std::int32_t edge) {
    const auto n = static_cast<std::size_t>(node);
    if (d >= dist_[n]) return;
    if (dist_[n] == std::numeric_limits<std::int64_t>::max()) touched_.push_back(node);
    dist_[n] = d;
    via_row_[n] = row;
    via_edge_[n] = edge;
    heap_.emplace_back(d, node);
    std::push_heap(heap_.begin(), heap_.end(), later);
  };
  // Relax every arc out of `row` reached at distance d (its matched arc is tight).
  auto expand = [&](std::int32_t row, std::int64_t d) {
    const auto r = static_cast<std::size_t>(row);
    for (std::int32_t e = adj_start_[r]; e < adj_start_[r + 1]; ++e) {
      if (e == row_match_edge_[r]) continue;
      const std::int32_t c = adj_col_[static_cast<std::size_t>(e)];
      reach(c, d + adj_cost_[static_cast<std::size_t>(e)] - row_dual_[r] -
                   col_dual_[static_cast<std::size_t>(c)],
            row, e);
    }
    reach(nc + row, d + unmatched_cost_ - row_dual_[r], row, kNone);
  };

  expand(source, 0);
  std::int32_t target = kNone;
  std::int64_t total = 0;
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    const auto [d, node] = heap_.back();
    heap_.pop_back();
    const auto n = static_cast<std::size_t>(node);
    if (done_[n] || d != dist_[n]) continue;
    done_[n] = 1;
    if (node >= nc || col_match_[n] == kNone) {
      target = node;
      total = d;
      break;
    }
    settled_.push_back(node);
    expand(col_match_[n], d);
  }

  // Shift duals of settled columns; rows keep their matched arcs tight.
  for (std::int32_t c : settled_) {
    col_dual_[static_cast<std::size_t>(c)] += dist_[static_cast<std::size_t>(c)] - total;
  }
  // Flip the path back to the source.
  std::int32_t node = target;
  for (;;) {
    const std::int32_t row = via_row_[static_cast<std::size_t>(node)];
    const std::int32_t edge = via_edge_[static_cast<std::size_t>(node)];
    const auto r = static_cast<std::size_t>(row);
    const std::int32_t previous = row_match_[r];
    if (node >= nc) {
      row_match_[r] = kNone;
      row_match_edge_[r] = kNone;
    } else {
      row_match_[r] = node;
      row_match_edge_[r] = edge;
      col_match_[static_cast<std::size_t>(node)] = row;
    }
    if (row == source) break;
    node = previous;
  }
  auto retighten = [&](std::int32_t row) {
    const auto r = static_cast<std::size_t>(row);
    row_dual_[r] = row_match_[r] == kNone
                       ? unmatched_cost_
                       : adj_cost_[static_cast<std::size_t>(row_match_edge_[r])] -
                             col_dual_[static_cast<std::size_t>(row_match_[r])];
  };
  retighten(source);
  retighten(via_row_[static_cast<std::size_t>(target)]);
  for (std::int32_t c : settled_) {
    const std::int32_t row = col_match_[static_cast<std::size_t>(c)];
    if (row != kNone) retighten(row);
  }

  for (std::int32_t t : touched_) {
    const auto n = static_cast<std::size_t>(t);
    dist_[n] = std::numeric_limits<std::int64_t>::max();
    done_[n] = 0;
  }
}

std::size_t PixelMatcher::match(const BinaryBoundaryMap& pred,
                                std::vector<std::uint8_t>* matched_pred) {
  build(pred);
  solve();
  std::size_t matched = 0;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (row_match_[r] == kNone) continue;
    ++matched;
    if (matched_pred != nullptr) (*matched_pred)[static_cast<std::size_t>(rows_[r])] = 1;
  }
  return matched;
}

Correspondence PixelMatcher::match_pairs(const BinaryBoundaryMap& pred) {
  match(pred, nullptr);
  Correspondence out;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (row_match_[r] == kNone) continue;
    out.pairs.push_back(
        {rows_[r], gt_pixels_[static_cast<std::size_t>(row_match_[r])]});
    const std::int32_t p = rows_[r];
    const std::int32_t g = out.pairs.back().gt;
    const double dx = p % width_ - g % width_;
    const double dy = p / width_ - g / width_;
    out.total_distance += std::sqrt(dx * dx + dy * dy);
  }
  return out;
}

Correspondence correspond_pixels(const BinaryBoundaryMap& pred, const BinaryBoundaryMap& gt,
                                 double max_dist_px) {
  if (!pred.same_dims(gt)) {
    throw DimensionError("prediction and ground truth differ in dimensions");
  }
  PixelMatcher matcher(gt, max_dist_px);
  return matcher.match_pairs(pred);
}

}  // namespace crispbench
