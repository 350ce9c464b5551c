#include "crispbench/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crispbench {

LabelMap::LabelMap(int width, int height, std::vector<Label> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width < 1 || height < 1 ||
      labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DimensionError("label count does not match dimensions");
  }
}

std::size_t LabelMap::count(Label label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

LabelMap consensus_labels(const AnnotationSet& annotations, int min_positive) {
  if (min_positive < 1) {
    throw std::invalid_argument("min_positive must be >= 1");
  }
  const std::size_t n = static_cast<std::size_t>(annotations.width()) * annotations.height();
  std::vector<int> votes(n, 0);
  for (const auto& m : annotations.maps()) {
    auto bits = m.bits();
    for (std::size_t i = 0; i < n; ++i) votes[i] += bits[i];
  }
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (votes[i] >= min_positive) {
      labels[i] = Label::kPositive;
    } else if (votes[i] == 0) {
      labels[i] = Label::kNegative;
    } else {
      labels[i] = Label::kIgnore;
    }
  }
  return LabelMap(annotations.width(), annotations.height(), std::move(labels));
}

std::uint8_t encode_label(Label label) {
  switch (label) {
    case Label::kNegative:
      return 0;
    case Label::kIgnore:
      return 128;
    case Label::kPositive:
      return 255;
  }
  return 0;
}

Label decode_label(std::uint16_t sample) {
  switch (sample) {
    case 0:
      return Label::kNegative;
    case 128:
      return Label::kIgnore;
    case 255:
      return Label::kPositive;
    default:
      throw std::invalid_argument("not a label sample: " + std::to_string(sample));
  }
}

namespace {

// Binary raster with a one-pixel off border so neighbourhood reads never need
// bounds checks.
class PaddedRaster {
 public:
  explicit PaddedRaster(const BinaryBoundaryMap& map)
      : width_(map.width()), height_(map.height()), stride_(map.width() + 2),
        cells_(static_cast<std::size_t>(stride_) * (map.height() + 2), 0) {
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        cells_[index(x, y)] = map.at(x, y) ? 1 : 0;
      }
    }
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y + 1) * stride_ + static_cast<std::size_t>(x + 1);
  }
  int stride() const { return stride_; }
  std::uint8_t& operator[](std::size_t i) { return cells_[i]; }
  std::uint8_t operator[](std::size_t i) const { return cells_[i]; }

  // Neighbour pattern in ring order N, NE, E, SE, S, SW, W, NW (bit 0 = N).
  unsigned ring(std::size_t i) const {
    const std::size_t s = static_cast<std::size_t>(stride_);
    return static_cast<unsigned>(cells_[i - s]) | (cells_[i - s + 1] << 1) |
           (cells_[i + 1] << 2) | (cells_[i + s + 1] << 3) | (cells_[i + s] << 4) |
           (cells_[i + s - 1] << 5) | (cells_[i - 1] << 6) | (cells_[i - s - 1] << 7);
  }

  std::vector<std::size_t> on_cells() const {
    std::vector<std::size_t> out;
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        if (cells_[index(x, y)]) out.push_back(index(x, y));
      }
    }
    return out;
  }

  BinaryBoundaryMap to_map() const {
    BinaryBoundaryMap out(width_, height_);
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) out.set(x, y, cells_[index(x, y)] != 0);
    }
    return out;
  }

 private:
  int width_;
  int height_;
  int stride_;
  std::vector<std::uint8_t> cells_;
};

bool bit(unsigned ring, int k) { return ((ring >> k) & 1U) != 0; }

// Guo-Hall deletion test for one sub-iteration.
bool guo_hall_deletable(unsigned ring, int sub_iteration) {
  const bool p2 = bit(ring, 0), p3 = bit(ring, 1), p4 = bit(ring, 2), p5 = bit(ring, 3);
  const bool p6 = bit(ring, 4), p7 = bit(ring, 5), p8 = bit(ring, 6), p9 = bit(ring, 7);
  const int c = (!p2 && (p3 || p4)) + (!p4 && (p5 || p6)) + (!p6 && (p7 || p8)) +
                (!p8 && (p9 || p2));
  const int n1 = (p9 || p2) + (p3 || p4) + (p5 || p6) + (p7 || p8);
  const int n2 = (p2 || p3) + (p4 || p5) + (p6 || p7) + (p8 || p9);
  const int n = std::min(n1, n2);
  const bool m = sub_iteration == 0 ? ((p6 || p7 || !p9) && p8) : ((p2 || p3 || !p5) && p4);
  return c == 1 && n >= 2 && n <= 3 && !m;
}

// Number of 8-connected groups formed by the on-neighbours of a pixel, using
// only adjacency inside the 3x3 window.
int neighbour_groups(unsigned ring) {
  static const std::array<int, 256> table = [] {
    constexpr std::array<std::array<int, 2>, 8> pos = {
        {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};
    std::array<int, 256> t{};
    for (unsigned r = 0; r < 256; ++r) {
      std::array<int, 8> group{};
      group.fill(-1);
      int groups = 0;
      for (int s = 0; s < 8; ++s) {
        if (!bit(r, s) || group[static_cast<std::size_t>(s)] >= 0) continue;
        std::array<int, 8> stack{};
        int top = 0;
        stack[top++] = s;
        group[static_cast<std::size_t>(s)] = groups;
        while (top > 0) {
          const int a = stack[--top];
          for (int b = 0; b < 8; ++b) {
            if (!bit(r, b) || group[static_cast<std::size_t>(b)] >= 0) continue;
            const auto& pa = pos[static_cast<std::size_t>(a)];
            const auto& pb = pos[static_cast<std::size_t>(b)];
            if (std::abs(pa[0] - pb[0]) <= 1 && std::abs(pa[1] - pb[1]) <= 1) {
              group[static_cast<std::size_t>(b)] = groups;
              stack[top++] = b;
            }
          }
        }
        ++groups;
      }
      t[r] = groups;
    }
    return t;
  }();
  return table[ring & 0xffU];
}

// Returns true if any pixel was removed.
bool guo_hall_in_place(PaddedRaster& raster, std::vector<std::size_t>& active) {
  bool any = false;
  std::vector<std::size_t> marked;
  for (;;) {
    bool changed = false;
    for (int sub = 0; sub < 2; ++sub) {
      marked.clear();
      for (std::size_t i : active) {
        if (guo_hall_deletable(raster.ring(i), sub)) marked.push_back(i);
      }
      for (std::size_t i : marked) raster[i] = 0;
      if (!marked.empty()) {
        changed = true;
        std::erase_if(active, [&](std::size_t i) { return raster[i] == 0; });
      }
    }
    if (!changed) break;
    any = true;
  }
  return any;
}

bool break_blocks_in_place(PaddedRaster& raster, std::vector<std::size_t>& active) {
  const std::size_t s = static_cast<std::size_t>(raster.stride());
  bool any = false;
  // `active` is in raster order, so each pixel is tried as a block's top-left.
  for (std::size_t tl : active) {
    if (!raster[tl] || !raster[tl + 1] || !raster[tl + s] || !raster[tl + s + 1]) continue;
    for (std::size_t i : {tl, tl + 1, tl + s, tl + s + 1}) {
      if (neighbour_groups(raster.ring(i)) == 1) {
        raster[i] = 0;
        any = true;
        break;
      }
    }
  }
  if (any) std::erase_if(active, [&](std::size_t i) { return raster[i] == 0; });
  return any;
}

}  // namespace

BinaryBoundaryMap guo_hall_thin(const BinaryBoundaryMap& map) {
  PaddedRaster raster(map);
  auto active = raster.on_cells();
  guo_hall_in_place(raster, active);
  return raster.to_map();
}

BinaryBoundaryMap thin(const BinaryBoundaryMap& map) {
  PaddedRaster raster(map);
  auto active = raster.on_cells();
  do {
    guo_hall_in_place(raster, active);
  } while (break_blocks_in_place(raster, active));
  return raster.to_map();
}

bool is_removable_without_split(const BinaryBoundaryMap& map, int x, int y) {
  if (x < 0 || y < 0 || x >= map.width() || y >= map.height()) {
    throw std::out_of_range("pixel outside map");
  }
  unsigned ring = 0;
  constexpr std::array<std::array<int, 2>, 8> pos = {
      {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};
  for (int k = 0; k < 8; ++k) {
    const int nx = x + pos[static_cast<std::size_t>(k)][0];
    const int ny = y + pos[static_cast<std::size_t>(k)][1];
    if (nx >= 0 && ny >= 0 && nx < map.width() && ny < map.height() && map.at(nx, ny)) {
      ring |= 1U << k;
    }
  }
  return neighbour_groups(ring) == 1;
}

int scaled_dim(int dim, double factor) {
  return std::max(1, static_cast<int>(std::lround(dim * factor)));
}

EdgeProbabilityMap multiscale_fuse(const Detector& run_detector, const EdgeProbabilityMap& image,
                                   const ScaleSet& scales) {
  if (scales.factors.empty()) {
    throw std::invalid_argument("multiscale_fuse: empty scale set");
  }
  std::vector<EdgeProbabilityMap> outputs;
  outputs.reserve(scales.factors.size());
  for (double factor : scales.factors) {
    if (!(factor > 0.0)) {
      throw std::invalid_argument("scale factors must be > 0");
    }
    const int w = scaled_dim(image.width(), factor);
    const int h = scaled_dim(image.height(), factor);
    const EdgeProbabilityMap scaled = resize_bilinear(image, w, h);
    const EdgeProbabilityMap detected = run_detector(scaled);
    if (detected.width() != w || detected.height() != h) {
      throw DimensionError("detector returned " + std::to_string(detected.width()) + "x" +
                           std::to_string(detected.height()) + " for a " + std::to_string(w) +
                           "x" + std::to_string(h) + " input");
    }
    outputs.push_back(detected);
  }
  return fuse_to_size(outputs, image.width(), image.height());
}

EdgeProbabilityMap fuse_to_size(std::span<const EdgeProbabilityMap> maps, int width, int height) {
  std::vector<EdgeProbabilityMap> restored;
  restored.reserve(maps.size());
  for (const auto& m : maps) restored.push_back(resize_bilinear(m, width, height));
  return average_maps(restored);
}

}  // namespace crispbench
