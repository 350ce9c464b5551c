#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "crispbench/edgemap.hpp"
#include "crispbench/tensor.hpp"

namespace crispbench::testing {

/// Candidate pairs (pred pixel index, gt pixel index, distance) within max_dist.
struct SmallGraph {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;  // row -> (col, distance)
};

SmallGraph small_graph(const BinaryBoundaryMap& pred, const BinaryBoundaryMap& gt,
                       double max_dist);

/// Maximum matching size by exhaustive branch-and-bound search.
std::size_t exhaustive_max_matching(const SmallGraph& g);

/// Smallest total distance over all maximum-cardinality matchings, by full
/// enumeration. Only for tiny graphs.
std::pair<std::size_t, double> exhaustive_min_cost(const SmallGraph& g);

/// Cross-correlation written as six nested loops with zero padding.
net::Tensor4 naive_conv(const net::Tensor4& x, const net::Tensor4& w, const std::vector<double>& b,
                        int pad);

}  // namespace crispbench::testing
