#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace crispbench::net {

/// (batch, channels, height, width). Kernels reuse the same layout as
/// (out_ch, in_ch, kh, kw).
struct Shape4 {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t volume() const {
    return static_cast<std::size_t>(n) * c * static_cast<std::size_t>(h) * w;
  }
  std::string str() const;
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense rank-4 tensor of doubles, row-major in (n, c, h, w).
class Tensor4 {
 public:
  Tensor4() : Tensor4(Shape4{}) {}
  explicit Tensor4(Shape4 shape, double fill = 0.0);
  Tensor4(Shape4 shape, std::vector<double> values);

  const Shape4& shape() const { return shape_; }
  int batch() const { return shape_.n; }
  int channels() const { return shape_.c; }
  int height() const { return shape_.h; }
  int width() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }

  std::size_t offset(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  double& at(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
  const double& at(int n, int c, int y, int x) const { return data_[offset(n, c, y, x)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_;
  std::vector<double> data_;
};

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Tensor4& a, const Tensor4& b);

/// Deterministic generator for parameters and test inputs. Built on
/// std::mt19937_64, whose output sequence is fixed by the standard, with a
/// hand-rolled double conversion so values are identical on every platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  std::uint64_t next();

 private:
  std::mt19937_64 engine_;
};

Tensor4 random_tensor(Shape4 shape, SeededRng& rng, double lo = -1.0, double hi = 1.0);

// File format: four little-endian uint32 dims (n, c, h, w) followed by the
// values as little-endian IEEE-754 float64.
void write_tensor(const std::filesystem::path& path, const Tensor4& t);
Tensor4 read_tensor(const std::filesystem::path& path);

}  // namespace crispbench::net
