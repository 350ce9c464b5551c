#include "crispbench/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace crispbench::net {

std::string Shape4::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

namespace {

void check_shape(const Shape4& s) {
  if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1) {
    throw std::invalid_argument("tensor dims must all be >= 1, got " + s.str());
  }
}

}  // namespace

Tensor4::Tensor4(Shape4 shape, double fill) : shape_(shape) {
  check_shape(shape_);
  data_.assign(shape_.volume(), fill);
}

Tensor4::Tensor4(Shape4 shape, std::vector<double> values)
    : shape_(shape), data_(std::move(values)) {
  check_shape(shape_);
  if (data_.size() != shape_.volume()) {
    throw std::invalid_argument("value count does not match shape " + shape_.str());
  }
}

double max_abs_diff(const Tensor4& a, const Tensor4& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

SeededRng::SeededRng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t SeededRng::next() { return engine_(); }

double SeededRng::uniform(double lo, double hi) {
  // Top 53 bits -> [0, 1).
  const double unit = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

Tensor4 random_tensor(Shape4 shape, SeededRng& rng, double lo, double hi) {
  Tensor4 t(shape);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw std::runtime_error("truncated tensor file");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor4& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const Shape4& s = t.shape();
  for (int d : {s.n, s.c, s.h, s.w}) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (double v : t.data()) put_le<double>(out, v);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Tensor4 read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint32_t dims[4];
  for (auto& d : dims) {
    d = get_le<std::uint32_t>(in);
    if (d == 0 || d > (1U << 24)) throw std::runtime_error(path.string() + ": bad tensor dims");
  }
  Shape4 shape{static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
               static_cast<int>(dims[3])};
  std::vector<double> values(shape.volume());
  for (double& v : values) v = get_le<double>(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error(path.string() + ": trailing bytes after tensor data");
  }
  return Tensor4(shape, std::move(values));
}

}  // namespace crispbench::net
