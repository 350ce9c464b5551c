#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "crispbench/edgemap.hpp"

namespace crispbench {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw single-channel samples as stored in the file.
struct GrayImage {
  int width = 0;
  int height = 0;
  int max_value = 255;  // 255 for 8-bit, 65535 for 16-bit, PGM maxval otherwise
  std::vector<std::uint16_t> samples;
};

// The format is picked from the extension: .png or .pgm (binary P5).
GrayImage read_gray_image(const std::filesystem::path& path);
void write_gray_image(const std::filesystem::path& path, const GrayImage& image);

/// Loads a single-channel PNG/PGM and scales samples by the format maximum.
EdgeProbabilityMap load_gray(const std::filesystem::path& path);

/// Writes a map quantized to 8 or 16 bits (round to nearest).
void save_gray(const std::filesystem::path& path, const EdgeProbabilityMap& map,
               int bit_depth = 8);

/// Any nonzero sample is an on-pixel.
BinaryBoundaryMap load_binary(const std::filesystem::path& path);
void save_binary(const std::filesystem::path& path, const BinaryBoundaryMap& map);

}  // namespace crispbench
