#include "crispbench/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

namespace crispbench {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw ImageIoError("cannot open " + path.string());
  }
  return f;
}

void check_image_dims(const GrayImage& image, const fs::path& path) {
  if (image.width < 1 || image.height < 1) {
    throw ImageIoError(path.string() + ": zero-dimension image");
  }
}

// ---------------------------------------------------------------------------
// PNG

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

// Everything that touches setjmp lives here; no objects with destructors are
// created between setjmp and the libpng calls.
bool png_read_header(png_structp png, png_infop info, std::FILE* f, PngHeader* header) {
  if (setjmp(png_jmpbuf(png))) {
    return false;
  }
  png_init_io(png, f);
  png_read_info(png, info);
  png_get_IHDR(png, info, &header->width, &header->height, &header->bit_depth,
               &header->color_type, nullptr, nullptr, nullptr);
  return true;
}

bool png_read_rows(png_structp png, png_infop info, png_bytep* rows, int low_bit_depth) {
  if (setjmp(png_jmpbuf(png))) {
    return false;
  }
  if (low_bit_depth) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  png_read_update_info(png, info);
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  return true;
}

GrayImage read_png(const fs::path& path) {
  FilePtr f = open_file(path, "rb");
  png_byte signature[8];
  if (std::fread(signature, 1, 8, f.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw ImageIoError(path.string() + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw ImageIoError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ImageIoError("libpng: out of memory");
  }
  png_set_sig_bytes(png, 8);

  PngHeader header;
  if (!png_read_header(png, info, f.get(), &header)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError(path.string() + ": corrupt PNG header");
  }
  if (header.color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError(path.string() + ": expected a single-channel grayscale PNG");
  }

  GrayImage image;
  image.width = static_cast<int>(header.width);
  image.height = static_cast<int>(header.height);
  if (image.width < 1 || image.height < 1) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError(path.string() + ": zero-dimension image");
  }
  const bool wide = header.bit_depth == 16;
  image.max_value = wide ? 65535 : 255;
  const std::size_t row_bytes = static_cast<std::size_t>(image.width) * (wide ? 2 : 1);
  std::vector<png_byte> buffer(row_bytes * static_cast<std::size_t>(image.height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    rows[static_cast<std::size_t>(y)] = buffer.data() + row_bytes * static_cast<std::size_t>(y);
  }
  const bool ok = png_read_rows(png, info, rows.data(), header.bit_depth < 8 ? 1 : 0);
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) {
    throw ImageIoError(path.string() + ": corrupt PNG data");
  }

  image.samples.resize(static_cast<std::size_t>(image.width) * image.height);
  for (std::size_t i = 0; i < image.samples.size(); ++i) {
    image.samples[i] = wide ? static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1])
                            : buffer[i];
  }
  return image;
}

bool png_write_all(png_structp png, png_infop info, std::FILE* f, const GrayImage& image,
                   png_bytep* rows) {
  if (setjmp(png_jmpbuf(png))) {
    return false;
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), image.max_value > 255 ? 16 : 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

void write_png(const fs::path& path, const GrayImage& image) {
  if (image.max_value != 255 && image.max_value != 65535) {
    throw ImageIoError("PNG output supports only 8-bit or 16-bit samples");
  }
  const bool wide = image.max_value > 255;
  const std::size_t row_bytes = static_cast<std::size_t>(image.width) * (wide ? 2 : 1);
  std::vector<png_byte> buffer(row_bytes * static_cast<std::size_t>(image.height));
  for (std::size_t i = 0; i < image.samples.size(); ++i) {
    if (wide) {
      buffer[2 * i] = static_cast<png_byte>(image.samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(image.samples[i] & 0xff);
    } else {
      buffer[i] = static_cast<png_byte>(image.samples[i]);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    rows[static_cast<std::size_t>(y)] = buffer.data() + row_bytes * static_cast<std::size_t>(y);
  }

  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw ImageIoError("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw ImageIoError("libpng: out of memory");
  }
  const bool ok = png_write_all(png, info, f.get(), image, rows.data());
  png_destroy_write_struct(&png, &info);
  if (!ok) {
    throw ImageIoError("failed writing " + path.string());
  }
}

// ---------------------------------------------------------------------------
// PGM (binary P5)

int read_pgm_int(std::istream& in) {
  int c = in.get();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    }
    c = in.get();
  }
  if (!in || !std::isdigit(c)) {
    throw ImageIoError("malformed PGM header");
  }
  long value = 0;
  while (in && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 24) throw ImageIoError("PGM header value out of range");
    c = in.get();
  }
  return static_cast<int>(value);
}

GrayImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P') {
    throw ImageIoError(path.string() + ": not a PGM file");
  }
  if (magic[1] == '6' || magic[1] == '3') {
    throw ImageIoError(path.string() + ": expected a single-channel image, got PPM");
  }
  if (magic[1] != '5') {
    throw ImageIoError(path.string() + ": only binary P5 PGM is supported");
  }
  GrayImage image;
  try {
    image.width = read_pgm_int(in);
    image.height = read_pgm_int(in);
    image.max_value = read_pgm_int(in);
  } catch (const ImageIoError& e) {
    throw ImageIoError(path.string() + ": " + e.what());
  }
  check_image_dims(image, path);
  if (image.max_value < 1 || image.max_value > 65535) {
    throw ImageIoError(path.string() + ": invalid PGM maxval");
  }
  const bool wide = image.max_value > 255;
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  std::vector<unsigned char> raw(n * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw ImageIoError(path.string() + ": truncated PGM data");
  }
  image.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    image.samples[i] =
        wide ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]) : raw[i];
    if (image.samples[i] > image.max_value) {
      throw ImageIoError(path.string() + ": sample exceeds maxval");
    }
  }
  return image;
}

void write_pgm(const fs::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << '\n' << image.max_value << '\n';
  const bool wide = image.max_value > 255;
  std::vector<unsigned char> raw(image.samples.size() * (wide ? 2 : 1));
  for (std::size_t i = 0; i < image.samples.size(); ++i) {
    if (wide) {
      raw[2 * i] = static_cast<unsigned char>(image.samples[i] >> 8);
      raw[2 * i + 1] = static_cast<unsigned char>(image.samples[i] & 0xff);
    } else {
      raw[i] = static_cast<unsigned char>(image.samples[i]);
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw ImageIoError("failed writing " + path.string());
}

}  // namespace

GrayImage read_gray_image(const fs::path& path) {
  if (!fs::exists(path)) {
    throw ImageIoError(path.string() + ": no such file");
  }
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  throw ImageIoError(path.string() + ": unsupported extension (expected .png or .pgm)");
}

void write_gray_image(const fs::path& path, const GrayImage& image) {
  check_image_dims(image, path);
  if (image.samples.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw ImageIoError("sample count does not match dimensions");
  }
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, image);
  if (ext == ".pgm") return write_pgm(path, image);
  throw ImageIoError(path.string() + ": unsupported extension (expected .png or .pgm)");
}

EdgeProbabilityMap load_gray(const fs::path& path) {
  const GrayImage image = read_gray_image(path);
  std::vector<double> values(image.samples.size());
  const double scale = 1.0 / image.max_value;
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = image.samples[i] == image.max_value ? 1.0 : image.samples[i] * scale;
  }
  return EdgeProbabilityMap(image.width, image.height, std::move(values));
}

void save_gray(const fs::path& path, const EdgeProbabilityMap& map, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw std::invalid_argument("bit depth must be 8 or 16");
  }
  GrayImage image;
  image.width = map.width();
  image.height = map.height();
  image.max_value = bit_depth == 8 ? 255 : 65535;
  image.samples.resize(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    image.samples[i] = static_cast<std::uint16_t>(std::lround(map.values()[i] * image.max_value));
  }
  write_gray_image(path, image);
}

BinaryBoundaryMap load_binary(const fs::path& path) {
  const GrayImage image = read_gray_image(path);
  std::vector<std::uint8_t> bits(image.samples.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = image.samples[i] != 0 ? 1 : 0;
  return BinaryBoundaryMap(image.width, image.height, std::move(bits));
}

void save_binary(const fs::path& path, const BinaryBoundaryMap& map) {
  GrayImage image;
  image.width = map.width();
  image.height = map.height();
  image.max_value = 255;
  image.samples.resize(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) image.samples[i] = map.bits()[i] ? 255 : 0;
  write_gray_image(path, image);
}

}  // namespace crispbench
