#include "ringloc/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace ringloc::io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open(const std::filesystem::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

struct RawPng {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int channels = 0;
  std::vector<std::uint16_t> samples;  // row-major, interleaved channels
};

// libpng reports errors by longjmp; everything it touches is a plain buffer
// owned by this frame, so nothing with a destructor is skipped.
bool read_raw(std::FILE* file, RawPng& out, std::string& message) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) {
    message = "libpng init failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    message = "malformed PNG";
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  png_set_expand(png);  // palette and low-bit gray to 8 bit
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  out.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int v = 0; v < out.height; ++v) rows[v] = buffer.data() + stride * v;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.samples[i] = out.bit_depth == 16
                         ? static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1])
                         : buffer[i];
  }
  return true;
}

RawPng read_raw(const std::filesystem::path& path) {
  auto file = open(path, "rb");
  png_byte sig[8] = {};
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ParseError(path.string() + " is not a PNG file");
  }
  std::rewind(file.get());
  RawPng raw;
  std::string message;
  if (!read_raw(file.get(), raw, message)) throw ParseError(path.string() + ": " + message);
  if (raw.width < 1 || raw.height < 1) throw ParseError(path.string() + ": empty image");
  return raw;
}

bool write_raw(std::FILE* file, int width, int height, int bit_depth, const std::vector<png_byte>& buffer) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  std::vector<png_const_bytep> rows(static_cast<std::size_t>(height));
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * (bit_depth / 8);
  for (int v = 0; v < height; ++v) rows[v] = buffer.data() + stride * v;
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_gray(const std::filesystem::path& path, int width, int height, int bit_depth,
                const std::vector<png_byte>& buffer) {
  auto file = open(path, "wb");
  if (!write_raw(file.get(), width, height, bit_depth, buffer)) throw IoError("failed writing " + path.string());
  if (std::fflush(file.get()) != 0) throw IoError("failed writing " + path.string());
}

}  // namespace

GrayImage read_gray_png(const std::filesystem::path& path) {
  const RawPng raw = read_raw(path);
  const int colour = raw.channels >= 3 ? 3 : 1;
  const double full = raw.bit_depth == 16 ? 65535.0 : 255.0;
  GrayImage out(raw.width, raw.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto* px = &raw.samples[i * raw.channels];
    double y = px[0];
    if (colour == 3) y = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    out.data()[i] = static_cast<std::uint8_t>(std::lround(y * 255.0 / full));
  }
  return out;
}

void write_gray_png(const std::filesystem::path& path, const GrayImage& image) {
  write_gray(path, image.width(), image.height(), 8, std::vector<png_byte>(image.data().begin(), image.data().end()));
}

DepthImage read_depth_png(const std::filesystem::path& path) {
  const RawPng raw = read_raw(path);
  if (raw.channels != 1 || raw.bit_depth != 16) {
    throw ParseError(path.string() + ": depth PNG must be single-channel 16-bit");
  }
  DepthImage out(raw.width, raw.height);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = raw.samples[i] / kDepthPngScale;
  return out;
}

void write_depth_png(const std::filesystem::path& path, const DepthImage& depth) {
  std::vector<png_byte> buffer(depth.size() * 2);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double scaled = std::round(depth.data()[i] * kDepthPngScale);
    if (scaled > 65535.0) throw InvalidArgument("write_depth_png: depth exceeds the 16-bit range");
    const auto value = static_cast<std::uint16_t>(scaled);
    buffer[2 * i] = static_cast<png_byte>(value >> 8);
    buffer[2 * i + 1] = static_cast<png_byte>(value & 0xff);
  }
  write_gray(path, depth.width(), depth.height(), 16, buffer);
}

}  // namespace ringloc::io
