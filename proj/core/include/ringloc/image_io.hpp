#pragma once

#include <filesystem>

#include "ringloc/types.hpp"

namespace ringloc::io {

/// Depth PNGs store unsigned 16-bit values in tenths of a millimetre.
inline constexpr double kDepthPngScale = 10.0;

/// Reads any 8/16-bit PNG as 8-bit gray (colour is reduced to luma).
GrayImage read_gray_png(const std::filesystem::path& path);
void write_gray_png(const std::filesystem::path& path, const GrayImage& image);

/// Reads a single-channel 16-bit PNG; value / 10 gives mm and 0 stays invalid.
DepthImage read_depth_png(const std::filesystem::path& path);
/// Rounds to 0.1 mm. Throws InvalidArgument beyond 6553.5 mm.
void write_depth_png(const std::filesystem::path& path, const DepthImage& depth);

}  // namespace ringloc::io
