#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ringloc/types.hpp"

namespace ringloc::imgproc {

struct PixelCoord {
  int u = 0;
  int v = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Closed 8-connected boundary loop; the last pixel is adjacent to the first
/// and is not repeated.
using Contour = std::vector<PixelCoord>;

/// Separable Gaussian blur with mirrored borders. The kernel is truncated at
/// 4 sigma and normalised, so interior mass is conserved.
RealImage gaussian_blur(const RealImage& image, double sigma);
GrayImage gaussian_blur(const GrayImage& image, double sigma);

/// 3x3 Sobel gradient magnitude (replicated borders).
RealImage sobel_magnitude(const RealImage& image);

std::array<std::uint64_t, 256> histogram(const GrayImage& image);

/// Otsu threshold by exhaustive search over 0..255. Foreground is value > t.
int otsu_threshold(const std::array<std::uint64_t, 256>& hist);

/// 3x3 square structuring element; pixels outside the image count as background.
BinaryImage erode3x3(const BinaryImage& image);
BinaryImage dilate3x3(const BinaryImage& image);
BinaryImage open3x3(const BinaryImage& image);

/// Outer boundary of the 8-connected component containing `start`, which must
/// be the first pixel of that component in raster order. Moore-neighbour
/// tracing with Jacob's stopping criterion.
Contour trace_outer_contour(const std::vector<int>& labels, int width, int height, int label,
                            PixelCoord start);

/// True when every pair of consecutive pixels (including last -> first) is
/// 8-adjacent.
bool is_closed(const Contour& contour);

/// Perimeter from the chain code with the Vossepoel-Smeulders weights
/// (0.980 per axial step, 1.406 per diagonal step, -0.091 per corner).
double contour_length(const Contour& contour);

/// Shoelace area of the polygon through the contour pixel centres.
double contour_polygon_area(const Contour& contour);

}  // namespace ringloc::imgproc
