#include "ringloc/mask.hpp"

#include <algorithm>

namespace ringloc::roi {

using imgproc::Contour;
using imgproc::PixelCoord;

Contour extract_contour(const GrayImage& image, const detect::RoiBox& roi,
                        const ContourOptions& options) {
  if (roi.w < 1 || roi.h < 1 || roi.x < 0 || roi.y < 0 || roi.x + roi.w > image.width() ||
      roi.y + roi.h > image.height()) {
    throw InvalidArgument("extract_contour: ROI must lie inside the image");
  }
  GrayImage crop(roi.w, roi.h);
  for (int v = 0; v < roi.h; ++v) {
    for (int u = 0; u < roi.w; ++u) crop(u, v) = image(roi.x + u, roi.y + v);
  }
  const auto smooth = imgproc::gaussian_blur(crop, options.gaussian_sigma);
  const auto [lo, hi] = std::minmax_element(smooth.data().begin(), smooth.data().end());
  if (*hi - *lo < options.min_contrast) throw EmptyContour("ROI has no contrast to delineate a blob");

  const auto binary = detect::segment(smooth, detect::OtsuThreshold{});
  const auto regions = detect::connected_components(binary);
  if (regions.empty()) throw EmptyContour("no blob found inside the ROI");
  const auto dominant = std::max_element(regions.begin(), regions.end(),
                                         [](const auto& a, const auto& b) { return a.area < b.area; });
  Contour contour = dominant->outer_contour;
  for (auto& p : contour) {
    p.u += roi.x;
    p.v += roi.y;
  }
  return contour;
}

Mask make_mask(const Contour& contour, int width, int height) {
  if (width < 1 || height < 1) throw InvalidArgument("make_mask: dimensions must be positive");
  if (contour.empty()) throw InvalidArgument("make_mask: empty contour");
  if (!imgproc::is_closed(contour)) throw InvalidArgument("make_mask: contour is not closed");

  // Padded grid: 1 = contour wall, 2 = reached from outside.
  const int pw = width + 2;
  const int ph = height + 2;
  std::vector<std::uint8_t> grid(static_cast<std::size_t>(pw) * ph, 0);
  auto at = [&](int u, int v) -> std::uint8_t& { return grid[static_cast<std::size_t>(v) * pw + u]; };
  for (const auto& p : contour) {
    if (p.u < 0 || p.v < 0 || p.u >= width || p.v >= height) {
      throw InvalidArgument("make_mask: contour leaves the image");
    }
    at(p.u + 1, p.v + 1) = 1;
  }
  // An 8-connected closed curve blocks 4-connected flooding.
  std::vector<PixelCoord> stack{{0, 0}};
  at(0, 0) = 2;
  constexpr int du[4] = {1, -1, 0, 0};
  constexpr int dv[4] = {0, 0, 1, -1};
  while (!stack.empty()) {
    const auto p = stack.back();
    stack.pop_back();
    for (int i = 0; i < 4; ++i) {
      const int u = p.u + du[i];
      const int v = p.v + dv[i];
      if (u < 0 || v < 0 || u >= pw || v >= ph || at(u, v) != 0) continue;
      at(u, v) = 2;
      stack.push_back({u, v});
    }
  }
  Mask mask(width, height);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) mask(u, v) = at(u + 1, v + 1) == 2 ? 0 : 1;
  }
  return mask;
}

Mask dilate_mask(const Mask& mask, int pixels) {
  if (pixels < 0) throw InvalidArgument("dilate_mask: negative dilation");
  BinaryImage current(mask.width(), mask.height(), mask.values());
  for (int i = 0; i < pixels; ++i) current = imgproc::dilate3x3(current);
  return Mask(mask.width(), mask.height(), current.values());
}

Mask mask_and(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw DimensionMismatch("mask_and: shapes differ");
  Mask out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] & b.data()[i];
  return out;
}

std::size_t popcount(const Mask& mask) {
  return static_cast<std::size_t>(std::count(mask.data().begin(), mask.data().end(), 1));
}

CroppedDepth crop_depth(const DepthImage& depth, const Mask& mask) {
  if (!depth.same_shape(mask)) throw DimensionMismatch("crop_depth: depth and mask shapes differ");
  CroppedDepth out{DepthImage(depth.width(), depth.height()), {}};
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const double d = depth(u, v) * mask(u, v);
      out.depth(u, v) = d;
      if (d != 0.0) out.survivors.push_back({u, v, d});
    }
  }
  return out;
}

}  // namespace ringloc::roi
