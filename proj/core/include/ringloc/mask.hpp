#pragma once

#include <vector>

#include "ringloc/detect.hpp"
#include "ringloc/imgproc.hpp"
#include "ringloc/types.hpp"

namespace ringloc::roi {

struct ContourOptions {
  double gaussian_sigma = 1.5;
  /// A ROI whose smoothed intensity range is below this holds no blob.
  int min_contrast = 12;
};

/// Outer contour of the largest bright blob inside `roi`, in full-image pixel
/// coordinates, traced on a smoothed crop thresholded with Otsu over the ROI
/// alone. Throws EmptyContour when no blob is found.
imgproc::Contour extract_contour(const GrayImage& image, const detect::RoiBox& roi,
                                 const ContourOptions& options = {});

/// Filled mask of the region bounded by a closed contour: the contour pixels
/// and everything they enclose (interior holes included) are 1.
/// Throws InvalidArgument for empty or open contours.
Mask make_mask(const imgproc::Contour& contour, int width, int height);

/// Grows the mask by `pixels` 3x3 dilation steps.
Mask dilate_mask(const Mask& mask, int pixels);

Mask mask_and(const Mask& a, const Mask& b);

std::size_t popcount(const Mask& mask);

struct DepthSample {
  int u = 0;
  int v = 0;
  double depth = 0.0;
  friend bool operator==(const DepthSample&, const DepthSample&) = default;
};

struct CroppedDepth {
  DepthImage depth;                     ///< depth * mask
  std::vector<DepthSample> survivors;   ///< nonzero entries, row-major order
};

/// Elementwise product of depth and mask. Depth never passes through 8 bits.
CroppedDepth crop_depth(const DepthImage& depth, const Mask& mask);

}  // namespace ringloc::roi
