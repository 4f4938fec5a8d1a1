#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ringloc/imgproc.hpp"
#include "ringloc/types.hpp"

namespace ringloc::detect {

/// Axis-aligned region of interest in pixels with a confidence in [0, 1].
struct RoiBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;
  double score = 1.0;

  friend bool operator==(const RoiBox&, const RoiBox&) = default;
};

struct CircleFit {
  double xc = 0.0;
  double yc = 0.0;
  double r = 0.0;
  double rms = 0.0;
};

/// 8-connected foreground component.
struct Region {
  std::vector<imgproc::PixelCoord> pixels;
  double area = 0.0;         ///< pixel count
  double perimeter = 0.0;    ///< outer contour length
  double circularity = 0.0;  ///< 4 pi A / P^2 of the outer contour polygon
  imgproc::Contour outer_contour;
  int min_u = 0, min_v = 0, max_u = 0, max_v = 0;
};

enum class PreprocessMode { hist_eq, gaussian, hist_eq_gaussian };

struct FixedThreshold {
  int level = 128;
};
struct OtsuThreshold {};
using Threshold = std::variant<FixedThreshold, OtsuThreshold>;

/// Maps each level through the normalised CDF: v -> floor(255 * cdf(v) / N).
/// An image holding a single level is returned unchanged.
GrayImage equalize_histogram(const GrayImage& image);

GrayImage preprocess(const GrayImage& image, PreprocessMode mode, double gaussian_sigma = 1.5);

/// Foreground is value > threshold, followed by a 3x3 opening.
BinaryImage segment(const GrayImage& image, const Threshold& threshold);

/// Threshold actually applied by segment() for the given image.
int resolve_threshold(const GrayImage& image, const Threshold& threshold);

std::vector<Region> connected_components(const BinaryImage& binary);

struct ScreeningBounds {
  double area_min = 0.0;
  double area_max = 0.0;
  double circ_min = 0.7;
};

/// Area bounds that cover the projected inner-hole disk at the far end of the
/// depth range through the projected outer disk at the near end, with 50%
/// slack either side.
ScreeningBounds default_screening_bounds(const RingSpec& spec, const CameraIntrinsics& intrinsics,
                                         double z_min_mm = 300.0, double z_max_mm = 500.0);

std::vector<Region> screen_regions(const std::vector<Region>& regions, const ScreeningBounds& bounds);

/// Algebraic (Kasa) least-squares circle: minimises
/// sum(((x - xc)^2 + (y - yc)^2 - R^2)^2) in closed form. rms is the
/// geometric residual sqrt(mean((d_i - R)^2)).
/// Throws DegenerateFit for fewer than 3 points or collinear input.
CircleFit fit_circle_lsq(std::span<const Pixel> points);

struct Detection {
  RoiBox roi;
  CircleFit circle;
  double circularity = 0.0;
};

struct DetectOptions {
  PreprocessMode preprocess = PreprocessMode::gaussian;
  double gaussian_sigma = 1.5;
  Threshold threshold = OtsuThreshold{};
  /// When unset and intrinsics are given, bounds come from default_screening_bounds.
  std::optional<ScreeningBounds> bounds;
  std::optional<CameraIntrinsics> intrinsics;
  RingSpec ring;
  double rms_max = 1.5;
  /// ROI half-size as a multiple of the fitted radius.
  double roi_scale = 1.5;
};

/// Classical chain: preprocess, segment, components, screening, per-region
/// outer-contour circle fit. Ordered best first: highest circularity, then
/// lowest fit rms. No candidates is an empty list, not an error.
std::vector<Detection> detect_rings(const GrayImage& image, const DetectOptions& options = {});

struct RoiDocument {
  std::vector<RoiBox> boxes;
  std::vector<std::string> warnings;
};

/// Parses a JSON array of {"x","y","w","h","score"} objects and clamps each box
/// to the image. Boxes that are empty after clamping are dropped with a warning.
/// Throws ParseError for malformed documents.
RoiDocument ingest_roi(std::string_view document, int image_width, int image_height);

std::string rois_to_json(std::span<const RoiBox> boxes);

}  // namespace ringloc::detect
