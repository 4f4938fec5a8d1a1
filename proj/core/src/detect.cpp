#include "ringloc/detect.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ringloc::detect {

using imgproc::PixelCoord;

GrayImage equalize_histogram(const GrayImage& image) {
  const auto hist = imgproc::histogram(image);
  const auto levels = std::count_if(hist.begin(), hist.end(), [](auto c) { return c > 0; });
  if (levels <= 1) return image;
  std::array<std::uint8_t, 256> lut{};
  const double total = static_cast<double>(image.size());
  std::uint64_t cdf = 0;
  for (int i = 0; i < 256; ++i) {
    cdf += hist[i];
    lut[i] = static_cast<std::uint8_t>(std::min(255.0, std::floor(255.0 * cdf / total)));
  }
  GrayImage out(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) out.data()[i] = lut[image.data()[i]];
  return out;
}

GrayImage preprocess(const GrayImage& image, PreprocessMode mode, double gaussian_sigma) {
  switch (mode) {
    case PreprocessMode::hist_eq:
      return equalize_histogram(image);
    case PreprocessMode::gaussian:
      return imgproc::gaussian_blur(image, gaussian_sigma);
    case PreprocessMode::hist_eq_gaussian:
      return imgproc::gaussian_blur(equalize_histogram(image), gaussian_sigma);
  }
  return image;
}

int resolve_threshold(const GrayImage& image, const Threshold& threshold) {
  if (const auto* fixed = std::get_if<FixedThreshold>(&threshold)) {
    if (fixed->level < 0 || fixed->level > 255) throw InvalidArgument("threshold level must be 0..255");
    return fixed->level;
  }
  return imgproc::otsu_threshold(imgproc::histogram(image));
}

BinaryImage segment(const GrayImage& image, const Threshold& threshold) {
  const int t = resolve_threshold(image, threshold);
  BinaryImage binary(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) binary.data()[i] = image.data()[i] > t ? 1 : 0;
  return imgproc::open3x3(binary);
}

std::vector<Region> connected_components(const BinaryImage& binary) {
  const int w = binary.width();
  const int h = binary.height();
  std::vector<int> labels(binary.size(), -1);
  std::vector<Region> regions;
  std::vector<PixelCoord> stack;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!binary(u, v) || labels[binary.index(u, v)] >= 0) continue;
      const int label = static_cast<int>(regions.size());
      Region region;
      region.min_u = region.max_u = u;
      region.min_v = region.max_v = v;
      labels[binary.index(u, v)] = label;
      stack.push_back({u, v});
      while (!stack.empty()) {
        const PixelCoord p = stack.back();
        stack.pop_back();
        region.pixels.push_back(p);
        region.min_u = std::min(region.min_u, p.u);
        region.max_u = std::max(region.max_u, p.u);
        region.min_v = std::min(region.min_v, p.v);
        region.max_v = std::max(region.max_v, p.v);
        for (int dv = -1; dv <= 1; ++dv) {
          for (int du = -1; du <= 1; ++du) {
            const int qu = p.u + du;
            const int qv = p.v + dv;
            if (!binary.contains(qu, qv) || !binary(qu, qv)) continue;
            auto& l = labels[binary.index(qu, qv)];
            if (l >= 0) continue;
            l = label;
            stack.push_back({qu, qv});
          }
        }
      }
      // (u, v) is the first pixel of this component in raster order.
      region.outer_contour = imgproc::trace_outer_contour(labels, w, h, label, {u, v});
      region.area = static_cast<double>(region.pixels.size());
      region.perimeter = imgproc::contour_length(region.outer_contour);
      const double poly_area = imgproc::contour_polygon_area(region.outer_contour);
      double circ = 0.0;
      if (poly_area > 0.0 && region.perimeter > 0.0) {
        circ = 4.0 * std::numbers::pi * poly_area / (region.perimeter * region.perimeter);
      } else {
        // Points and one-pixel-wide strokes enclose no polygon area; fall back
        // to the pixel count against a crack-length perimeter.
        const double p = region.perimeter + 4.0;
        circ = 4.0 * std::numbers::pi * region.area / (p * p);
      }
      region.circularity = std::clamp(circ, 1e-6, 1.1);
      regions.push_back(std::move(region));
    }
  }
  return regions;
}

ScreeningBounds default_screening_bounds(const RingSpec& spec, const CameraIntrinsics& intrinsics,
                                         double z_min_mm, double z_max_mm) {
  spec.validate();
  intrinsics.validate();
  if (!(z_min_mm > 0.0 && z_min_mm < z_max_mm)) throw InvalidArgument("invalid depth range");
  const double f = std::sqrt(intrinsics.fx * intrinsics.fy);
  const double r_small = spec.inner_radius() * f / z_max_mm;
  const double r_large = spec.outer_radius() * f / z_min_mm;
  ScreeningBounds bounds;
  bounds.area_min = 0.5 * std::numbers::pi * r_small * r_small;
  bounds.area_max = 1.5 * std::numbers::pi * r_large * r_large;
  return bounds;
}

std::vector<Region> screen_regions(const std::vector<Region>& regions, const ScreeningBounds& bounds) {
  if (!(bounds.area_min > 0.0 && bounds.area_min < bounds.area_max && bounds.circ_min > 0.0)) {
    throw InvalidArgument("screen_regions: thresholds must be positive with area_min < area_max");
  }
  std::vector<Region> kept;
  for (const auto& r : regions) {
    if (r.area >= bounds.area_min && r.area <= bounds.area_max && r.circularity >= bounds.circ_min) {
      kept.push_back(r);
    }
  }
  return kept;
}

CircleFit fit_circle_lsq(std::span<const Pixel> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 3) throw DegenerateFit("circle fit needs at least 3 points");
  Pixel mean = Pixel::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(n);

  // Centred coordinates keep the normal equations well conditioned and make
  // the fit exactly translation-equivariant.
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Pixel d = points[static_cast<std::size_t>(i)] - mean;
    a(i, 0) = d.x();
    a(i, 1) = d.y();
    a(i, 2) = 1.0;
    b(i) = -(d.x() * d.x() + d.y() * d.y());
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s(2) <= 1e-10 * s(0)) throw DegenerateFit("circle fit: points are collinear");
  const Eigen::Vector3d sol = svd.solve(b);
  const double cx = -sol(0) / 2.0;
  const double cy = -sol(1) / 2.0;
  const double r2 = cx * cx + cy * cy - sol(2);
  if (!(r2 > 0.0)) throw DegenerateFit("circle fit: non-positive radius");

  CircleFit fit;
  fit.xc = cx + mean.x();
  fit.yc = cy + mean.y();
  fit.r = std::sqrt(r2);
  double sq = 0.0;
  for (const auto& p : points) {
    const double d = std::hypot(p.x() - fit.xc, p.y() - fit.yc) - fit.r;
    sq += d * d;
  }
  fit.rms = std::sqrt(sq / static_cast<double>(n));
  return fit;
}

std::vector<Detection> detect_rings(const GrayImage& image, const DetectOptions& options) {
  const auto pre = preprocess(image, options.preprocess, options.gaussian_sigma);
  const auto binary = segment(pre, options.threshold);
  const auto regions = connected_components(binary);

  ScreeningBounds bounds;
  if (options.bounds) {
    bounds = *options.bounds;
  } else if (options.intrinsics) {
    bounds = default_screening_bounds(options.ring, *options.intrinsics);
  } else {
    bounds.area_min = 20.0;
    bounds.area_max = 0.25 * static_cast<double>(image.size());
  }

  std::vector<Detection> detections;
  for (const auto& region : screen_regions(regions, bounds)) {
    std::vector<Pixel> pts;
    pts.reserve(region.outer_contour.size());
    for (const auto& c : region.outer_contour) pts.emplace_back(c.u, c.v);
    CircleFit circle;
    try {
      circle = fit_circle_lsq(pts);
    } catch (const DegenerateFit&) {
      continue;
    }
    if (circle.rms > options.rms_max) continue;

    const double half = options.roi_scale * circle.r;
    const int x0 = std::max(0, static_cast<int>(std::floor(circle.xc - half)));
    const int y0 = std::max(0, static_cast<int>(std::floor(circle.yc - half)));
    const int x1 = std::min(image.width() - 1, static_cast<int>(std::ceil(circle.xc + half)));
    const int y1 = std::min(image.height() - 1, static_cast<int>(std::ceil(circle.yc + half)));
    if (x1 < x0 || y1 < y0) continue;

    Detection det;
    det.circle = circle;
    det.circularity = region.circularity;
    det.roi = {x0, y0, x1 - x0 + 1, y1 - y0 + 1, std::min(1.0, region.circularity)};
    detections.push_back(det);
  }
  std::stable_sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
    if (a.circularity != b.circularity) return a.circularity > b.circularity;
    return a.circle.rms < b.circle.rms;
  });
  return detections;
}

RoiDocument ingest_roi(std::string_view document, int image_width, int image_height) {
  if (image_width < 1 || image_height < 1) throw InvalidArgument("ingest_roi: invalid image size");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("ROI document: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("ROI document must be a JSON array");

  RoiDocument result;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "ROI entry " + std::to_string(i);
    if (!item.is_object()) throw ParseError(where + " is not an object");
    for (const char* key : {"x", "y", "w", "h"}) {
      if (!item.contains(key) || !item[key].is_number_integer()) {
        throw ParseError(where + ": field '" + key + "' must be an integer");
      }
    }
    if (!item.contains("score") || !item["score"].is_number()) {
      throw ParseError(where + ": field 'score' must be a number");
    }
    const auto x = item["x"].get<long long>();
    const auto y = item["y"].get<long long>();
    const auto w = item["w"].get<long long>();
    const auto h = item["h"].get<long long>();
    const double score = item["score"].get<double>();
    if (w < 1 || h < 1) throw ParseError(where + ": w and h must be >= 1");
    if (!(score >= 0.0 && score <= 1.0)) throw ParseError(where + ": score must lie in [0, 1]");

    const long long cx0 = std::max(0LL, x);
    const long long cy0 = std::max(0LL, y);
    const long long cx1 = std::min<long long>(image_width, x + w);
    const long long cy1 = std::min<long long>(image_height, y + h);
    if (cx1 <= cx0 || cy1 <= cy0) {
      result.warnings.push_back(where + " lies outside the image and was rejected");
      continue;
    }
    const RoiBox box{static_cast<int>(cx0), static_cast<int>(cy0), static_cast<int>(cx1 - cx0),
                     static_cast<int>(cy1 - cy0), score};
    if (box.x != x || box.y != y || box.w != w || box.h != h) {
      result.warnings.push_back(where + " extended past the image and was clamped");
    }
    result.boxes.push_back(box);
  }
  return result;
}

std::string rois_to_json(std::span<const RoiBox> boxes) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& b : boxes) {
    doc.push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}, {"score", b.score}});
  }
  return doc.dump(2);
}

}  // namespace ringloc::detect
