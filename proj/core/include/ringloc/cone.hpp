#pragma once

#include <optional>

#include "ringloc/types.hpp"

namespace ringloc::refine {

/// Z-aligned cone: apex (x0, y0, z0), half-angle theta between the axis and
/// the surface. Surface points satisfy sqrt((x-x0)^2 + (y-y0)^2) / (z-z0) = tan(theta).
struct ConeParams {
  double x0 = 0.0;
  double y0 = 0.0;
  double z0 = 0.0;
  double theta = 0.0;
};

/// Guard band keeping tan(theta) away from 0 and infinity.
inline constexpr double kConeThetaMin = 1e-3;

struct ConeFit {
  Point3 apex = Point3::Zero();
  double half_angle = 0.0;  ///< radians
  double rms = 0.0;         ///< mm
  std::size_t inlier_count = 0;
  int iterations = 0;
};

/// z - (z0 + rho / tan(theta)). Throws InvalidArgument when theta leaves
/// (kConeThetaMin, pi/2 - kConeThetaMin).
double cone_residual(const ConeParams& params, const Point3& p);

/// d residual / d (x0, y0, z0, theta). At the apex the radial derivative is
/// taken as zero.
Eigen::Vector4d cone_residual_gradient(const ConeParams& params, const Point3& p);

struct ConeFitOptions {
  std::optional<ConeParams> init;
  int max_iterations = 200;
  double step_tolerance = 1e-9;
  /// Points with |residual| <= this multiple of the rms count as inliers.
  double inlier_sigma = 2.5;
};

/// Raised when Levenberg-Marquardt exhausts its iterations.
class ConeFitNotConverged : public Error {
 public:
  ConeFitNotConverged(const std::string& what, const ConeParams& last)
      : Error(what), last_(last) {}
  const ConeParams& last_iterate() const noexcept { return last_; }

 private:
  ConeParams last_;
};

/// Levenberg-Marquardt over (x0, y0, z0, theta) minimising the sum of squared
/// cone residuals. Default start: centroid xy, min z - 1 mm, 60 degrees;
/// damping 1e-3, x10 on rejection, /10 on acceptance.
///
/// Throws InvalidArgument for fewer than 10 points, ConeFitNotConverged, and
/// DegenerateFit when the cloud is planar and theta ends pinned at a bound.
ConeFit fit_cone(const PointCloud& cloud, const ConeFitOptions& options = {});

}  // namespace ringloc::refine
