#pragma once

#include <optional>
#include <string_view>

#include "ringloc/cloud.hpp"
#include "ringloc/cone.hpp"
#include "ringloc/icp.hpp"

namespace ringloc::refine {

enum class PoseQuality { accepted, rejected_cone, rejected_icp };

std::string_view to_string(PoseQuality quality);

struct LocateGates {
  double cone_rms_max = 1.0;  ///< mm
  double icp_rms_max = 0.5;   ///< mm
  /// A cone flattened toward 90 degrees means the cloud has no hole in it.
  double cone_theta_max_deg = 85.0;
  /// Fixed Tukey constant; when unset it is derived from the coarse residuals.
  std::optional<double> k;
};

struct LocateOptions {
  LocateGates gates;
  IcpOptions icp;
  double k_min = 0.05;
};

struct MarkerPose {
  Point3 center = Point3::Zero();     ///< ring base centre (insertion point), camera frame
  Vector3 normal = Vector3::UnitZ();  ///< ring axis pointing out of the surface
  ConeFit cone;                       ///< in the plane-aligned frame
  Point3 cone_apex = Point3::Zero();  ///< cone apex mapped to the camera frame
  RobustIcpResult icp;                ///< template -> camera
  double tukey_k = 0.0;
  PoseQuality quality = PoseQuality::rejected_cone;

  bool accepted() const noexcept { return quality == PoseQuality::accepted; }
};

/// Plane pre-alignment, cone fit, template placement at the apex, then
/// point-to-plane and Tukey ICP. Gate failures come back as a rejected pose;
/// only an empty cloud throws (EmptyCloud).
MarkerPose locate_marker(const PointCloud& roi_cloud, const cloud::RingTemplate& ring_template,
                         const LocateOptions& options = {});

}  // namespace ringloc::refine
