#include "ringloc/locate.hpp"

#include <cmath>
#include <numbers>

namespace ringloc::refine {
namespace {

// Right-handed frame whose third column is `axis`.
Eigen::Matrix3d frame_from_axis(const Vector3& axis) {
  const Vector3 z = axis.normalized();
  const Vector3 helper = std::abs(z.x()) < 0.9 ? Vector3::UnitX() : Vector3::UnitY();
  const Vector3 x = helper.cross(z).normalized();
  const Vector3 y = z.cross(x);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

}  // namespace

std::string_view to_string(PoseQuality quality) {
  switch (quality) {
    case PoseQuality::accepted:
      return "accepted";
    case PoseQuality::rejected_cone:
      return "rejected_cone";
    case PoseQuality::rejected_icp:
      return "rejected_icp";
  }
  return "unknown";
}

MarkerPose locate_marker(const PointCloud& roi_cloud, const cloud::RingTemplate& ring_template,
                         const LocateOptions& options) {
  if (roi_cloud.empty()) throw EmptyCloud("locate_marker: empty ROI cloud");

  MarkerPose pose;
  pose.center = roi_cloud.centroid();
  const Vector3 fallback_normal = -pose.center.normalized();
  pose.normal = fallback_normal.allFinite() ? fallback_normal : Vector3(-Vector3::UnitZ());

  // Stage A: the aligned frame has +z along the plane normal, toward the camera,
  // so the ring top sits above its hole floor.
  cloud::PlaneFit plane;
  try {
    plane = cloud::fit_plane(roi_cloud);
  } catch (const DegenerateFit&) {
    return pose;
  }
  pose.normal = plane.normal;
  const RigidTransform aligned_to_camera(frame_from_axis(plane.normal), plane.centroid);
  const RigidTransform camera_to_aligned = aligned_to_camera.inverse();
  const PointCloud aligned = transform_cloud(PointCloud(roi_cloud.points()), camera_to_aligned);

  // Stage B.
  try {
    pose.cone = fit_cone(aligned);
  } catch (const Error&) {
    return pose;
  }
  pose.cone_apex = aligned_to_camera.apply(pose.cone.apex);
  if (!(pose.cone.rms <= options.gates.cone_rms_max) ||
      !(pose.cone.half_angle <= options.gates.cone_theta_max_deg * std::numbers::pi / 180.0)) {
    return pose;
  }

  // Stage C: template axis onto the plane normal, centroid over the apex.
  const Point3 seat(pose.cone.apex.x(), pose.cone.apex.y(), 0.0);
  const RigidTransform placement = compose(aligned_to_camera, RigidTransform(Eigen::Matrix3d::Identity(), seat));
  RobustRegistrationOptions reg_options;
  reg_options.icp = options.icp;
  reg_options.fixed_k = options.gates.k;
  reg_options.k_min = options.k_min;
  RobustRegistration reg;
  RigidTransform seated = placement;
  try {
    // Settle the template onto the surface along the normal first. On
    // noiseless step data a large first 6-DoF step would otherwise drag the
    // in-plane position, which planar residuals cannot pull back.
    IcpOptions axial = options.icp;
    axial.translate_along = plane.normal;
    const auto settle = icp_point_to_plane(transform_cloud(ring_template.cloud, placement), roi_cloud,
                                           RigidTransform::identity(), axial);
    if (settle.correspondences > 0) seated = compose(settle.transform, placement);
    reg = register_robust(transform_cloud(ring_template.cloud, seated), roi_cloud, RigidTransform::identity(),
                          reg_options);
  } catch (const Error&) {
    pose.quality = PoseQuality::rejected_icp;
    return pose;
  }
  pose.tukey_k = reg.k;
  pose.icp = reg.refined;
  const RigidTransform total = compose(reg.refined.transform, seated);
  pose.icp.transform = total;
  pose.quality = PoseQuality::rejected_icp;
  if (reg.refined.correspondences == 0 || !std::isfinite(reg.refined.rms_weighted) ||
      !(reg.refined.rms_weighted <= options.gates.icp_rms_max)) {
    return pose;
  }
  pose.center = total.apply(ring_template.base_center);
  pose.normal = total.rotate(Vector3::UnitZ()).normalized();
  if (!pose.center.allFinite()) return pose;
  pose.quality = PoseQuality::accepted;
  return pose;
}

}  // namespace ringloc::refine
