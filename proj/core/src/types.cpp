#include "ringloc/types.hpp"

#include <Eigen/SVD>

#include <algorithm>

namespace ringloc {

void CameraIntrinsics::validate() const {
  if (!(std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) && std::isfinite(cy))) {
    throw InvalidArgument("intrinsics must be finite");
  }
  if (fx <= 0.0 || fy <= 0.0) throw InvalidArgument("focal lengths must be positive");
  if (width < 0 || height < 0) throw InvalidArgument("image dimensions must be non-negative");
  if (bound()) {
    if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
      throw InvalidArgument("principal point lies outside the image");
    }
  }
}

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  for (const auto& p : points_) {
    if (!p.allFinite()) throw InvalidArgument("point cloud contains a non-finite point");
  }
}

PointCloud::PointCloud(std::vector<Point3> points, std::vector<Vector3> normals)
    : PointCloud(std::move(points)) {
  if (normals.size() != points_.size()) {
    throw DimensionMismatch("normal count does not match point count");
  }
  for (const auto& n : normals) {
    if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-6) {
      throw InvalidArgument("normals must be unit length");
    }
  }
  normals_ = std::move(normals);
}

const std::vector<Vector3>& PointCloud::normals() const {
  if (!normals_) throw InvalidArgument("point cloud has no normals");
  return *normals_;
}

Point3 PointCloud::centroid() const {
  if (points_.empty()) throw EmptyCloud("centroid of an empty cloud");
  Point3 sum = Point3::Zero();
  for (const auto& p : points_) sum += p;
  return sum / static_cast<double>(points_.size());
}

RigidTransform::RigidTransform()
    : rotation_(Eigen::Matrix3d::Identity()), translation_(Vector3::Zero()) {}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Vector3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvalidArgument("rigid transform must be finite");
  }
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InvalidArgument("rotation is not a proper orthonormal matrix");
  }
}

RigidTransform RigidTransform::orthonormalized(const Eigen::Matrix3d& rotation,
                                               const Vector3& translation) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return {svd.matrixU() * d * svd.matrixV().transpose(), translation};
}

RigidTransform RigidTransform::from_axis_angle(const Vector3& axis, double angle_rad,
                                               const Vector3& translation) {
  if (axis.norm() == 0.0) throw InvalidArgument("rotation axis must be nonzero");
  return orthonormalized(Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix(),
                         translation);
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(inv.rotation_ * translation_);
  return inv;
}

double RigidTransform::rotation_angle() const {
  const double c = std::clamp((rotation_.trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses precision near 0; use the skew part there.
  const Vector3 skew(rotation_(2, 1) - rotation_(1, 2), rotation_(0, 2) - rotation_(2, 0),
                     rotation_(1, 0) - rotation_(0, 1));
  return std::atan2(skew.norm() / 2.0, c);
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform::orthonormalized(a.rotation() * b.rotation(),
                                         a.rotation() * b.translation() + a.translation());
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  std::vector<Point3> points;
  points.reserve(cloud.size());
  for (const auto& p : cloud.points()) points.push_back(t.apply(p));
  if (!cloud.has_normals()) return PointCloud(std::move(points));
  std::vector<Vector3> normals;
  normals.reserve(cloud.size());
  for (const auto& n : cloud.normals()) normals.push_back(t.rotate(n).normalized());
  return PointCloud(std::move(points), std::move(normals));
}

void RingSpec::validate() const {
  if (!(std::isfinite(outer_diameter) && std::isfinite(inner_diameter) && std::isfinite(thickness))) {
    throw InvalidArgument("ring dimensions must be finite");
  }
  if (!(inner_diameter > 0.0 && inner_diameter < outer_diameter)) {
    throw InvalidArgument("ring requires 0 < inner_diameter < outer_diameter");
  }
  if (!(thickness > 0.0)) throw InvalidArgument("ring thickness must be positive");
}

}  // namespace ringloc
