#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ringloc/error.hpp"

namespace ringloc {

/// Camera-frame point in millimetres. +z along the optical axis into the
/// scene, +x right, +y down (image raster order).
using Point3 = Eigen::Vector3d;
using Vector3 = Eigen::Vector3d;
using Pixel = Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Rasters
// ---------------------------------------------------------------------------

/// Row-major 2D raster. The tag distinguishes rasters that share a storage
/// type but not a meaning (depth in mm vs. a real-valued filter response).
template <typename T, typename Tag>
class Raster {
 public:
  using value_type = T;

  Raster() = default;

  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    validate();
  }

  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw DimensionMismatch("raster data length does not match width*height");
    }
    validate();
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int u, int v) const noexcept {
    return u >= 0 && v >= 0 && u < width_ && v < height_;
  }

  const T& operator()(int u, int v) const { return data_[index(u, v)]; }
  T& operator()(int u, int v) { return data_[index(u, v)]; }

  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  bool same_shape(int w, int h) const noexcept { return w == width_ && h == height_; }
  template <typename U, typename OtherTag>
  bool same_shape(const Raster<U, OtherTag>& other) const noexcept {
    return other.width() == width_ && other.height() == height_;
  }

  friend bool operator==(const Raster& a, const Raster& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  static void check_dims(int width, int height) {
    if (width < 1 || height < 1) throw InvalidArgument("raster dimensions must be >= 1");
  }

  void validate() const {
    if constexpr (requires(std::span<const T> s) { Tag::validate(s); }) {
      Tag::validate(std::span<const T>(data_));
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct GrayTag {};
struct RealTag {};
struct BinaryTag {};

struct DepthTag {
  static void validate(std::span<const double> values) {
    for (double d : values) {
      if (!std::isfinite(d) || d < 0.0) throw InvalidArgument("depth values must be finite and >= 0");
    }
  }
};

struct MaskTag {
  static void validate(std::span<const std::uint8_t> values) {
    for (auto m : values) {
      if (m > 1) throw InvalidArgument("mask values must be exactly 0 or 1");
    }
  }
};

/// 8-bit grayscale intensities.
using GrayImage = Raster<std::uint8_t, GrayTag>;
/// Depth in millimetres; 0 marks a pixel with no sensor return.
using DepthImage = Raster<double, DepthTag>;
/// Real-valued intermediate image (filter responses before rescaling).
using RealImage = Raster<double, RealTag>;
/// Foreground flags in {0,1} produced by segmentation.
using BinaryImage = Raster<std::uint8_t, BinaryTag>;
/// Crop mask in {0,1}, same shape as the depth map it multiplies.
using Mask = Raster<std::uint8_t, MaskTag>;

// ---------------------------------------------------------------------------
// Camera
// ---------------------------------------------------------------------------

/// Pinhole intrinsics in pixels. Width/height of 0 means "not bound to an image".
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws InvalidArgument when the invariants do not hold.
  void validate() const;
  bool bound() const noexcept { return width > 0 && height > 0; }
};

// ---------------------------------------------------------------------------
// Point clouds and transforms
// ---------------------------------------------------------------------------

class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> points);
  /// Normals must match the point count and be unit length within 1e-6.
  PointCloud(std::vector<Point3> points, std::vector<Vector3> normals);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  bool has_normals() const noexcept { return normals_.has_value(); }

  const std::vector<Point3>& points() const noexcept { return points_; }
  /// Precondition: has_normals().
  const std::vector<Vector3>& normals() const;

  Point3 centroid() const;

 private:
  std::vector<Point3> points_;
  std::optional<std::vector<Vector3>> normals_;
};

class RigidTransform {
 public:
  /// Identity.
  RigidTransform();
  /// Throws InvalidArgument unless R^T R = I and det R = +1 within 1e-9.
  RigidTransform(const Eigen::Matrix3d& rotation, const Vector3& translation);

  static RigidTransform identity() { return {}; }
  /// Projects a nearly orthonormal matrix onto SO(3) before construction.
  static RigidTransform orthonormalized(const Eigen::Matrix3d& rotation, const Vector3& translation);
  static RigidTransform from_axis_angle(const Vector3& axis, double angle_rad,
                                        const Vector3& translation = Vector3::Zero());

  const Eigen::Matrix3d& rotation() const noexcept { return rotation_; }
  const Vector3& translation() const noexcept { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  Vector3 rotate(const Vector3& v) const { return rotation_ * v; }

  RigidTransform inverse() const;
  /// Rotation angle in radians, in [0, pi].
  double rotation_angle() const;
  Eigen::Matrix4d matrix() const;

 private:
  Eigen::Matrix3d rotation_;
  Vector3 translation_;
};

/// (a ∘ b)(p) = a(b(p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t);

// ---------------------------------------------------------------------------
// Marker geometry
// ---------------------------------------------------------------------------

/// Annular marker dimensions in millimetres.
struct RingSpec {
  double outer_diameter = 24.0;
  double inner_diameter = 10.0;
  double thickness = 3.0;

  void validate() const;
  double outer_radius() const noexcept { return outer_diameter / 2.0; }
  double inner_radius() const noexcept { return inner_diameter / 2.0; }
};

}  // namespace ringloc
