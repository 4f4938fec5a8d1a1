#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "ringloc/mask.hpp"
#include "ringloc/types.hpp"

namespace ringloc::cloud {

/// One camera-frame point per surviving depth sample, in input order.
/// Throws EmptyCloud for an empty survivor list.
PointCloud depth_to_cloud(std::span<const roi::DepthSample> survivors,
                          const CameraIntrinsics& intrinsics);

/// Drops points farther than max_extent_mm / 2 from the coordinate-wise median.
PointCloud clamp_extent(const PointCloud& cloud, double max_extent_mm);

/// Per-point unit normal from the smallest eigenvector of the k-nearest-
/// neighbour covariance (the point itself included), oriented toward the
/// camera origin. Requires size > k >= 3. Throws DegenerateFit when a
/// neighbourhood is collinear (rank-deficient covariance).
PointCloud estimate_normals(const PointCloud& cloud, std::size_t k = 20);

struct PlaneFit {
  Point3 centroid;
  Vector3 normal;             ///< unit, oriented toward the camera origin
  Eigen::Vector3d eigenvalues;  ///< covariance eigenvalues, ascending
  double rms = 0.0;           ///< rms distance to the plane
};

/// Total least squares plane via PCA. Requires at least 3 points.
PlaneFit fit_plane(const PointCloud& cloud);

enum class TemplateShape {
  flat,    ///< top face only
  shell,   ///< top face plus inner and outer walls
  seated,  ///< shell plus the surface it rests on: hole floor and a collar
};

/// Width of the surface collar around a seated template, mm.
inline constexpr double kSeatedCollar = 3.0;

/// Ideal marker model in template coordinates: axis +z, centroid at the origin.
struct RingTemplate {
  PointCloud cloud;
  RingSpec spec;
  double sample_spacing = 0.0;
  TemplateShape shape = TemplateShape::flat;
  /// Centre of the ring's base (the skin contact point) in template coordinates.
  Point3 base_center = Point3::Zero();
};

/// Polar-grid sampling with per-circle counts proportional to circumference,
/// giving near-uniform areal density. The top face sits at z = thickness for
/// shell and seated shapes, the base at z = 0, before centring. Requires
/// 0 < spacing <= (outer_radius - inner_radius) / 4.
RingTemplate make_ring_template(const RingSpec& spec, double sample_spacing,
                                TemplateShape shape = TemplateShape::flat);

/// ASCII PLY with x y z and, when present, nx ny nz vertex properties.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
std::string to_ply(const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);
PointCloud parse_ply(const std::string& text);

}  // namespace ringloc::cloud
