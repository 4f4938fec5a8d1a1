#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "ringloc/cloud.hpp"
#include "ringloc/error.hpp"
#include "ringloc/mask.hpp"
#include "ringloc/simulate.hpp"
#include "test_support.hpp"

namespace ringloc::cloud {
namespace {

const CameraIntrinsics kCam{600.0, 600.0, 320.0, 240.0, 640, 480};

double angle_deg(const Vector3& a, const Vector3& b) {
  return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

TEST(DepthToCloud, PrincipalPointSurvivor) {
  const std::vector<roi::DepthSample> s{{320, 240, 400.0}};
  const auto c = depth_to_cloud(s, kCam);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_LT((c.points()[0] - Point3(0, 0, 400)).norm(), 1e-12);
}

TEST(DepthToCloud, SimilarTriangles) {
  const CameraIntrinsics cam{100.0, 100.0, 50.0, 50.0, 400, 100};
  const std::vector<roi::DepthSample> s{{10, 20, 250.0}, {110, 20, 250.0}};
  const auto c = depth_to_cloud(s, cam);
  EXPECT_NEAR(c.points()[1].x() - c.points()[0].x(), 250.0, 1e-12);
  EXPECT_THROW(depth_to_cloud({}, cam), EmptyCloud);
}

TEST(DepthToCloud, RingRenderPlaneMatchesTilt) {
  auto cfg = testing::default_scene(2, 400.0, 30.0);
  cfg.noise = sim::NoiseModel::none();
  const auto frame = sim::render(cfg);
  const auto& t = frame.truth;
  // Disk of twice the projected outer radius around the projected centre.
  Mask mask(frame.depth.width(), frame.depth.height(), 0);
  for (int v = 0; v < mask.height(); ++v)
    for (int u = 0; u < mask.width(); ++u)
      if (std::hypot(u - t.projected_center.x(), v - t.projected_center.y()) < 2.0 * t.projected_outer_radius)
        mask(u, v) = 1;
  const auto cropped = roi::crop_depth(frame.depth, mask);
  const auto plane = fit_plane(depth_to_cloud(cropped.survivors, cfg.intrinsics));
  EXPECT_LT(angle_deg(plane.normal, t.normal), 1.0);
  EXPECT_LT(plane.normal.dot(plane.centroid), 0.0);  // faces the camera
}

TEST(ClampExtent, DropsFarPoints) {
  std::vector<Point3> pts;
  for (int i = 0; i < 50; ++i) pts.emplace_back(i * 0.1, 0.0, 400.0);
  pts.emplace_back(500.0, 0.0, 400.0);
  const auto c = clamp_extent(PointCloud(pts), 60.0);
  EXPECT_EQ(c.size(), 50u);
}

TEST(EstimateNormals, PlaneFacesCamera) {
  std::vector<Point3> pts;
  for (int i = -10; i <= 10; ++i)
    for (int j = -10; j <= 10; ++j) pts.emplace_back(i * 0.5, j * 0.5, 400.0);
  const auto c = estimate_normals(PointCloud(pts), 20);
  for (const auto& n : c.normals()) EXPECT_LT((n - Vector3(0, 0, -1)).norm(), 1e-6);
}

TEST(EstimateNormals, SphereNormalsRadial) {
  // Camera-facing cap of a radius-50 sphere centred at (0, 0, 400).
  std::vector<Point3> pts;
  const Point3 center(0, 0, 400);
  for (double el = 0.0; el < 0.6; el += 0.02) {
    const int n = std::max(1, static_cast<int>(std::round(2 * std::numbers::pi * std::sin(el) / 0.02)));
    for (int i = 0; i < n; ++i) {
      const double az = 2 * std::numbers::pi * i / n;
      pts.push_back(center + 50.0 * Vector3(std::sin(el) * std::cos(az), std::sin(el) * std::sin(az), -std::cos(el)));
    }
  }
  const auto c = estimate_normals(PointCloud(pts), 20);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) worst = std::max(worst, angle_deg(c.normals()[i], c.points()[i] - center));
  EXPECT_LT(worst, 2.0);
}

TEST(EstimateNormals, CollinearIsDegenerate) {
  const PointCloud line({Point3(0, 0, 1), Point3(1, 0, 1), Point3(2, 0, 1), Point3(3, 0, 1)});
  EXPECT_THROW(estimate_normals(line, 3), DegenerateFit);
  EXPECT_THROW(estimate_normals(line, 4), InvalidArgument);
}

TEST(FitPlane, TiltedPlaneHandCase) {
  std::vector<Point3> pts;
  const Vector3 n = Vector3(0.0, 0.5, -1.0).normalized();
  const Vector3 a = n.unitOrthogonal(), b = n.cross(a);
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j) pts.push_back(Point3(1, 2, 300) + i * a + j * b);
  const auto p = fit_plane(PointCloud(pts));
  EXPECT_LT((p.normal - n).norm(), 1e-9);
  EXPECT_LT((p.centroid - Point3(1, 2, 300)).norm(), 1e-9);
  EXPECT_LT(p.rms, 1e-9);
}

double radius_xy(const Point3& p) { return std::hypot(p.x(), p.y()); }

TEST(RingTemplate, FlatAnnulusRadiiAndCount) {
  const auto t = make_ring_template(RingSpec{}, 0.5);
  for (const auto& p : t.cloud.points()) {
    EXPECT_GE(radius_xy(p), 5.0 - 1e-9);
    EXPECT_LE(radius_xy(p), 12.0 + 1e-9);
  }
  const double expected = std::numbers::pi * (144.0 - 25.0) / 0.25;
  EXPECT_NEAR(static_cast<double>(t.cloud.size()), expected, 0.1 * expected);
  EXPECT_LT(t.cloud.centroid().norm(), 1e-9);
  EXPECT_TRUE(t.cloud.has_normals());
}

TEST(RingTemplate, SpacingPrecondition) {
  EXPECT_THROW(make_ring_template(RingSpec{}, 12.0), InvalidArgument);
  EXPECT_THROW(make_ring_template(RingSpec{}, 0.0), InvalidArgument);
}

TEST(RingTemplate, SeatedHasFloorCollarAndBase) {
  const RingSpec spec;
  const auto t = make_ring_template(spec, 0.5, TemplateShape::seated);
  double rmax = 0.0, zmin = 1e9, zmax = -1e9;
  bool hole_floor = false;
  for (const auto& p : t.cloud.points()) {
    rmax = std::max(rmax, radius_xy(p));
    zmin = std::min(zmin, p.z());
    zmax = std::max(zmax, p.z());
    hole_floor |= radius_xy(p) < spec.inner_radius() - 0.5;
  }
  EXPECT_TRUE(hole_floor);
  EXPECT_NEAR(rmax, spec.outer_radius() + kSeatedCollar, 0.5);
  EXPECT_NEAR(zmax - zmin, spec.thickness, 1e-9);
  // The base plane is the lowest layer of the template.
  EXPECT_NEAR(t.base_center.z(), zmin, 1e-9);
  EXPECT_NEAR(t.base_center.head<2>().norm(), 0.0, 1e-12);
}

TEST(Ply, RoundTripWithAndWithoutNormals) {
  const PointCloud plain({Point3(1.25, -2.5, 400.125), Point3(0.1, 0.2, 0.3)});
  const auto back = parse_ply(to_ply(plain));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_FALSE(back.has_normals());
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LT((back.points()[i] - plain.points()[i]).norm(), 1e-12);

  const auto t = make_ring_template(RingSpec{}, 1.0);
  const auto path = std::filesystem::temp_directory_path() / "ringloc_ply_test.ply";
  write_ply(path, t.cloud);
  const auto read = read_ply(path);
  std::filesystem::remove(path);
  ASSERT_EQ(read.size(), t.cloud.size());
  ASSERT_TRUE(read.has_normals());
  for (std::size_t i = 0; i < read.size(); ++i) {
    EXPECT_LT((read.points()[i] - t.cloud.points()[i]).norm(), 1e-9);
    EXPECT_LT((read.normals()[i] - t.cloud.normals()[i]).norm(), 1e-9);
  }
}

TEST(Ply, MalformedInputs) {
  EXPECT_THROW(parse_ply("not a ply"), ParseError);
  EXPECT_THROW(parse_ply("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
                         "property float z\nend_header\n1 2 3\n"),
               ParseError);
  EXPECT_THROW(read_ply("/nonexistent/cloud.ply"), IoError);
}

}  // namespace
}  // namespace ringloc::cloud
