#include <gtest/gtest.h>

#include <random>

#include "ringloc/camera.hpp"
#include "ringloc/error.hpp"
#include "ringloc/types.hpp"
#include "test_support.hpp"

namespace ringloc {
namespace {

const CameraIntrinsics kCam{600.0, 600.0, 320.0, 240.0, 640, 480};

TEST(BackProject, PrincipalPointIsOpticalAxis) {
  const Point3 p = back_project(320.0, 240.0, 400.0, kCam);
  EXPECT_DOUBLE_EQ(p.x(), 0.0);
  EXPECT_DOUBLE_EQ(p.y(), 0.0);
  EXPECT_DOUBLE_EQ(p.z(), 400.0);
}

TEST(BackProject, OneFocalLengthOffAxis) {
  const Point3 p = back_project(320.0 + 600.0, 240.0, 400.0, kCam);
  EXPECT_NEAR(p.x(), 400.0, 1e-12);
  EXPECT_NEAR(p.y(), 0.0, 1e-12);
}

TEST(BackProject, HandComputedCase) {
  const CameraIntrinsics cam{580.0, 580.0, 320.0, 240.0, 0, 0};
  const Point3 p = back_project(100.0, 50.0, 363.74, cam);
  // (100 - 320) * 363.74 / 580 and (50 - 240) * 363.74 / 580.
  EXPECT_NEAR(p.x(), -220.0 * 363.74 / 580.0, 1e-12);
  EXPECT_NEAR(p.y(), -190.0 * 363.74 / 580.0, 1e-12);
  EXPECT_DOUBLE_EQ(p.z(), 363.74);
  // The rounded figures quoted for this case are about 0.015 mm off the formula.
  EXPECT_NEAR(p.x(), -137.96, 0.02);
  EXPECT_NEAR(p.y(), -119.14, 0.02);
}

TEST(BackProject, LinearInDepthAndReprojects) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 639.0), v(0.0, 479.0), z(200.0, 800.0);
  for (int i = 0; i < 200; ++i) {
    const double uu = u(rng), vv = v(rng), zz = z(rng);
    const Point3 a = back_project(uu, vv, zz, kCam);
    const Point3 b = back_project(uu, vv, 2.0 * zz, kCam);
    EXPECT_LT((b - 2.0 * a).norm(), 1e-9);
    const Pixel px = project(a, kCam);
    EXPECT_NEAR(px.x(), uu, 1e-9);
    EXPECT_NEAR(px.y(), vv, 1e-9);
  }
}

TEST(BackProject, RejectsInvalidDepth) {
  EXPECT_THROW(back_project(1.0, 1.0, 0.0, kCam), InvalidDepth);
  EXPECT_THROW(back_project(1.0, 1.0, -3.0, kCam), InvalidArgument);
  EXPECT_THROW(back_project(1.0, 1.0, std::nan(""), kCam), InvalidArgument);
}

TEST(Intrinsics, Validate) {
  EXPECT_NO_THROW(kCam.validate());
  CameraIntrinsics bad = kCam;
  bad.fx = 0.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(RigidTransform, IdentityComposition) {
  const auto t = compose(RigidTransform::identity(), RigidTransform::identity());
  EXPECT_TRUE(t.matrix().isApprox(Eigen::Matrix4d::Identity()));
}

TEST(RigidTransform, InverseComposesToIdentity) {
  const auto t = RigidTransform::from_axis_angle(Vector3(1, 2, 3).normalized(), 0.7, Vector3(4, -5, 6));
  const auto id = compose(t, t.inverse());
  EXPECT_LT((id.matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(RigidTransform, ComposeRotationsAboutZ) {
  const Vector3 t1(1.0, 2.0, 3.0), t2(-4.0, 0.5, 2.0);
  const auto a = RigidTransform::from_axis_angle(Vector3::UnitZ(), 30 * testing::kDeg, t1);
  const auto b = RigidTransform::from_axis_angle(Vector3::UnitZ(), 60 * testing::kDeg, t2);
  const auto c = compose(a, b);
  // Rz(90) written out by hand.
  Eigen::Matrix3d rz90;
  rz90 << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((c.rotation() - rz90).cwiseAbs().maxCoeff(), 1e-12);
  const double c30 = std::sqrt(3.0) / 2.0, s30 = 0.5;
  const Vector3 expected(c30 * t2.x() - s30 * t2.y() + t1.x(), s30 * t2.x() + c30 * t2.y() + t1.y(), t2.z() + t1.z());
  EXPECT_LT((c.translation() - expected).norm(), 1e-12);
}

TEST(RigidTransform, RejectsNonRotation) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(2, 2) = -1.0;  // reflection
  EXPECT_THROW(RigidTransform(m, Vector3::Zero()), InvalidArgument);
  EXPECT_NO_THROW(RigidTransform::orthonormalized(Eigen::Matrix3d::Identity() * (1 + 1e-7), Vector3::Zero()));
}

TEST(RigidTransform, RotationAngle) {
  const auto t = RigidTransform::from_axis_angle(Vector3::UnitY(), 1.2);
  EXPECT_NEAR(t.rotation_angle(), 1.2, 1e-12);
}

TEST(PointCloud, NormalsMustBeUnitAndMatch) {
  EXPECT_THROW(PointCloud({Point3::Zero()}, {Vector3(0, 0, 2)}), InvalidArgument);
  EXPECT_THROW(PointCloud({Point3::Zero(), Point3::Ones()}, {Vector3::UnitZ()}), Error);
  const PointCloud c({Point3(0, 0, 0), Point3(2, 4, 6)});
  EXPECT_LT((c.centroid() - Point3(1, 2, 3)).norm(), 1e-15);
}

TEST(Raster, DepthRejectsNegative) {
  EXPECT_THROW(DepthImage(2, 1, std::vector<double>{1.0, -1.0}), InvalidArgument);
  EXPECT_THROW(Mask(1, 1, std::vector<std::uint8_t>{2}), InvalidArgument);
  EXPECT_THROW(GrayImage(0, 3), InvalidArgument);
}

TEST(RingSpec, Validate) {
  EXPECT_NO_THROW(RingSpec{}.validate());
  EXPECT_THROW((RingSpec{10.0, 24.0, 3.0}.validate()), InvalidArgument);
}

}  // namespace
}  // namespace ringloc
