#include <gtest/gtest.h>

#include <random>

#include "ringloc/cloud.hpp"
#include "ringloc/error.hpp"
#include "ringloc/locate.hpp"
#include "test_support.hpp"

namespace ringloc::refine {
namespace {

using testing::kDeg;

const cloud::RingTemplate& seated_template() {
  static const auto t = cloud::make_ring_template(RingSpec{}, 0.5, cloud::TemplateShape::seated);
  return t;
}

TEST(LocateMarker, NoiselessFrontalRing) {
  const Point3 truth(0.0, 0.0, 400.0);
  const auto pose = testing::facing_pose(truth, 0.0);
  const auto m = locate_marker(testing::ring_scene_cloud(pose, 0.0, 1), seated_template());
  ASSERT_TRUE(m.accepted()) << to_string(m.quality);
  EXPECT_LT((m.center - truth).norm(), 1e-3);
  EXPECT_LT((m.normal - Vector3(0, 0, -1)).norm(), 1e-4);
}

TEST(LocateMarker, NoiselessTiltedOffsetRing) {
  const Point3 truth(12.0, -7.0, 380.0);
  const auto pose = testing::facing_pose(truth, 30 * kDeg);
  const auto m = locate_marker(testing::ring_scene_cloud(pose, 0.0, 1), seated_template());
  ASSERT_TRUE(m.accepted()) << to_string(m.quality);
  EXPECT_LT((m.center - truth).norm(), 1e-2);
  EXPECT_LT((m.normal - pose.rotate(Vector3::UnitZ())).norm(), 1e-3);
}

TEST(LocateMarker, NoisyFrontalRepeatability) {
  // Seen head-on the walls are invisible and point-to-plane residuals barely
  // constrain the in-plane position, so only the apex and depth are tight.
  const Point3 truth(0.0, 0.0, 400.0);
  const auto pose = testing::facing_pose(truth, 0.0);
  std::vector<Point3> centers, apexes;
  for (int seed = 0; seed < 20; ++seed) {
    const auto m = locate_marker(testing::ring_scene_cloud(pose, 0.3, 500 + seed), seated_template());
    ASSERT_TRUE(m.accepted()) << "seed " << seed << ": " << to_string(m.quality);
    centers.push_back(m.center);
    apexes.push_back(m.cone_apex);
  }
  const Vector3 apex_std = testing::axis_std(apexes);
  EXPECT_LE(std::max(apex_std.x(), apex_std.y()), 0.05) << apex_std.transpose();
  EXPECT_LE(testing::axis_std(centers).z(), 0.05);
}

TEST(LocateMarker, NoisyRepeatabilityWithWallsInView) {
  const Point3 truth(5.0, 3.0, 400.0);
  const auto pose = testing::facing_pose(truth, 30 * kDeg);
  std::vector<Point3> centers;
  for (int seed = 0; seed < 20; ++seed) {
    const auto cloud = testing::ring_scene_cloud(pose, 0.3, 700 + seed, RingSpec{}, 0.5, 0.0, true);
    const auto m = locate_marker(cloud, seated_template());
    ASSERT_TRUE(m.accepted()) << "seed " << seed << ": " << to_string(m.quality);
    centers.push_back(m.center);
  }
  const Vector3 s = testing::axis_std(centers);
  EXPECT_LE(s.maxCoeff(), 0.2) << s.transpose();
  Point3 sum = Point3::Zero();
  for (const auto& c : centers) sum += c;
  EXPECT_LT((sum / centers.size() - truth).norm(), 0.1);
}

TEST(LocateMarker, ClutterIsNeverAccepted) {
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> xy(-15.0, 15.0), z(390.0, 410.0);
    std::vector<Point3> pts(1500);
    for (auto& p : pts) p = Point3(xy(rng), xy(rng), z(rng));
    const auto m = locate_marker(PointCloud(pts), seated_template());
    EXPECT_FALSE(m.accepted()) << "seed " << seed;
  }
}

TEST(LocateMarker, FlatNoisyPatchIsRejected) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.3);
  std::vector<Point3> pts;
  for (double x = -15; x <= 15; x += 0.5)
    for (double y = -15; y <= 15; y += 0.5) pts.emplace_back(x, y, 400.0 + n(rng));
  EXPECT_FALSE(locate_marker(PointCloud(pts), seated_template()).accepted());
}

TEST(LocateMarker, EmptyCloudThrows) {
  EXPECT_THROW(locate_marker(PointCloud{}, seated_template()), EmptyCloud);
}

TEST(LocateMarker, TightGatesReject) {
  const auto pose = testing::facing_pose(Point3(0, 0, 400), 0.0);
  const auto cloud = testing::ring_scene_cloud(pose, 0.3, 1);
  LocateOptions strict_icp;
  strict_icp.gates.icp_rms_max = 0.01;
  EXPECT_EQ(locate_marker(cloud, seated_template(), strict_icp).quality, PoseQuality::rejected_icp);
  LocateOptions strict_cone;
  strict_cone.gates.cone_rms_max = 0.01;
  EXPECT_EQ(locate_marker(cloud, seated_template(), strict_cone).quality, PoseQuality::rejected_cone);
}

}  // namespace
}  // namespace ringloc::refine
