#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ringloc/camera.hpp"
#include "ringloc/error.hpp"
#include "ringloc/image_io.hpp"
#include "ringloc/simulate.hpp"
#include "test_support.hpp"

namespace ringloc::sim {
namespace {

namespace fs = std::filesystem;

SceneConfig noiseless(double distance, double tilt) {
  auto cfg = testing::default_scene(1, distance, tilt);
  cfg.noise = NoiseModel::none();
  return cfg;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ringloc_sim_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Render, FrontalGeometry) {
  const auto cfg = noiseless(400.0, 0.0);
  const auto frame = render(cfg);
  const auto& t = frame.truth;
  EXPECT_DOUBLE_EQ(t.projected_outer_radius, 12.0 * 600.0 / 400.0);
  EXPECT_NEAR(t.projected_center.x(), 320.0, 1e-12);
  EXPECT_NEAR(t.projected_center.y(), 240.0, 1e-12);
  EXPECT_LT((t.center - Point3(0, 0, 400)).norm(), 1e-12);
  // Flat surface: the hole floor is the base plane, so no relief at the apex.
  EXPECT_NEAR(exact_depth(cfg, 320.0, 240.0), 400.0, 1e-9);
  EXPECT_NEAR(frame.depth(320, 240), 400.0, 1e-9);
  // Ring top face 3 mm proud of the surface at radius 8.5 mm.
  const double u_top = 320.0 + 8.5 * 600.0 / 397.0;
  EXPECT_NEAR(exact_depth(cfg, u_top, 240.0), 397.0, 1e-9);
  EXPECT_NEAR(exact_depth(cfg, 320.0 + 15.0 * 600.0 / 400.0, 240.0), 400.0, 1e-9);
}

TEST(Render, SphereSurfaceRelief) {
  auto cfg = noiseless(400.0, 0.0);
  cfg.surface = Surface{SurfaceKind::sphere, 100.0};
  // The sphere touches the base centre; 20 mm out it falls away by R - sqrt(R^2 - 20^2).
  EXPECT_NEAR(exact_depth(cfg, 320.0, 240.0), 400.0, 1e-9);
  const double x = 20.0;
  const double sag = 100.0 - std::sqrt(100.0 * 100.0 - x * x);
  // Pixel whose ray meets the sphere at lateral offset x.
  const double u = 320.0 + 600.0 * x / (400.0 + sag);
  const double d = exact_depth(cfg, u, 240.0);
  const Point3 p = back_project(u, 240.0, d, cfg.intrinsics);
  EXPECT_NEAR((p - Point3(0, 0, 500.0)).norm(), 100.0, 1e-6);
  EXPECT_NEAR(d, 400.0 + sag, 1e-6);
}

TEST(Render, Deterministic) {
  const auto cfg = testing::default_scene(42);
  const auto a = render(cfg);
  const auto b = render(cfg);
  EXPECT_EQ(a.gray, b.gray);
  EXPECT_EQ(a.depth, b.depth);
  auto other = cfg;
  other.seed = 43;
  EXPECT_FALSE(render(other).depth == a.depth);
}

TEST(Render, TiltedRingIsAnEllipse) {
  const auto frame = render(noiseless(400.0, 30.0));
  // Second moments of the bright top face.
  double n = 0, su = 0, sv = 0;
  std::vector<std::pair<int, int>> px;
  for (int v = 0; v < frame.gray.height(); ++v)
    for (int u = 0; u < frame.gray.width(); ++u)
      if (frame.gray(u, v) >= 195) px.emplace_back(u, v), su += u, sv += v, n += 1;
  ASSERT_GT(n, 100);
  const double mu = su / n, mv = sv / n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (auto [u, v] : px) {
    const Eigen::Vector2d d(u - mu, v - mv);
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov / n);
  const double ratio = std::sqrt(es.eigenvalues()(0) / es.eigenvalues()(1));
  EXPECT_NEAR(ratio, std::cos(30 * testing::kDeg), 0.02 * std::cos(30 * testing::kDeg));
}

TEST(Render, DepthNoiseMatchesModel) {
  auto cfg = testing::default_scene(7, 400.0, 0.0);
  const auto frame = render(cfg);
  std::vector<double> err;
  for (int v = 0; v < frame.depth.height(); v += 2)
    for (int u = 0; u < frame.depth.width(); u += 2)
      if (frame.depth(u, v) > 0.0) err.push_back(frame.depth(u, v) - exact_depth(cfg, u, v));
  ASSERT_GT(err.size(), 10000u);
  EXPECT_NEAR(testing::mean(err), 0.0, 0.01);
  EXPECT_NEAR(testing::sample_std(err), cfg.noise.z_sigma(400.0), 0.03 * cfg.noise.z_sigma(400.0));
}

TEST(Render, DropoutRate) {
  auto cfg = testing::default_scene(8);
  cfg.noise.dropout_rate = 0.1;
  const auto frame = render(cfg);
  std::size_t zeros = 0;
  for (double d : frame.depth.data()) zeros += d == 0.0;
  EXPECT_NEAR(static_cast<double>(zeros) / frame.depth.size(), 0.1, 0.01);
}

TEST(Render, SingleShotSpeckle) {
  auto cfg = testing::default_scene(9);
  cfg.single_shot = true;
  const auto speckled = render(cfg);
  cfg.single_shot = false;
  const auto clean = render(cfg);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < clean.gray.size(); ++i) changed += speckled.gray.data()[i] != clean.gray.data()[i];
  EXPECT_NEAR(static_cast<double>(changed) / clean.gray.size(), 0.05, 0.01);
  EXPECT_EQ(speckled.depth, clean.depth);
}

TEST(NoiseModel, LinearInDistance) {
  const NoiseModel m;
  EXPECT_DOUBLE_EQ(m.z_sigma(400.0), 0.3);
  EXPECT_NEAR(m.z_sigma(600.0), 0.5, 1e-12);
  EXPECT_NEAR(m.blur_sigma(300.0), 0.6, 1e-12);
  NoiseModel bad;
  bad.dropout_rate = 1.5;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(SceneConfig, RangeChecks) {
  auto cfg = testing::default_scene(0);
  cfg.distance = 900.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = testing::default_scene(0);
  cfg.tilt = 50.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = testing::default_scene(0);
  cfg.surface = Surface{SurfaceKind::sphere, 10.0};
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(Sweep, DistanceRadiiScaleInversely) {
  const auto items = plan_sweep(noiseless(400, 0), SweepAxis::distance, {300.0, 400.0, 500.0}, 1);
  ASSERT_EQ(items.size(), 3u);
  const double r300 = render(items[0].config).truth.projected_outer_radius;
  for (const auto& it : items) {
    EXPECT_NEAR(render(it.config).truth.projected_outer_radius * it.value, r300 * 300.0, 1e-9);
  }
}

TEST(Sweep, TiltRunsHaveDistinctSeeds) {
  const auto items = plan_sweep(testing::default_scene(100), SweepAxis::tilt, {0, 10, 20, 30}, 20);
  ASSERT_EQ(items.size(), 80u);
  std::set<std::uint64_t> seeds;
  std::set<std::string> ids;
  for (const auto& it : items) seeds.insert(it.config.seed), ids.insert(it.id);
  EXPECT_EQ(seeds.size(), 80u);
  EXPECT_EQ(ids.size(), 80u);
  EXPECT_DOUBLE_EQ(items[25].config.tilt, 10.0);
}

TEST(Sweep, NoiseAxisSetsZSigma) {
  const auto items = plan_sweep(testing::default_scene(0), SweepAxis::noise, {0.1, 0.7}, 1);
  EXPECT_DOUBLE_EQ(items[1].config.noise.z_sigma_at_400, 0.7);
  EXPECT_THROW(plan_sweep(testing::default_scene(0), SweepAxis::noise, {}, 1), InvalidArgument);
}

TEST(Sweep, WriteAndReadBack) {
  const auto dir = scratch_dir("write");
  const auto items = plan_sweep(testing::default_scene(10), SweepAxis::distance, {400.0}, 2);
  const auto out = write_sweep(items, dir, 2);
  EXPECT_EQ(out.frames, 2u);
  ASSERT_TRUE(fs::exists(out.manifest));
  const auto frame = render(items[1].config);
  const auto depth = io::read_depth_png(dir / (items[1].id + "_depth.png"));
  EXPECT_EQ(io::read_gray_png(dir / (items[1].id + "_gray.png")), frame.gray);
  for (std::size_t i = 0; i < depth.size(); ++i) EXPECT_NEAR(depth.data()[i], frame.depth.data()[i], 0.05 + 1e-9);
  std::ifstream truth_in(dir / (items[1].id + "_truth.json"));
  std::stringstream ss;
  ss << truth_in.rdbuf();
  const auto truth = ground_truth_from_json(ss.str());
  EXPECT_LT((truth.center - frame.truth.center).norm(), 1e-12);
  EXPECT_THROW(write_sweep(items, dir), IoError);
  EXPECT_NO_THROW(write_sweep(items, dir, 1, true));
  fs::remove_all(dir);
}

TEST(SweepAxisNames, RoundTrip) {
  for (auto a : {SweepAxis::distance, SweepAxis::tilt, SweepAxis::noise}) EXPECT_EQ(parse_sweep_axis(to_string(a)), a);
  EXPECT_THROW(parse_sweep_axis("speed"), ParseError);
}

}  // namespace
}  // namespace ringloc::sim
