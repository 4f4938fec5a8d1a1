#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "ringloc/pipeline.hpp"
#include "ringloc/simulate.hpp"
#include "test_support.hpp"

namespace ringloc::pipeline {
namespace {

PipelineConfig config_for(const sim::SceneConfig& scene, Method method = Method::refined) {
  PipelineConfig cfg;
  cfg.intrinsics = scene.intrinsics;
  cfg.ring = scene.ring;
  cfg.method = method;
  return cfg;
}

sim::SceneConfig noiseless(double distance, double tilt) {
  auto s = testing::default_scene(1, distance, tilt);
  s.noise = sim::NoiseModel::none();
  return s;
}

// Zero the depth in a disk around the projected ring centre.
void punch_hole(sim::Frame& frame, double radius_px) {
  const auto& c = frame.truth.projected_center;
  for (int v = 0; v < frame.depth.height(); ++v)
    for (int u = 0; u < frame.depth.width(); ++u)
      if (std::hypot(u - c.x(), v - c.y()) <= radius_px) frame.depth(u, v) = 0.0;
}

TEST(BilinearDepth, SkipsInvalidNeighbours) {
  DepthImage d(2, 2, std::vector<double>{100.0, 200.0, 300.0, 0.0});
  EXPECT_NEAR(*bilinear_depth(d, 0.5, 0.0), 150.0, 1e-12);
  // Weights 0.25 each on three valid pixels, renormalised.
  EXPECT_NEAR(*bilinear_depth(d, 0.5, 0.5), 200.0, 1e-12);
  EXPECT_FALSE(bilinear_depth(DepthImage(2, 2, 0.0), 0.5, 0.5));
}

TEST(Baseline, NoiselessFrontal) {
  const auto scene = noiseless(400.0, 0.0);
  const auto frame = sim::render(scene);
  const auto r = run_baseline(frame.gray, frame.depth, config_for(scene));
  ASSERT_TRUE(r.ok) << r.message;
  EXPECT_LT((*r.center() - frame.truth.center).norm(), 0.2);
}

TEST(Baseline, CenterDropoutFails) {
  const auto scene = noiseless(400.0, 0.0);
  auto frame = sim::render(scene);
  punch_hole(frame, 4.0);
  const auto r = run_baseline(frame.gray, frame.depth, config_for(scene));
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.failed_stage, "depth_lookup");
  EXPECT_FALSE(r.center());
}

TEST(Pipeline, BlankFrameFails) {
  const auto scene = noiseless(400.0, 0.0);
  const GrayImage gray(640, 480, 90);
  const DepthImage depth(640, 480, 400.0);
  for (auto m : {Method::baseline_mapping, Method::refined}) {
    const auto r = run_frame(gray, depth, config_for(scene, m));
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failed_stage, "detect");
  }
}

TEST(Refined, NoiselessFrontal) {
  const auto scene = noiseless(400.0, 0.0);
  const auto frame = sim::render(scene);
  const auto r = run_refined(frame.gray, frame.depth, config_for(scene));
  ASSERT_TRUE(r.ok) << r.failed_stage << ": " << r.message;
  EXPECT_LT((*r.center() - frame.truth.center).norm(), 1e-2);
}

TEST(Refined, NoiselessTilted) {
  const auto scene = noiseless(400.0, 30.0);
  const auto frame = sim::render(scene);
  const auto r = run_refined(frame.gray, frame.depth, config_for(scene));
  ASSERT_TRUE(r.ok) << r.failed_stage << ": " << r.message;
  EXPECT_LT((*r.center() - frame.truth.center).norm(), 1e-2);
  EXPECT_LT((r.pose->normal - frame.truth.normal).norm(), 1e-2);
}

TEST(Refined, SurvivesCenterDropout) {
  const auto scene = testing::default_scene(4);
  auto frame = sim::render(scene);
  punch_hole(frame, 4.0);
  const auto r = run_refined(frame.gray, frame.depth, config_for(scene));
  ASSERT_TRUE(r.ok) << r.failed_stage << ": " << r.message;
  EXPECT_LT((*r.center() - frame.truth.center).norm(), 0.5);
}

TEST(Refined, ExternalRoi) {
  const auto scene = testing::default_scene(5);
  const auto frame = sim::render(scene);
  const auto& t = frame.truth;
  const int half = static_cast<int>(1.6 * t.projected_outer_radius);
  const std::vector<detect::RoiBox> rois{{static_cast<int>(t.projected_center.x()) - half,
                                          static_cast<int>(t.projected_center.y()) - half, 2 * half, 2 * half, 0.9},
                                         {0, 0, 30, 30, 0.1}};
  auto cfg = config_for(scene);
  cfg.detector = DetectorKind::external_roi;
  const auto r = run_refined(frame.gray, frame.depth, cfg, rois);
  ASSERT_TRUE(r.ok) << r.failed_stage << ": " << r.message;
  EXPECT_EQ(r.roi->score, 0.9);
  EXPECT_FALSE(r.detection);
  const auto none = run_refined(frame.gray, frame.depth, cfg, std::vector<detect::RoiBox>{});
  EXPECT_FALSE(none.ok);
  EXPECT_EQ(none.failed_stage, "roi");
}

TEST(Refined, DeterministicApartFromTimings) {
  const auto scene = testing::default_scene(6);
  const auto frame = sim::render(scene);
  const auto strip = [](const FrameResult& r) {
    auto j = nlohmann::json::parse(to_json(r));
    j.erase("timings_ms");
    return j.dump();
  };
  const auto cfg = config_for(scene);
  EXPECT_EQ(strip(run_refined(frame.gray, frame.depth, cfg)), strip(run_refined(frame.gray, frame.depth, cfg)));
}

TEST(Refined, ArtifactsAndTimings) {
  const auto scene = testing::default_scene(7);
  const auto frame = sim::render(scene);
  Artifacts a;
  const auto r = run_refined(frame.gray, frame.depth, config_for(scene), std::nullopt, "f7", &a);
  ASSERT_TRUE(r.ok);
  EXPECT_TRUE(a.enhanced && a.mask && a.roi_cloud);
  EXPECT_TRUE(a.roi_cloud->has_normals());
  std::vector<std::string> stages;
  for (const auto& t : r.timings) stages.push_back(t.stage);
  EXPECT_EQ(stages.front(), "enhance");
  EXPECT_EQ(stages.back(), "locate");
  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j["frame_id"], "f7");
  EXPECT_EQ(j["quality"], "accepted");
  EXPECT_EQ(j["center"].size(), 3u);
  EXPECT_TRUE(j["cone"].contains("theta_deg"));
  EXPECT_TRUE(j["icp"].contains("mean_weight"));
}

TEST(Refined, NoiseSweepStdGrowsWithSigma) {
  std::vector<double> spread;
  for (double sigma : {0.1, 0.3, 0.7}) {
    std::vector<Point3> centers;
    for (int i = 0; i < 10; ++i) {
      auto scene = testing::default_scene(2000 + i);
      scene.noise.z_sigma_at_400 = sigma;
      const auto frame = sim::render(scene);
      auto cfg = config_for(scene);
      // Residual rms tracks the sensor noise, so the default gate would reject
      // most of the noisiest frames.
      cfg.locate.gates.icp_rms_max = 2.0;
      cfg.locate.gates.cone_rms_max = 2.0;
      const auto r = run_refined(frame.gray, frame.depth, cfg);
      ASSERT_TRUE(r.ok) << sigma << ": " << r.message;
      centers.push_back(*r.center() - frame.truth.center);
    }
    spread.push_back(testing::axis_std(centers).norm());
  }
  EXPECT_LT(spread[0], spread[1]);
  EXPECT_LT(spread[1], spread[2]);
}

TEST(Config, Validate) {
  auto cfg = config_for(testing::default_scene(0));
  EXPECT_NO_THROW(cfg.validate());
  cfg.enhance_options.sigma_wide = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = config_for(testing::default_scene(0));
  cfg.template_spacing = 20.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  EXPECT_EQ(parse_method(to_string(Method::baseline_mapping)), Method::baseline_mapping);
}

}  // namespace
}  // namespace ringloc::pipeline
