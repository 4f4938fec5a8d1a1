#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ringloc/error.hpp"
#include "ringloc/eval.hpp"
#include "ringloc_cli/commands.hpp"
#include "ringloc_cli/plot.hpp"
#include "ringloc_cli/run_manifest.hpp"

namespace ringloc::cli {
namespace {

namespace fs = std::filesystem;

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ringloc");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

TEST(RunManifest, ParsesAndResolvesRelativePaths) {
  const auto m = parse_run_manifest(R"({
    "depth_scale": 10,
    "intrinsics": {"fx": 600, "fy": 600, "cx": 320, "cy": 240, "width": 640, "height": 480},
    "frames": [
      {"id": "a", "gray": "a_gray.png", "depth": "/abs/a_depth.png", "value": 400},
      {"id": "b", "gray": "b_gray.png", "depth": "b_depth.png", "roi": "b_rois.json"}
    ]})",
                                    "/data/run");
  ASSERT_EQ(m.frames.size(), 2u);
  EXPECT_EQ(m.frames[0].gray, fs::path("/data/run/a_gray.png"));
  EXPECT_EQ(m.frames[0].depth, fs::path("/abs/a_depth.png"));
  EXPECT_EQ(*m.frames[0].value, 400.0);
  EXPECT_EQ(*m.frames[1].roi, fs::path("/data/run/b_rois.json"));
  ASSERT_TRUE(m.intrinsics);
  EXPECT_EQ(m.intrinsics->width, 640);
}

TEST(RunManifest, Validation) {
  EXPECT_THROW(parse_run_manifest("[]"), ParseError);
  EXPECT_THROW(parse_run_manifest(R"({"frames": [{"id": "a", "gray": "g.png"}]})"), ParseError);

  const auto dir = fs::temp_directory_path() / "ringloc_manifest_test";
  fs::create_directories(dir);
  std::ofstream(dir / "g.png") << "x";
  std::ofstream(dir / "d.png") << "x";
  auto dup = parse_run_manifest(R"({"frames": [{"id": "a", "gray": "g.png", "depth": "d.png"},
                                               {"id": "a", "gray": "g.png", "depth": "d.png"}]})",
                                dir);
  EXPECT_THROW(dup.validate(), InvalidArgument);
  auto missing = parse_run_manifest(R"({"frames": [{"id": "a", "gray": "g.png", "depth": "nope.png"}]})", dir);
  EXPECT_THROW(missing.validate(), IoError);
  auto fine = parse_run_manifest(R"({"frames": [{"id": "a", "gray": "g.png", "depth": "d.png"}]})", dir);
  EXPECT_NO_THROW(fine.validate());
  fs::remove_all(dir);
}

TEST(Plot, ScatterAndTrend) {
  const std::vector<Point3> c{Point3(0, 0, 400), Point3(0.1, -0.1, 400.2), Point3(-0.1, 0.05, 399.9)};
  const auto report = eval::repeatability(c);
  const auto csv = scatter_csv(report);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const auto svg = scatter_svg(report, "t");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t circles = 0;
  for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++circles;
  EXPECT_EQ(circles, 6u);  // two panels

  const std::vector<TrendPoint> pts{{300.0, report}, {400.0, report}};
  EXPECT_NE(trend_csv(pts, "distance").find("distance,runs"), std::string::npos);
  EXPECT_NE(trend_svg(pts, "distance").find("<polyline"), std::string::npos);
}

TEST(Cli, VersionAndUsageExitCodes) {
  EXPECT_EQ(invoke({"--version"}), kExitOk);
  EXPECT_EQ(invoke({"--no-such-flag"}), kExitUsage);
  EXPECT_EQ(invoke({}), kExitUsage);
  EXPECT_EQ(invoke({"evaluate"}), kExitUsage);
  EXPECT_EQ(invoke({"locate", "--out", "x.json"}), kExitUsage);
}

TEST(Cli, EvaluateTableFixture) {
  const auto out = fs::temp_directory_path() / "ringloc_cli_reference.json";
  fs::remove(out);
  EXPECT_EQ(invoke({"--log-level", "quiet", "evaluate", "--in", std::string(RINGLOC_FIXTURES) + "/reference_runs.txt",
                    "--out", out.string()}),
            kExitOk);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto report = eval::report_from_json(ss.str());
  EXPECT_NEAR(report.std_dev.x(), 0.121477809, 1e-4);
  EXPECT_NEAR(report.std_dev.y(), 0.053937284, 1e-4);
  EXPECT_NEAR(report.std_dev.z(), 0.097565242, 1e-4);
  // Existing output without --overwrite is an error; with it the result is identical.
  EXPECT_EQ(invoke({"--log-level", "quiet", "evaluate", "--in", std::string(RINGLOC_FIXTURES) + "/reference_runs.txt",
                    "--out", out.string()}),
            kExitError);
  EXPECT_EQ(invoke({"--log-level", "quiet", "--overwrite", "evaluate", "--in",
                    std::string(RINGLOC_FIXTURES) + "/reference_runs.txt", "--out", out.string()}),
            kExitOk);
  std::ifstream again(out);
  std::stringstream ss2;
  ss2 << again.rdbuf();
  EXPECT_EQ(eval::report_from_json(ss2.str()), report);
  fs::remove(out);
}

}  // namespace
}  // namespace ringloc::cli
