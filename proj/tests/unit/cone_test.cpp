#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ringloc/cone.hpp"
#include "ringloc/error.hpp"
#include "test_support.hpp"

namespace ringloc::refine {
namespace {

using testing::kDeg;

// Forward model: points on the nappe opening toward +z.
PointCloud cone_points(const ConeParams& c, int n, double z_sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rho(1.0, 20.0), phi(0.0, 2 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i) {
    const double r = rho(rng), a = phi(rng);
    pts.emplace_back(c.x0 + r * std::cos(a), c.y0 + r * std::sin(a),
                     c.z0 + r / std::tan(c.theta) + z_sigma * noise(rng));
  }
  return PointCloud(std::move(pts));
}

TEST(ConeResidual, OnSurfaceAndApexAreZero) {
  const ConeParams c{1.0, -2.0, 350.0, 60 * kDeg};
  EXPECT_NEAR(cone_residual(c, Point3(1.0 + 3.0, -2.0, 350.0 + 3.0 / std::tan(60 * kDeg))), 0.0, 1e-12);
  EXPECT_EQ(cone_residual(c, Point3(1.0, -2.0, 350.0)), 0.0);
}

TEST(ConeResidual, HandValue) {
  const ConeParams c{0.0, 0.0, 0.0, 45 * kDeg};
  EXPECT_NEAR(cone_residual(c, Point3(3, 4, 6)), 1.0, 1e-12);
}

TEST(ConeResidual, ThetaOutsideGuardBand) {
  EXPECT_THROW(cone_residual(ConeParams{0, 0, 0, 0.0}, Point3(1, 1, 1)), InvalidArgument);
  EXPECT_THROW(cone_residual(ConeParams{0, 0, 0, std::numbers::pi / 2}, Point3(1, 1, 1)), InvalidArgument);
}

TEST(ConeResidual, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-20.0, 20.0), th(20 * kDeg, 80 * kDeg);
  for (int trial = 0; trial < 200; ++trial) {
    const ConeParams c{d(rng), d(rng), 300.0 + d(rng), th(rng)};
    const Point3 p(d(rng), d(rng), 330.0 + d(rng));
    const auto g = cone_residual_gradient(c, p);
    const double h = 1e-6;
    for (int k = 0; k < 4; ++k) {
      ConeParams lo = c, hi = c;
      double* plo[] = {&lo.x0, &lo.y0, &lo.z0, &lo.theta};
      double* phi[] = {&hi.x0, &hi.y0, &hi.z0, &hi.theta};
      *plo[k] -= h;
      *phi[k] += h;
      const double fd = (cone_residual(hi, p) - cone_residual(lo, p)) / (2 * h);
      EXPECT_NEAR(g[k], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "param " << k;
    }
  }
}

TEST(FitCone, NoiselessRecovery) {
  const ConeParams truth{1.0, -2.0, 350.0, 60 * kDeg};
  const auto fit = fit_cone(cone_points(truth, 500, 0.0, 1));
  EXPECT_LT((fit.apex - Point3(1.0, -2.0, 350.0)).norm(), 1e-6);
  EXPECT_LT(std::abs(fit.half_angle - truth.theta), 1e-8);
  EXPECT_LT(fit.rms, 1e-9);
  EXPECT_EQ(fit.inlier_count, 500u);
}

TEST(FitCone, NoisySpreadMatchesLinearisedCovariance) {
  // Gauss-Newton covariance at the truth: sigma^2 (J^T J)^-1, with J built
  // from the analytic gradient over the noiseless sample positions.
  const ConeParams truth{1.0, -2.0, 350.0, 60 * kDeg};
  const double sigma = 0.3;
  const int trials = 200;
  Eigen::Vector4d sum = Eigen::Vector4d::Zero(), sum_sq = Eigen::Vector4d::Zero();
  Eigen::Matrix4d jtj_mean = Eigen::Matrix4d::Zero();
  for (int seed = 0; seed < trials; ++seed) {
    const auto clean = cone_points(truth, 500, 0.0, 100 + seed);
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    for (const auto& p : clean.points()) {
      const Eigen::Vector4d g = cone_residual_gradient(truth, p);
      jtj += g * g.transpose();
    }
    jtj_mean += jtj / trials;
    const auto fit = fit_cone(cone_points(truth, 500, sigma, 100 + seed));
    const Eigen::Vector4d err(fit.apex.x() - truth.x0, fit.apex.y() - truth.y0, fit.apex.z() - truth.z0,
                              fit.half_angle - truth.theta);
    sum += err;
    sum_sq += err.cwiseProduct(err);
  }
  const Eigen::Vector4d predicted = (sigma * sigma * jtj_mean.inverse()).diagonal().cwiseSqrt();
  for (int k = 0; k < 4; ++k) {
    const double mean = sum(k) / trials;
    const double spread = std::sqrt(sum_sq(k) / trials - mean * mean);
    EXPECT_NEAR(spread / predicted(k), 1.0, 0.2) << "param " << k;
    EXPECT_LT(std::abs(mean), 4.0 * predicted(k) / std::sqrt(double(trials))) << "param " << k;
  }
}

TEST(FitCone, TranslationEquivariance) {
  const ConeParams truth{1.0, -2.0, 350.0, 50 * kDeg};
  const auto cloud = cone_points(truth, 500, 0.2, 9);
  const Vector3 shift(12.5, -7.0, 40.0);
  std::vector<Point3> moved;
  for (const auto& p : cloud.points()) moved.push_back(p + shift);
  const auto a = fit_cone(cloud);
  const auto b = fit_cone(PointCloud(moved));
  EXPECT_LT((b.apex - a.apex - shift).norm(), 1e-9);
  EXPECT_NEAR(b.half_angle, a.half_angle, 1e-9);
  EXPECT_NEAR(b.rms, a.rms, 1e-9);
}

TEST(FitCone, TooFewPoints) {
  const auto five = cone_points(ConeParams{0, 0, 300, 50 * kDeg}, 5, 0.0, 1);
  EXPECT_THROW(fit_cone(five), InvalidArgument);
}

TEST(FitCone, PlanarCloudIsDegenerate) {
  std::vector<Point3> pts;
  for (int i = -10; i <= 10; ++i)
    for (int j = -10; j <= 10; ++j) pts.emplace_back(i, j, 400.0);
  EXPECT_THROW(fit_cone(PointCloud(pts)), DegenerateFit);
}

TEST(FitCone, IterationBudgetExhausted) {
  const ConeParams truth{1.0, -2.0, 350.0, 60 * kDeg};
  ConeFitOptions opts;
  opts.max_iterations = 1;
  opts.init = ConeParams{10.0, 10.0, 300.0, 30 * kDeg};
  try {
    fit_cone(cone_points(truth, 200, 0.0, 1), opts);
    FAIL() << "expected ConeFitNotConverged";
  } catch (const ConeFitNotConverged& e) {
    EXPECT_GT(e.last_iterate().theta, 0.0);
  }
}

}  // namespace
}  // namespace ringloc::refine
