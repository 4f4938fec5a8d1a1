#include "ringloc/cone.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ringloc/cloud.hpp"

namespace ringloc::refine {
namespace {

constexpr double kThetaMax = std::numbers::pi / 2.0 - kConeThetaMin;

bool theta_in_range(double theta) { return theta > kConeThetaMin && theta < kThetaMax; }

Eigen::Vector4d to_vec(const ConeParams& p) { return {p.x0, p.y0, p.z0, p.theta}; }
ConeParams from_vec(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }

// Unchecked residual, theta assumed in range.
double residual(const Eigen::Vector4d& q, const Point3& p) {
  const double rho = std::hypot(p.x() - q(0), p.y() - q(1));
  return p.z() - (q(2) + rho / std::tan(q(3)));
}

double cost(const Eigen::Vector4d& q, const std::vector<Point3>& pts) {
  double c = 0.0;
  for (const auto& p : pts) {
    const double r = residual(q, p);
    c += r * r;
  }
  return c;
}

}  // namespace

double cone_residual(const ConeParams& params, const Point3& p) {
  if (!theta_in_range(params.theta)) throw InvalidArgument("cone_residual: theta outside the guarded range");
  return residual(to_vec(params), p);
}

Eigen::Vector4d cone_residual_gradient(const ConeParams& params, const Point3& p) {
  if (!theta_in_range(params.theta)) throw InvalidArgument("cone gradient: theta outside the guarded range");
  const double dx = p.x() - params.x0;
  const double dy = p.y() - params.y0;
  const double rho = std::hypot(dx, dy);
  const double t = std::tan(params.theta);
  const double s = std::sin(params.theta);
  Eigen::Vector4d g;
  g(0) = rho > 0.0 ? dx / (rho * t) : 0.0;
  g(1) = rho > 0.0 ? dy / (rho * t) : 0.0;
  g(2) = -1.0;
  g(3) = rho / (s * s);
  return g;
}

ConeFit fit_cone(const PointCloud& cloud, const ConeFitOptions& options) {
  if (cloud.size() < 10) throw InvalidArgument("fit_cone: needs at least 10 points");
  const auto& pts = cloud.points();
  {
    // A plane has no apex; theta would only creep toward its bound.
    const auto plane = cloud::fit_plane(cloud);
    const double extent = std::sqrt(std::max(plane.eigenvalues(2), 0.0));
    if (plane.rms <= 1e-9 * std::max(1.0, extent)) throw DegenerateFit("fit_cone: planar cloud");
  }

  ConeParams init;
  if (options.init) {
    init = *options.init;
  } else {
    const Point3 c = cloud.centroid();
    double zmin = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) zmin = std::min(zmin, p.z());
    init = {c.x(), c.y(), zmin - 1.0, std::numbers::pi / 3.0};
  }
  if (!theta_in_range(init.theta)) throw InvalidArgument("fit_cone: initial theta outside the guarded range");

  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::Vector4d q = to_vec(init);
  double current = cost(q, pts);
  double lambda = 1e-3;
  bool converged = false;
  int iteration = 0;
  Eigen::MatrixXd jac(n, 4);
  Eigen::VectorXd res(n);

  for (iteration = 1; iteration <= options.max_iterations; ++iteration) {
    const ConeParams cp = from_vec(q);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& p = pts[static_cast<std::size_t>(i)];
      res(i) = residual(q, p);
      jac.row(i) = cone_residual_gradient(cp, p).transpose();
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d jtr = jac.transpose() * res;
    Eigen::Vector4d diag = jtj.diagonal().cwiseMax(1e-12);

    bool accepted = false;
    Eigen::Vector4d step = Eigen::Vector4d::Zero();
    while (lambda < 1e16) {
      Eigen::Matrix4d damped = jtj;
      damped.diagonal() += lambda * diag;
      step = damped.ldlt().solve(-jtr);
      Eigen::Vector4d trial = q + step;
      trial(3) = std::clamp(trial(3), kConeThetaMin + 1e-12, kThetaMax - 1e-12);
      step = trial - q;
      const double trial_cost = cost(trial, pts);
      if (std::isfinite(trial_cost) && trial_cost < current) {
        q = trial;
        current = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    // No damping level reduces the cost: we sit at a minimum to round-off.
    if (!accepted || step.norm() < options.step_tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConeFitNotConverged("fit_cone: no convergence within the iteration limit", from_vec(q));
  }

  ConeFit fit;
  fit.apex = Point3(q(0), q(1), q(2));
  fit.half_angle = q(3);
  fit.rms = std::sqrt(current / static_cast<double>(n));
  fit.iterations = std::min(iteration, options.max_iterations);
  // Floor the cut so round-off on an exact fit does not split the inliers.
  const double cut = std::max(options.inlier_sigma * fit.rms, 1e-6);
  for (const auto& p : pts) {
    if (std::abs(residual(q, p)) <= cut) ++fit.inlier_count;
  }
  return fit;
}

}  // namespace ringloc::refine
