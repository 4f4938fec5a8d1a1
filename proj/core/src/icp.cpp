#include "ringloc/icp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "ringloc/kdtree.hpp"
#include "ringloc/tukey.hpp"

namespace ringloc::refine {
namespace {

struct Match {
  std::size_t target = 0;
  std::size_t source = 0;
  double residual = 0.0;
};

std::vector<Match> find_matches(const KdTree& tree, const PointCloud& source, const PointCloud& target,
                                const RigidTransform& transform, double max_corr_dist) {
  const RigidTransform inv = transform.inverse();
  std::vector<Match> matches;
  matches.reserve(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const Point3 q = inv.apply(target.points()[i]);
    const auto nn = tree.nearest(q, max_corr_dist);
    if (!nn) continue;
    const auto& s = source.points()[nn->index];
    const auto& n = source.normals()[nn->index];
    matches.push_back({i, nn->index, n.dot(s - q)});
  }
  return matches;
}

void check_inputs(const PointCloud& source, const PointCloud& target, const IcpOptions& options) {
  if (source.empty() || target.empty()) throw EmptyCloud("icp: source and target must be nonempty");
  if (!source.has_normals()) throw InvalidArgument("icp: source cloud needs normals");
  if (!(options.max_corr_dist > 0.0)) throw InvalidArgument("icp: max_corr_dist must be > 0");
  if (options.max_iterations < 1) throw InvalidArgument("icp: max_iterations must be >= 1");
  if (options.translate_along && !(options.translate_along->norm() > 0.0)) {
    throw InvalidArgument("icp: translate_along must be nonzero");
  }
}

template <typename WeightFn>
RobustIcpResult run_icp(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                        const IcpOptions& options, WeightFn weight_of) {
  check_inputs(source, target, options);
  const KdTree tree(source.points());
  const Point3 source_centroid = source.centroid();

  RobustIcpResult result;
  result.transform = init;
  double previous_rms = 0.0;

  for (int iteration = 0;; ++iteration) {
    const auto matches = find_matches(tree, source, target, result.transform, options.max_corr_dist);
    result.iterations = iteration;
    result.correspondences = matches.size();
    if (matches.empty()) {
      result.converged = false;
      result.rms_weighted = 0.0;
      result.mean_tukey_weight = 0.0;
      return result;
    }

    const Eigen::Matrix3d& rot = result.transform.rotation();
    const Point3 c = result.transform.apply(source_centroid);
    Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
    double wsum = 0.0;
    double wr2 = 0.0;
    for (const auto& m : matches) {
      const double w = weight_of(m.residual);
      if (w == 0.0) continue;
      const Vector3 n = rot * source.normals()[m.source];
      Eigen::Matrix<double, 6, 1> j;
      j.head<3>() = (target.points()[m.target] - c).cross(n);
      j.tail<3>() = n;
      a.noalias() += w * j * j.transpose();
      b.noalias() += w * m.residual * j;
      wsum += w;
      wr2 += w * m.residual * m.residual;
    }
    if (wsum == 0.0) {
      result.converged = false;
      result.rms_weighted = 0.0;
      result.mean_tukey_weight = 0.0;
      return result;
    }
    const double rms = std::sqrt(wr2 / wsum);
    result.rms_weighted = rms;
    result.mean_tukey_weight = wsum / static_cast<double>(matches.size());

    if (iteration > 0 && std::abs(rms - previous_rms) < options.rms_change_tolerance) {
      result.converged = true;
      return result;
    }
    if (iteration == options.max_iterations) {
      result.converged = false;
      return result;
    }
    previous_rms = rms;

    Eigen::Matrix<double, 6, 1> step = Eigen::Matrix<double, 6, 1>::Zero();
    if (options.translate_along) {
      const Vector3 axis = options.translate_along->normalized();
      const double aa = axis.dot(a.bottomRightCorner<3, 3>() * axis);
      if (aa > 0.0) step.tail<3>() = -axis * (axis.dot(b.tail<3>()) / aa);
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(a);
      const auto& values = eig.eigenvalues();
      const double cutoff = 1e-10 * std::max(values.maxCoeff(), 0.0);
      for (int i = 0; i < 6; ++i) {
        if (values(i) <= cutoff) continue;
        const auto v = eig.eigenvectors().col(i);
        step -= v * (v.dot(b) / values(i));
      }
    }

    const Vector3 omega = step.head<3>();
    const double angle = omega.norm();
    const Eigen::Matrix3d dr =
        angle > 0.0 ? Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix() : Eigen::Matrix3d::Identity();
    const RigidTransform delta = RigidTransform::orthonormalized(dr, c - dr * c + step.tail<3>());
    result.transform = compose(delta, result.transform);
  }
}

}  // namespace

RobustIcpResult icp_point_to_plane(const PointCloud& source, const PointCloud& target,
                                   const RigidTransform& init, const IcpOptions& options) {
  return run_icp(source, target, init, options, [](double) { return 1.0; });
}

RobustIcpResult icp_tukey(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                          double k, const IcpOptions& options) {
  if (!(k > 0.0)) throw InvalidArgument("icp_tukey: k must be > 0");
  return run_icp(source, target, init, options, [k](double r) { return tukey_weight(r, k); });
}

std::vector<double> correspondence_residuals(const PointCloud& source, const PointCloud& target,
                                             const RigidTransform& transform, double max_corr_dist) {
  IcpOptions options;
  options.max_corr_dist = max_corr_dist;
  check_inputs(source, target, options);
  const KdTree tree(source.points());
  std::vector<double> out;
  for (const auto& m : find_matches(tree, source, target, transform, max_corr_dist)) out.push_back(m.residual);
  return out;
}

double tukey_k_from_residuals(std::span<const double> residuals, double k_min) {
  if (residuals.empty()) throw InvalidArgument("tukey_k_from_residuals: no residuals");
  std::vector<double> abs_r(residuals.size());
  std::transform(residuals.begin(), residuals.end(), abs_r.begin(), [](double r) { return std::abs(r); });
  const auto mid = abs_r.begin() + static_cast<std::ptrdiff_t>(abs_r.size() / 2);
  std::nth_element(abs_r.begin(), mid, abs_r.end());
  double med = *mid;
  if (abs_r.size() % 2 == 0) med = 0.5 * (med + *std::max_element(abs_r.begin(), mid));
  return std::max(k_min, kTukeyEfficiency95 * 1.4826 * med);
}

RobustRegistration register_robust(const PointCloud& source, const PointCloud& target,
                                   const RigidTransform& init, const RobustRegistrationOptions& options) {
  RobustRegistration out;
  out.coarse = icp_point_to_plane(source, target, init, options.icp);
  if (out.coarse.correspondences == 0) {
    out.refined = out.coarse;
    return out;
  }
  if (options.fixed_k) {
    out.k = *options.fixed_k;
  } else {
    const auto r = correspondence_residuals(source, target, out.coarse.transform, options.icp.max_corr_dist);
    out.k = tukey_k_from_residuals(r, options.k_min);
  }
  out.refined = icp_tukey(source, target, out.coarse.transform, out.k, options.icp);
  return out;
}

}  // namespace ringloc::refine
