#pragma once

#include <optional>

#include "ringloc/types.hpp"

namespace ringloc::refine {

struct IcpOptions {
  double max_corr_dist = 6.0;  ///< mm
  int max_iterations = 100;
  double rms_change_tolerance = 1e-8;
  /// When set, each update is restricted to a translation along this direction.
  std::optional<Vector3> translate_along;
};

struct RobustIcpResult {
  RigidTransform transform;  ///< source (template) -> target (scene)
  double rms_weighted = 0.0;
  int iterations = 0;
  bool converged = false;
  double mean_tukey_weight = 0.0;
  std::size_t correspondences = 0;
};

/// Point-to-plane ICP. Correspondences are driven by the target: every target
/// point is paired with its nearest transformed source point within
/// max_corr_dist, and the residual is measured along that source point's
/// normal. The source therefore needs normals; target normals are not used.
///
/// Each iteration solves the small-angle linearisation about the source
/// centroid with a truncated eigen-decomposition, so directions the geometry
/// cannot observe (spin about a ring's own axis) are left untouched.
/// converged is false when an iteration finds no correspondences or the RMS
/// change never drops below tolerance.
RobustIcpResult icp_point_to_plane(const PointCloud& source, const PointCloud& target,
                                   const RigidTransform& init, const IcpOptions& options = {});

/// Iteratively reweighted variant: correspondence i carries tukey_weight(r_i, k).
/// All-zero weights count as divergence.
RobustIcpResult icp_tukey(const PointCloud& source, const PointCloud& target,
                          const RigidTransform& init, double k, const IcpOptions& options = {});

/// Signed point-to-plane residuals for the correspondences found at `transform`.
std::vector<double> correspondence_residuals(const PointCloud& source, const PointCloud& target,
                                             const RigidTransform& transform, double max_corr_dist);

/// 4.685 * 1.4826 * median|r|, floored at k_min. Throws InvalidArgument for
/// an empty residual list.
double tukey_k_from_residuals(std::span<const double> residuals, double k_min = 0.05);

struct RobustRegistrationOptions {
  IcpOptions icp;
  /// Overrides the residual-derived tuning constant when set.
  std::optional<double> fixed_k;
  double k_min = 0.05;
};

struct RobustRegistration {
  RobustIcpResult coarse;   ///< plain point-to-plane pass
  RobustIcpResult refined;  ///< Tukey pass seeded by the coarse result
  double k = 0.0;
};

/// Point-to-plane alignment followed by Tukey refinement, with k taken from
/// the coarse residuals unless fixed.
RobustRegistration register_robust(const PointCloud& source, const PointCloud& target,
                                   const RigidTransform& init,
                                   const RobustRegistrationOptions& options = {});

}  // namespace ringloc::refine
