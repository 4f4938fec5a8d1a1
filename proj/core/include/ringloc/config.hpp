#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "ringloc/pipeline.hpp"
#include "ringloc/simulate.hpp"

/// TOML configuration. One file carries per-module sections:
///
///   [camera]   fx fy cx cy width height, or file = "intrinsics.toml"
///   [ring]     outer_diameter inner_diameter thickness
///   [pipeline] method ("refined" | "baseline"), detector ("classical" | "external_roi")
///   [enhance]  enabled sigma_narrow sigma_wide
///   [detect]   preprocess sigma threshold ("otsu" | 0..255) rms_max roi_scale
///              circ_min z_min_mm z_max_mm
///   [mask]     sigma min_contrast dilation
///   [cloud]    max_roi_extent_mm normals_k template_spacing template_shape
///   [refine]   cone_rms_max icp_rms_max cone_theta_max_deg tukey_k k_min max_corr_dist
///              max_iterations rms_change_tolerance
///   [scene]    distance tilt offset_x offset_y lighting_level contrast_ring_width
///              surface ("plane" | "sphere") sphere_radius seed single_shot
///   [noise]    z_sigma_at_400 z_sigma_slope blur_px_at_400 blur_slope
///              speckle_density dropout_rate
///   [sweep]    axis ("distance" | "tilt" | "noise") values runs
///
/// Unknown sections and keys are rejected so typos do not pass silently.
namespace ringloc::config {

/// Plain key = value file with fx, fy, cx, cy and optional width, height.
CameraIntrinsics parse_intrinsics(std::string_view text);
CameraIntrinsics load_intrinsics(const std::filesystem::path& path);

/// Relative paths (camera.file) resolve against base_dir.
pipeline::PipelineConfig parse_pipeline_config(std::string_view text,
                                               const std::filesystem::path& base_dir = {});
pipeline::PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct SweepPlan {
  sim::SweepAxis axis = sim::SweepAxis::distance;
  std::vector<double> values;
  int runs_per_value = 1;
};

struct SimulationConfig {
  sim::SceneConfig scene;
  std::optional<SweepPlan> sweep;
};

SimulationConfig parse_simulation_config(std::string_view text, const std::filesystem::path& base_dir = {});
SimulationConfig load_simulation_config(const std::filesystem::path& path);

}  // namespace ringloc::config
