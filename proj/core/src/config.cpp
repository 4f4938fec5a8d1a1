#include "ringloc/config.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

namespace ringloc::config {
namespace {

using Keys = std::initializer_list<std::string_view>;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

toml::table parse(std::string_view text, std::string_view what) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << what << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw ParseError(msg.str());
  }
}

void check_keys(const toml::table& table, std::string_view where, Keys allowed) {
  for (const auto& [key, node] : table) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key.str() == a;
    if (!ok) throw ParseError("unknown key '" + std::string(key.str()) + "' in " + std::string(where));
  }
}

const toml::table* section(const toml::table& root, std::string_view name) {
  const auto* node = root.get(name);
  if (node == nullptr) return nullptr;
  if (!node->is_table()) throw ParseError("[" + std::string(name) + "] must be a table");
  return node->as_table();
}

template <typename T>
void read(const toml::table& t, std::string_view key, T& out) {
  const auto* node = t.get(key);
  if (node == nullptr) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (!node->is_boolean()) throw ParseError("'" + std::string(key) + "' must be a boolean");
    out = node->value<bool>().value();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!node->is_string()) throw ParseError("'" + std::string(key) + "' must be a string");
    out = node->value<std::string>().value();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!node->is_number()) throw ParseError("'" + std::string(key) + "' must be a number");
    out = node->value<double>().value();
  } else {
    if (!node->is_integer()) throw ParseError("'" + std::string(key) + "' must be an integer");
    const auto v = node->value<std::int64_t>().value();
    if (v < 0 && std::is_unsigned_v<T>) throw ParseError("'" + std::string(key) + "' must be >= 0");
    out = static_cast<T>(v);
  }
}

CameraIntrinsics intrinsics_from(const toml::table& t, const std::filesystem::path& base_dir) {
  check_keys(t, "[camera]", {"file", "fx", "fy", "cx", "cy", "width", "height"});
  CameraIntrinsics intr;
  if (const auto* file = t.get("file")) {
    if (!file->is_string()) throw ParseError("camera.file must be a string");
    std::filesystem::path p = file->value<std::string>().value();
    if (p.is_relative()) p = base_dir / p;
    intr = load_intrinsics(p);
  }
  read(t, "fx", intr.fx);
  read(t, "fy", intr.fy);
  read(t, "cx", intr.cx);
  read(t, "cy", intr.cy);
  read(t, "width", intr.width);
  read(t, "height", intr.height);
  intr.validate();
  return intr;
}

RingSpec ring_from(const toml::table* t) {
  RingSpec ring;
  if (t) {
    check_keys(*t, "[ring]", {"outer_diameter", "inner_diameter", "thickness"});
    read(*t, "outer_diameter", ring.outer_diameter);
    read(*t, "inner_diameter", ring.inner_diameter);
    read(*t, "thickness", ring.thickness);
  }
  ring.validate();
  return ring;
}

detect::PreprocessMode parse_preprocess(const std::string& s) {
  if (s == "hist_eq") return detect::PreprocessMode::hist_eq;
  if (s == "gaussian") return detect::PreprocessMode::gaussian;
  if (s == "hist_eq_gaussian") return detect::PreprocessMode::hist_eq_gaussian;
  throw ParseError("unknown preprocess mode '" + s + "'");
}

cloud::TemplateShape parse_shape(const std::string& s) {
  if (s == "flat") return cloud::TemplateShape::flat;
  if (s == "shell") return cloud::TemplateShape::shell;
  if (s == "seated") return cloud::TemplateShape::seated;
  throw ParseError("unknown template shape '" + s + "'");
}

template <typename Fn>
auto rethrow_invalid(Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid configuration: ") + e.what());
  }
}

}  // namespace

CameraIntrinsics parse_intrinsics(std::string_view text) {
  const auto root = parse(text, "intrinsics");
  check_keys(root, "intrinsics", {"fx", "fy", "cx", "cy", "width", "height"});
  CameraIntrinsics intr;
  for (auto key : {"fx", "fy", "cx", "cy"}) {
    if (!root.contains(key)) throw ParseError(std::string("intrinsics: missing ") + key);
  }
  read(root, "fx", intr.fx);
  read(root, "fy", intr.fy);
  read(root, "cx", intr.cx);
  read(root, "cy", intr.cy);
  read(root, "width", intr.width);
  read(root, "height", intr.height);
  rethrow_invalid([&] { intr.validate(); return 0; });
  return intr;
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) { return parse_intrinsics(slurp(path)); }

pipeline::PipelineConfig parse_pipeline_config(std::string_view text, const std::filesystem::path& base_dir) {
  const auto root = parse(text, "pipeline config");
  check_keys(root, "config",
             {"camera", "ring", "pipeline", "enhance", "detect", "mask", "cloud", "refine", "scene", "noise", "sweep"});
  return rethrow_invalid([&] {
    pipeline::PipelineConfig cfg;
    const auto* camera = section(root, "camera");
    if (camera == nullptr) throw ParseError("config: [camera] section is required");
    cfg.intrinsics = intrinsics_from(*camera, base_dir);
    cfg.ring = ring_from(section(root, "ring"));

    if (const auto* t = section(root, "pipeline")) {
      check_keys(*t, "[pipeline]", {"method", "detector"});
      std::string method = pipeline::to_string(cfg.method);
      read(*t, "method", method);
      cfg.method = pipeline::parse_method(method);
      std::string detector = "classical";
      read(*t, "detector", detector);
      if (detector == "classical") {
        cfg.detector = pipeline::DetectorKind::classical;
      } else if (detector == "external_roi") {
        cfg.detector = pipeline::DetectorKind::external_roi;
      } else {
        throw ParseError("unknown detector '" + detector + "'");
      }
    }
    if (const auto* t = section(root, "enhance")) {
      check_keys(*t, "[enhance]", {"enabled", "sigma_narrow", "sigma_wide"});
      read(*t, "enabled", cfg.enhance);
      read(*t, "sigma_narrow", cfg.enhance_options.sigma_narrow);
      read(*t, "sigma_wide", cfg.enhance_options.sigma_wide);
    }
    if (const auto* t = section(root, "detect")) {
      check_keys(*t, "[detect]",
                 {"preprocess", "sigma", "threshold", "rms_max", "roi_scale", "circ_min", "z_min_mm", "z_max_mm"});
      std::string mode = "gaussian";
      read(*t, "preprocess", mode);
      cfg.detect.preprocess = parse_preprocess(mode);
      read(*t, "sigma", cfg.detect.gaussian_sigma);
      if (const auto* th = t->get("threshold")) {
        if (th->is_string() && th->value<std::string>().value() == "otsu") {
          cfg.detect.threshold = detect::OtsuThreshold{};
        } else if (th->is_integer()) {
          const auto level = th->value<std::int64_t>().value();
          if (level < 0 || level > 255) throw ParseError("detect.threshold must lie in 0..255");
          cfg.detect.threshold = detect::FixedThreshold{static_cast<int>(level)};
        } else {
          throw ParseError("detect.threshold must be \"otsu\" or an integer");
        }
      }
      read(*t, "rms_max", cfg.detect.rms_max);
      read(*t, "roi_scale", cfg.detect.roi_scale);
      double z_min = 300.0;
      double z_max = 500.0;
      double circ_min = 0.7;
      read(*t, "z_min_mm", z_min);
      read(*t, "z_max_mm", z_max);
      read(*t, "circ_min", circ_min);
      if (t->contains("z_min_mm") || t->contains("z_max_mm") || t->contains("circ_min")) {
        auto bounds = detect::default_screening_bounds(cfg.ring, cfg.intrinsics, z_min, z_max);
        bounds.circ_min = circ_min;
        cfg.detect.bounds = bounds;
      }
    }
    if (const auto* t = section(root, "mask")) {
      check_keys(*t, "[mask]", {"sigma", "min_contrast", "dilation"});
      read(*t, "sigma", cfg.contour.gaussian_sigma);
      read(*t, "min_contrast", cfg.contour.min_contrast);
      read(*t, "dilation", cfg.mask_dilation);
    }
    if (const auto* t = section(root, "cloud")) {
      check_keys(*t, "[cloud]", {"max_roi_extent_mm", "normals_k", "template_spacing", "template_shape"});
      read(*t, "max_roi_extent_mm", cfg.max_roi_extent_mm);
      read(*t, "normals_k", cfg.normals_k);
      read(*t, "template_spacing", cfg.template_spacing);
      std::string shape = "seated";
      read(*t, "template_shape", shape);
      cfg.template_shape = parse_shape(shape);
    }
    if (const auto* t = section(root, "refine")) {
      check_keys(*t, "[refine]",
                 {"cone_rms_max", "icp_rms_max", "cone_theta_max_deg", "tukey_k", "k_min", "max_corr_dist", "max_iterations",
                  "rms_change_tolerance"});
      read(*t, "cone_rms_max", cfg.locate.gates.cone_rms_max);
      read(*t, "icp_rms_max", cfg.locate.gates.icp_rms_max);
      read(*t, "cone_theta_max_deg", cfg.locate.gates.cone_theta_max_deg);
      if (t->contains("tukey_k")) {
        double k = 0.0;
        read(*t, "tukey_k", k);
        cfg.locate.gates.k = k;
      }
      read(*t, "k_min", cfg.locate.k_min);
      read(*t, "max_corr_dist", cfg.locate.icp.max_corr_dist);
      read(*t, "max_iterations", cfg.locate.icp.max_iterations);
      read(*t, "rms_change_tolerance", cfg.locate.icp.rms_change_tolerance);
    }
    cfg.validate();
    return cfg;
  });
}

pipeline::PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(slurp(path), path.parent_path());
}

SimulationConfig parse_simulation_config(std::string_view text, const std::filesystem::path& base_dir) {
  const auto root = parse(text, "scene config");
  check_keys(root, "config",
             {"camera", "ring", "pipeline", "enhance", "detect", "mask", "cloud", "refine", "scene", "noise", "sweep"});
  return rethrow_invalid([&] {
    SimulationConfig out;
    auto& scene = out.scene;
    if (const auto* camera = section(root, "camera")) scene.intrinsics = intrinsics_from(*camera, base_dir);
    scene.ring = ring_from(section(root, "ring"));
    if (const auto* t = section(root, "scene")) {
      check_keys(*t, "[scene]",
                 {"distance", "tilt", "offset_x", "offset_y", "lighting_level", "contrast_ring_width", "surface",
                  "sphere_radius", "seed", "single_shot"});
      read(*t, "distance", scene.distance);
      read(*t, "tilt", scene.tilt);
      read(*t, "offset_x", scene.offset_x);
      read(*t, "offset_y", scene.offset_y);
      read(*t, "lighting_level", scene.lighting_level);
      read(*t, "contrast_ring_width", scene.contrast_ring_width);
      std::string surface = "plane";
      read(*t, "surface", surface);
      if (surface == "plane") {
        scene.surface.kind = sim::SurfaceKind::plane;
      } else if (surface == "sphere") {
        scene.surface.kind = sim::SurfaceKind::sphere;
      } else {
        throw ParseError("unknown surface '" + surface + "'");
      }
      read(*t, "sphere_radius", scene.surface.radius_mm);
      read(*t, "seed", scene.seed);
      read(*t, "single_shot", scene.single_shot);
    }
    if (const auto* t = section(root, "noise")) {
      check_keys(*t, "[noise]",
                 {"z_sigma_at_400", "z_sigma_slope", "blur_px_at_400", "blur_slope", "speckle_density",
                  "dropout_rate"});
      auto& n = scene.noise;
      read(*t, "z_sigma_at_400", n.z_sigma_at_400);
      read(*t, "z_sigma_slope", n.z_sigma_slope);
      read(*t, "blur_px_at_400", n.blur_px_at_400);
      read(*t, "blur_slope", n.blur_slope);
      read(*t, "speckle_density", n.speckle_density);
      read(*t, "dropout_rate", n.dropout_rate);
    }
    if (const auto* t = section(root, "sweep")) {
      check_keys(*t, "[sweep]", {"axis", "values", "runs"});
      SweepPlan plan;
      std::string axis = "distance";
      read(*t, "axis", axis);
      plan.axis = sim::parse_sweep_axis(axis);
      const auto* values = t->get_as<toml::array>("values");
      if (values == nullptr) throw ParseError("sweep.values must be an array");
      for (const auto& v : *values) {
        if (!v.is_number()) throw ParseError("sweep.values must be numbers");
        plan.values.push_back(v.value<double>().value());
      }
      read(*t, "runs", plan.runs_per_value);
      out.sweep = plan;
    }
    scene.validate();
    return out;
  });
}

SimulationConfig load_simulation_config(const std::filesystem::path& path) {
  return parse_simulation_config(slurp(path), path.parent_path());
}

}  // namespace ringloc::config
