#include "ringloc/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "ringloc/camera.hpp"

namespace ringloc::pipeline {
namespace {

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<StageTiming>& sink) : sink_(sink) {}

  template <typename Fn>
  auto time(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      std::vector<StageTiming>& sink;
      std::string stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
        sink.push_back({stage, ms.count()});
      }
    } record{sink_, stage, start};
    return fn();
  }

 private:
  std::vector<StageTiming>& sink_;
};

detect::DetectOptions detect_options(const PipelineConfig& config) {
  detect::DetectOptions opts = config.detect;
  opts.intrinsics = config.intrinsics;
  opts.ring = config.ring;
  return opts;
}

FrameResult fail(FrameResult result, std::string stage, std::string message) {
  result.ok = false;
  result.failed_stage = std::move(stage);
  result.message = std::move(message);
  return result;
}

nlohmann::json vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

std::string to_string(Method method) {
  return method == Method::baseline_mapping ? "baseline" : "refined";
}

Method parse_method(const std::string& text) {
  if (text == "baseline" || text == "baseline_mapping") return Method::baseline_mapping;
  if (text == "refined") return Method::refined;
  throw ParseError("unknown method '" + text + "'");
}

void PipelineConfig::validate() const {
  intrinsics.validate();
  ring.validate();
  if (!(enhance_options.sigma_narrow > 0.0) || !(enhance_options.sigma_wide > enhance_options.sigma_narrow)) {
    throw InvalidArgument("enhance: need 0 < sigma_narrow < sigma_wide");
  }
  if (mask_dilation < 0) throw InvalidArgument("mask_dilation must be >= 0");
  if (!(max_roi_extent_mm > 0.0)) throw InvalidArgument("max_roi_extent_mm must be > 0");
  if (normals_k < 3) throw InvalidArgument("normals_k must be >= 3");
  if (!(locate.gates.cone_rms_max > 0.0) || !(locate.gates.icp_rms_max > 0.0)) {
    throw InvalidArgument("gates must be positive");
  }
  if (locate.gates.k && !(*locate.gates.k > 0.0)) throw InvalidArgument("tukey k must be > 0");
  if (!(locate.icp.max_corr_dist > 0.0) || locate.icp.max_iterations < 1) {
    throw InvalidArgument("icp settings must be positive");
  }
  // Template spacing is validated by make_ring_template itself.
  (void)cloud::make_ring_template(ring, template_spacing, template_shape);
}

std::optional<Point3> FrameResult::center() const {
  if (!ok) return std::nullopt;
  if (method == Method::baseline_mapping) return baseline_center;
  if (pose && pose->accepted()) return pose->center;
  return std::nullopt;
}

std::optional<double> bilinear_depth(const DepthImage& depth, double u, double v) {
  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const double fu = u - u0;
  const double fv = v - v0;
  double acc = 0.0;
  double wsum = 0.0;
  for (int dv = 0; dv <= 1; ++dv) {
    for (int du = 0; du <= 1; ++du) {
      const int uu = u0 + du;
      const int vv = v0 + dv;
      if (!depth.contains(uu, vv) || depth(uu, vv) <= 0.0) continue;
      const double w = (du ? fu : 1.0 - fu) * (dv ? fv : 1.0 - fv);
      acc += w * depth(uu, vv);
      wsum += w;
    }
  }
  if (wsum <= 0.0) return std::nullopt;
  return acc / wsum;
}

FrameResult run_baseline(const GrayImage& gray, const DepthImage& depth, const PipelineConfig& config,
                         const std::string& frame_id) {
  FrameResult result;
  result.frame_id = frame_id;
  result.method = Method::baseline_mapping;
  if (!gray.same_shape(depth)) throw DimensionMismatch("gray and depth frames differ in size");
  Stopwatch clock(result.timings);

  const auto detections = clock.time("detect", [&] { return detect::detect_rings(gray, detect_options(config)); });
  if (detections.empty()) return fail(std::move(result), "detect", "no ring candidate");
  result.detection = detections.front();
  result.roi = detections.front().roi;

  const auto& circle = detections.front().circle;
  const auto z = clock.time("depth_lookup", [&] { return bilinear_depth(depth, circle.xc, circle.yc); });
  if (!z) return fail(std::move(result), "depth_lookup", "no valid depth under the fitted center");
  result.baseline_center = back_project(circle.xc, circle.yc, *z, config.intrinsics);
  result.ok = true;
  return result;
}

FrameResult run_refined(const GrayImage& gray, const DepthImage& depth, const PipelineConfig& config,
                        const std::optional<std::vector<detect::RoiBox>>& external_rois,
                        const std::string& frame_id, Artifacts* artifacts) {
  FrameResult result;
  result.frame_id = frame_id;
  result.method = Method::refined;
  if (!gray.same_shape(depth)) throw DimensionMismatch("gray and depth frames differ in size");
  Stopwatch clock(result.timings);

  try {
    if (config.detector == DetectorKind::external_roi || external_rois) {
      if (!external_rois || external_rois->empty()) return fail(std::move(result), "roi", "no ROI boxes supplied");
      result.roi = *std::max_element(external_rois->begin(), external_rois->end(),
                                     [](const auto& a, const auto& b) { return a.score < b.score; });
    } else {
      const auto opts = detect_options(config);
      std::vector<detect::Detection> found;
      if (config.enhance) {
        const GrayImage enhanced =
            clock.time("enhance", [&] { return fourier::enhance(gray, config.enhance_options); });
        if (artifacts) artifacts->enhanced = enhanced;
        found = clock.time("detect", [&] { return detect::detect_rings(enhanced, opts); });
      }
      // Fall back to the raw frame when the enhanced one yields nothing.
      if (found.empty()) found = clock.time("detect_original", [&] { return detect::detect_rings(gray, opts); });
      if (found.empty()) return fail(std::move(result), "detect", "no ring candidate");
      result.detection = found.front();
      result.roi = found.front().roi;
    }

    const auto contour = clock.time("contour", [&] { return roi::extract_contour(gray, *result.roi, config.contour); });
    const Mask mask = clock.time("mask", [&] {
      Mask m = roi::make_mask(contour, gray.width(), gray.height());
      return config.mask_dilation > 0 ? roi::dilate_mask(m, config.mask_dilation) : m;
    });
    if (artifacts) artifacts->mask = mask;

    const auto cropped = clock.time("crop", [&] { return roi::crop_depth(depth, mask); });
    PointCloud roi_cloud = clock.time("cloud", [&] {
      return cloud::clamp_extent(cloud::depth_to_cloud(cropped.survivors, config.intrinsics),
                                 config.max_roi_extent_mm);
    });
    if (roi_cloud.size() < 10) return fail(std::move(result), "cloud", "too few depth samples in the ROI");
    roi_cloud = clock.time("normals", [&] {
      return cloud::estimate_normals(roi_cloud, std::min(config.normals_k, roi_cloud.size() - 1));
    });
    if (artifacts) artifacts->roi_cloud = roi_cloud;

    const auto tpl = cloud::make_ring_template(config.ring, config.template_spacing, config.template_shape);
    result.pose = clock.time("locate", [&] { return refine::locate_marker(roi_cloud, tpl, config.locate); });
    if (!result.pose->accepted()) {
      return fail(std::move(result), "locate", std::string(refine::to_string(result.pose->quality)));
    }
    result.ok = true;
    return result;
  } catch (const Error& e) {
    std::string stage = result.timings.empty() ? "roi" : result.timings.back().stage;
    // The stage that threw has already logged its timing on unwind.
    return fail(std::move(result), std::move(stage), e.what());
  }
}

FrameResult run_frame(const GrayImage& gray, const DepthImage& depth, const PipelineConfig& config,
                      const std::optional<std::vector<detect::RoiBox>>& external_rois, const std::string& frame_id,
                      Artifacts* artifacts) {
  if (config.method == Method::baseline_mapping) return run_baseline(gray, depth, config, frame_id);
  return run_refined(gray, depth, config, external_rois, frame_id, artifacts);
}

std::string to_json(const FrameResult& r) {
  nlohmann::json j;
  j["frame_id"] = r.frame_id;
  j["method"] = to_string(r.method);
  j["ok"] = r.ok;
  if (!r.ok) {
    j["failed_stage"] = r.failed_stage;
    j["message"] = r.message;
  }
  if (const auto c = r.center()) j["center"] = vec(*c);
  if (r.detection) {
    const auto& c = r.detection->circle;
    j["circle"] = {{"xc", c.xc}, {"yc", c.yc}, {"r", c.r}, {"rms", c.rms}};
  }
  if (r.roi) j["roi"] = {{"x", r.roi->x}, {"y", r.roi->y}, {"w", r.roi->w}, {"h", r.roi->h}, {"score", r.roi->score}};
  if (r.pose) {
    const auto& p = r.pose;
    j["quality"] = std::string(refine::to_string(p->quality));
    j["normal"] = vec(p->normal);
    j["cone"] = {{"apex", vec(p->cone_apex)},
                 {"theta_deg", p->cone.half_angle * 180.0 / std::numbers::pi},
                 {"rms", p->cone.rms},
                 {"inliers", p->cone.inlier_count}};
    j["icp"] = {{"rms", p->icp.rms_weighted},
                {"iterations", p->icp.iterations},
                {"converged", p->icp.converged},
                {"mean_weight", p->icp.mean_tukey_weight},
                {"k", p->tukey_k}};
    if (!r.ok) j["pose_center"] = vec(p->center);
  }
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& t : r.timings) timings[t.stage] = t.ms;
  j["timings_ms"] = timings;
  return j.dump(2);
}

}  // namespace ringloc::pipeline
