#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ringloc/cloud.hpp"
#include "ringloc/detect.hpp"
#include "ringloc/fourier.hpp"
#include "ringloc/locate.hpp"
#include "ringloc/mask.hpp"
#include "ringloc/types.hpp"

namespace ringloc::pipeline {

enum class Method { baseline_mapping, refined };
enum class DetectorKind { classical, external_roi };

std::string to_string(Method method);
Method parse_method(const std::string& text);

struct PipelineConfig {
  CameraIntrinsics intrinsics;
  RingSpec ring;
  Method method = Method::refined;
  DetectorKind detector = DetectorKind::classical;

  bool enhance = true;
  fourier::EnhanceOptions enhance_options;
  /// Intrinsics and ring are filled from the fields above at run time.
  detect::DetectOptions detect;
  roi::ContourOptions contour;
  int mask_dilation = 0;  ///< px grown around the contour mask

  double max_roi_extent_mm = 60.0;
  std::size_t normals_k = 20;
  double template_spacing = 0.5;
  cloud::TemplateShape template_shape = cloud::TemplateShape::seated;
  refine::LocateOptions locate;

  void validate() const;
};

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct FrameResult {
  std::string frame_id;
  Method method = Method::refined;
  bool ok = false;
  std::string failed_stage;  ///< empty when ok
  std::string message;
  std::optional<detect::Detection> detection;  ///< circle used by either method
  std::optional<detect::RoiBox> roi;
  std::optional<Point3> baseline_center;
  std::optional<refine::MarkerPose> pose;
  std::vector<StageTiming> timings;

  /// The located center when ok.
  std::optional<Point3> center() const;
};

/// Intermediate images and clouds kept for inspection.
struct Artifacts {
  std::optional<GrayImage> enhanced;
  std::optional<Mask> mask;
  std::optional<PointCloud> roi_cloud;
};

/// Center pixel of the best classical detection, mapped through the depth map
/// by bilinear interpolation over valid neighbours, then back-projected.
FrameResult run_baseline(const GrayImage& gray, const DepthImage& depth, const PipelineConfig& config,
                         const std::string& frame_id = {});

/// Enhance, locate the ROI (classical detection or the supplied boxes), crop
/// the depth map through the contour mask and localise the marker in 3D.
/// External boxes are required when the detector is external_roi.
FrameResult run_refined(const GrayImage& gray, const DepthImage& depth, const PipelineConfig& config,
                        const std::optional<std::vector<detect::RoiBox>>& external_rois = std::nullopt,
                        const std::string& frame_id = {}, Artifacts* artifacts = nullptr);

/// Dispatches on config.method.
FrameResult run_frame(const GrayImage& gray, const DepthImage& depth, const PipelineConfig& config,
                      const std::optional<std::vector<detect::RoiBox>>& external_rois = std::nullopt,
                      const std::string& frame_id = {}, Artifacts* artifacts = nullptr);

/// Bilinear depth at sub-pixel (u, v) that ignores zero neighbours and
/// renormalises the remaining weights; nullopt when all neighbours are invalid.
std::optional<double> bilinear_depth(const DepthImage& depth, double u, double v);

std::string to_json(const FrameResult& result);

}  // namespace ringloc::pipeline
