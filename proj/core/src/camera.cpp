#include "ringloc/camera.hpp"

namespace ringloc {

Point3 back_project(double u, double v, double depth, const CameraIntrinsics& intrinsics) {
  if (!(std::isfinite(u) && std::isfinite(v) && std::isfinite(depth))) {
    throw InvalidArgument("back_project: non-finite input");
  }
  if (depth == 0.0) throw InvalidDepth("back_project: depth 0 marks an invalid return");
  if (depth < 0.0) throw InvalidArgument("back_project: negative depth");
  intrinsics.validate();
  return {(u - intrinsics.cx) * depth / intrinsics.fx, (v - intrinsics.cy) * depth / intrinsics.fy,
          depth};
}

Pixel project(const Point3& p, const CameraIntrinsics& intrinsics) {
  if (!p.allFinite() || p.z() <= 0.0) throw InvalidArgument("project: point must be finite with z > 0");
  return {intrinsics.fx * p.x() / p.z() + intrinsics.cx, intrinsics.fy * p.y() / p.z() + intrinsics.cy};
}

}  // namespace ringloc
