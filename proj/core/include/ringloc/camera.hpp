#pragma once

#include "ringloc/types.hpp"

namespace ringloc {

/// Pinhole back-projection: x = (u - cx) z / fx, y = (v - cy) z / fy, z = depth.
/// Pixel (u, v) refers to the pixel centre at integer coordinates.
///
/// Throws InvalidDepth for depth == 0 and InvalidArgument for negative or
/// non-finite input.
Point3 back_project(double u, double v, double depth, const CameraIntrinsics& intrinsics);

/// Forward pinhole projection of a camera-frame point with z > 0.
Pixel project(const Point3& p, const CameraIntrinsics& intrinsics);

}  // namespace ringloc
