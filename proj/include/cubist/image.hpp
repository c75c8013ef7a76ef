#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cubist/geometry.hpp"

namespace cubist {

/// Row-major z-depth image, meters. Entries that are non-finite or not in
/// (0, 1e4) are invalid (no measurement). Values are stored as float so
/// that PFM files round-trip bit-exactly.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  static DepthMap invalid_filled(int w, int h) {
    DepthMap d;
    d.width = w;
    d.height = h;
    d.values.assign(static_cast<std::size_t>(w) * h,
                    std::numeric_limits<float>::quiet_NaN());
    return d;
  }

  float& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
  float at(int u, int v) const {
    return values[static_cast<std::size_t>(v) * width + u];
  }

  static bool is_valid(float z) {
    return std::isfinite(z) && z > 0.0f && z < 1e4f;
  }
};

/// Pinhole intrinsics; pixel centers sit at integer coordinates.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Unit-direction camera ray through the center of pixel (u, v).
  Ray pixel_ray(double u, double v) const {
    Vec3 dir((u - cx) / fx, (v - cy) / fy, 1.0);
    return Ray{Vec3::Zero(), dir.normalized()};
  }
};

/// Backprojected point cloud; pixel_index[i] is the row-major pixel that
/// produced points[i], so per-pixel data (weights, coverage) can be
/// aligned with per-point data.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::int64_t> pixel_index;
};

/// Pinhole backprojection of all valid pixels:
/// ((u - cx) z / fx, (v - cy) z / fy, z).
PointCloud backproject(const DepthMap& depth, const Intrinsics& K);

}  // namespace cubist
