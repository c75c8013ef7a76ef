#include "cubist/image.hpp"

#include "cubist/errors.hpp"

namespace cubist {

PointCloud backproject(const DepthMap& depth, const Intrinsics& K) {
  if (depth.width != K.width || depth.height != K.height)
    throw io_error("backproject: depth and intrinsics dimensions differ");
  PointCloud cloud;
  cloud.points.reserve(depth.values.size());
  cloud.pixel_index.reserve(depth.values.size());
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const float z = depth.at(u, v);
      if (!DepthMap::is_valid(z)) continue;
      const double zd = static_cast<double>(z);
      cloud.points.emplace_back((u - K.cx) * zd / K.fx, (v - K.cy) * zd / K.fy,
                                zd);
      cloud.pixel_index.push_back(static_cast<std::int64_t>(v) * depth.width +
                                  u);
    }
  }
  return cloud;
}

}  // namespace cubist
