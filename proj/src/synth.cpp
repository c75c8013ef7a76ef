#include "cubist/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cubist/errors.hpp"
#include "cubist/parallel.hpp"

namespace cubist {

namespace {

Vec3 uniform_axis(Rng& rng) {
  // Normal deviates give a uniform direction on the sphere.
  while (true) {
    Vec3 d(rng.normal(), rng.normal(), rng.normal());
    const double n = d.norm();
    if (n > 1e-12) return d / n;
  }
}

struct FaceWeight {
  Side side;
  double weight;
};

}  // namespace

Cuboid random_cuboid(const SynthRanges& ranges, Rng& rng) {
  if (!(ranges.size_min > 0.0) || !(ranges.z_min > 0.0) ||
      ranges.size_min > ranges.size_max)
    throw std::invalid_argument("random_cuboid: invalid ranges");
  Cuboid h;
  for (int c = 0; c < 3; ++c)
    h.half_extents[c] = rng.uniform(ranges.size_min, ranges.size_max);
  const Vec3 axis = uniform_axis(rng);
  const double angle = rng.uniform(-M_PI, M_PI);
  h.rotation = rotation_from_axis_angle(angle * axis);
  h.translation.x() = rng.uniform(ranges.xy_min, ranges.xy_max);
  h.translation.y() = rng.uniform(ranges.xy_min, ranges.xy_max);
  h.translation.z() = rng.uniform(ranges.z_min, ranges.z_max);
  return h;
}

std::vector<Vec3> sample_visible_points(const Cuboid& h, int n, Rng& rng) {
  if ((h.to_local(Vec3::Zero()).cwiseAbs().array() <=
       h.half_extents.array())
          .all())
    throw std::invalid_argument("sample_visible_points: camera inside cuboid");

  // Camera-facing faces weighted by area * cos(incidence) at the center.
  std::vector<FaceWeight> faces;
  double total = 0.0;
  for (Side side : kAllSides) {
    const int axis = side_axis(side);
    const Vec3 local_center =
        side_sign(side) * h.half_extents[axis] * Vec3::Unit(axis);
    const Vec3 center = h.to_world(local_center);
    const Vec3 normal = side_sign(side) * h.rotation.col(axis);
    const double dist = center.norm();
    if (dist < 1e-12) continue;
    const double cos_view = normal.dot(-center) / dist;
    if (cos_view <= 0.0) continue;  // back face
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    const double area = 4.0 * h.half_extents[u] * h.half_extents[v];
    faces.push_back({side, area * cos_view});
    total += area * cos_view;
  }
  if (faces.empty())
    throw std::invalid_argument(
        "sample_visible_points: no camera-facing face");

  std::vector<Vec3> out;
  out.reserve(n);
  int guard = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++guard > 1000 * (n + 1))
      throw numerical_error("sample_visible_points: rejection cap exceeded");
    double pick = rng.uniform() * total;
    Side side = faces.back().side;
    for (const FaceWeight& fw : faces) {
      if (pick < fw.weight) {
        side = fw.side;
        break;
      }
      pick -= fw.weight;
    }
    const int axis = side_axis(side);
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    Vec3 local;
    local[axis] = side_sign(side) * h.half_extents[axis];
    local[u] = rng.uniform(-h.half_extents[u], h.half_extents[u]);
    local[v] = rng.uniform(-h.half_extents[v], h.half_extents[v]);
    const Vec3 point = h.to_world(local);

    // Confirm the sample is the first hit of its own camera ray. Faces that
    // pass the center test can still graze in near-degenerate poses.
    const double dist = point.norm();
    if (dist < 1e-12) continue;
    const Ray ray{Vec3::Zero(), point / dist};
    const auto hit = ray_intersect(h, ray);
    if (!hit || std::abs(*hit - dist) > 1e-6) continue;
    out.push_back(point);
  }
  return out;
}

DepthMap render_depth(std::span<const Cuboid> cuboids, const Intrinsics& K,
                      int width, int height, int workers) {
  DepthMap depth = DepthMap::invalid_filled(width, height);
  parallel_for(0, static_cast<std::size_t>(height), workers, [&](std::size_t v) {
    for (int u = 0; u < width; ++u) {
      const Ray ray = K.pixel_ray(u, static_cast<double>(v));
      double best = std::numeric_limits<double>::infinity();
      for (const Cuboid& h : cuboids) {
        const auto s = ray_intersect(h, ray);
        if (s && *s < best) best = *s;
      }
      if (std::isfinite(best))
        depth.at(u, static_cast<int>(v)) =
            static_cast<float>(best * ray.direction.z());
    }
  });
  return depth;
}

namespace {

/// Pixel ownership count per cuboid under nearest-hit rendering.
std::vector<std::int64_t> ownership(std::span<const Cuboid> cuboids,
                                    const Intrinsics& K, int width,
                                    int height) {
  std::vector<std::int64_t> counts(cuboids.size(), 0);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const Ray ray = K.pixel_ray(u, v);
      double best = std::numeric_limits<double>::infinity();
      int owner = -1;
      for (std::size_t i = 0; i < cuboids.size(); ++i) {
        const auto s = ray_intersect(cuboids[i], ray);
        if (s && *s < best) {
          best = *s;
          owner = static_cast<int>(i);
        }
      }
      if (owner >= 0) ++counts[owner];
    }
  }
  return counts;
}

}  // namespace

SynthScene make_scene(int k, const SynthRanges& ranges, const Intrinsics& K,
                      int width, int height, std::uint64_t seed,
                      double depth_noise_sigma) {
  if (k < 1) throw std::invalid_argument("make_scene: k must be >= 1");
  Rng rng(mix_seed(seed, 0x5ce9e));

  SynthScene scene;
  for (int i = 0; i < k; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Cuboid candidate = random_cuboid(ranges, rng);
      scene.cuboids.push_back(candidate);
      const auto counts = ownership(scene.cuboids, K, width, height);
      const std::int64_t valid =
          std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
      const std::int64_t need = std::max<std::int64_t>(1, valid / 100);
      const bool ok =
          valid > 0 && std::all_of(counts.begin(), counts.end(),
                                   [need](std::int64_t c) { return c >= need; });
      if (ok) {
        placed = true;
        break;
      }
      scene.cuboids.pop_back();
    }
    if (!placed)
      throw numerical_error(
          "make_scene: could not place a visible cuboid in 1000 attempts");
  }

  scene.depth = render_depth(scene.cuboids, K, width, height);
  if (depth_noise_sigma > 0.0) {
    for (float& z : scene.depth.values) {
      if (!DepthMap::is_valid(z)) continue;
      z = static_cast<float>(z + depth_noise_sigma * rng.normal());
    }
  }
  scene.cloud = backproject(scene.depth, K);
  return scene;
}

Intrinsics default_intrinsics(int width, int height, double focal) {
  Intrinsics K;
  K.fx = focal;
  K.fy = focal;
  K.cx = (width - 1) * 0.5;
  K.cy = (height - 1) * 0.5;
  K.width = width;
  K.height = height;
  return K;
}

}  // namespace cubist
