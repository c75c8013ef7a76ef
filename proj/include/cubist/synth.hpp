#pragma once

#include <cstdint>
#include <vector>

#include "cubist/geometry.hpp"
#include "cubist/image.hpp"
#include "cubist/rng.hpp"

namespace cubist {

/// Parameter ranges for random scene cuboids. Defaults match the synthetic
/// data recipe: sizes U(0.01, 2), x/y in [-5, 5], z in [0.5, 10] (always in
/// front of the camera), rotation with uniform axis and angle in [-pi, pi].
struct SynthRanges {
  double size_min = 0.01;
  double size_max = 2.0;
  double xy_min = -5.0;
  double xy_max = 5.0;
  double z_min = 0.5;
  double z_max = 10.0;
};

Cuboid random_cuboid(const SynthRanges& ranges, Rng& rng);

/// Samples n points on the camera-facing faces of h, face probability
/// proportional to face area times the cosine of the viewing angle at the
/// face center, uniform within each face. Every returned point lies on the
/// surface and is the first hit of its own camera ray (not self-occluded).
/// Throws if the camera (origin) is inside h.
std::vector<Vec3> sample_visible_points(const Cuboid& h, int n, Rng& rng);

/// Nearest-hit z-depth of the cuboid set; invalid (NaN) where no cuboid is
/// hit. Deterministic; parallel-safe per pixel.
DepthMap render_depth(std::span<const Cuboid> cuboids, const Intrinsics& K,
                      int width, int height, int workers = 1);

struct SynthScene {
  std::vector<Cuboid> cuboids;
  DepthMap depth;
  PointCloud cloud;
};

/// Generates k cuboids that are all visible in the frame; candidates are
/// rejection-resampled (capped at 1000 attempts each) until every cuboid
/// owns at least 1% of the valid pixels. Deterministic per seed.
SynthScene make_scene(int k, const SynthRanges& ranges, const Intrinsics& K,
                      int width, int height, std::uint64_t seed,
                      double depth_noise_sigma = 0.0);

/// Default synthetic camera: Kinect-like focal length, principal point at
/// the image center.
Intrinsics default_intrinsics(int width, int height, double focal = 525.0);

}  // namespace cubist
