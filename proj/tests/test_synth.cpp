#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "cubist/metrics.hpp"
#include "cubist/synth.hpp"
#include "oracles.hpp"

using namespace cubist;

TEST_CASE("random cuboids stay in range and are seed-deterministic") {
  const SynthRanges ranges;
  Rng rng(101);
  std::vector<double> sizes;
  for (int i = 0; i < 10000; ++i) {
    const Cuboid h = random_cuboid(ranges, rng);
    for (int c = 0; c < 3; ++c) {
      CHECK(h.half_extents[c] >= ranges.size_min);
      CHECK(h.half_extents[c] <= ranges.size_max);
      sizes.push_back(h.half_extents[c]);
    }
    CHECK(h.translation.z() >= ranges.z_min);
    CHECK(h.translation.z() <= ranges.z_max);
    CHECK(std::abs(h.translation.x()) <= ranges.xy_max);
  }

  // Kolmogorov-Smirnov distance of the size marginal against U(lo, hi).
  std::sort(sizes.begin(), sizes.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double cdf =
        (sizes[i] - ranges.size_min) / (ranges.size_max - ranges.size_min);
    const double emp_hi = static_cast<double>(i + 1) / sizes.size();
    const double emp_lo = static_cast<double>(i) / sizes.size();
    ks = std::max({ks, std::abs(cdf - emp_hi), std::abs(cdf - emp_lo)});
  }
  // Critical value at alpha = 0.01 is 1.63 / sqrt(n).
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(sizes.size())));

  Rng a(7), b(7);
  const Cuboid ha = random_cuboid(ranges, a);
  const Cuboid hb = random_cuboid(ranges, b);
  CHECK(ha.half_extents == hb.half_extents);
  CHECK(ha.rotation == hb.rotation);
  CHECK(ha.translation == hb.translation);

  SynthRanges degenerate;
  degenerate.size_min = degenerate.size_max = 0.7;
  Rng c(9);
  CHECK(random_cuboid(degenerate, c).half_extents == Vec3(0.7, 0.7, 0.7));
}

TEST_CASE("visible samples lie on the surface and are first hits") {
  Rng rng(102);
  for (int trial = 0; trial < 30; ++trial) {
    const Cuboid h = random_cuboid(SynthRanges{}, rng);
    std::vector<Vec3> pts;
    try {
      pts = sample_visible_points(h, 400, rng);
    } catch (const std::invalid_argument&) {
      continue;  // camera inside; rejected by contract
    }
    for (const Vec3& p : pts) {
      CHECK(point_distance(h, p) < 1e-9);
      const double dist = p.norm();
      const auto hit = ray_intersect(h, Ray{Vec3::Zero(), p / dist});
      REQUIRE(hit);
      CHECK(std::abs(*hit - dist) < 1e-6);
    }
  }
}

TEST_CASE("frontal box puts all samples on the front face") {
  Cuboid box;
  box.half_extents = Vec3(0.5, 0.4, 0.3);
  box.translation = Vec3(0, 0, 3);
  Rng rng(103);
  const auto pts = sample_visible_points(box, 500, rng);
  for (const Vec3& p : pts) CHECK(p.z() == doctest::Approx(2.7).epsilon(1e-9));
}

TEST_CASE("two equal faces at 45 degrees split by the cosine weights") {
  // Cube rotated 45 degrees about y: faces +x and +z have equal area and,
  // seen from far away on the axis, equal cosine weight.
  Cuboid box;
  box.half_extents = Vec3(0.5, 0.5, 0.5);
  box.rotation = rotation_from_axis_angle(Vec3(0, M_PI / 4.0, 0));
  box.translation = Vec3(0, 0, 50);  // far: center-cosines nearly equal
  Rng rng(104);
  const int n = 10000;
  const auto pts = sample_visible_points(box, n, rng);
  int frontish = 0;
  for (const Vec3& p : pts) {
    const Vec3 local = box.to_local(p);
    if (std::abs(local.z() + 0.5) < 1e-9) ++frontish;  // -z face
  }
  // Expect a 50/50 split within 3 sigma of binomial.
  const double sigma = std::sqrt(n * 0.25);
  CHECK(std::abs(frontish - n / 2) < 3.0 * sigma);
}

TEST_CASE("camera inside the cuboid is rejected") {
  Cuboid box;
  box.half_extents = Vec3(2, 2, 2);
  box.translation = Vec3(0, 0, 1);
  Rng rng(105);
  CHECK_THROWS_AS(sample_visible_points(box, 10, rng), std::invalid_argument);
}

TEST_CASE("empty sample request returns an empty list") {
  Cuboid box;
  box.translation = Vec3(0, 0, 4);
  Rng rng(106);
  CHECK(sample_visible_points(box, 0, rng).empty());
}

TEST_CASE("render_depth hand cases") {
  const Intrinsics K = default_intrinsics(64, 48);
  CHECK(std::all_of(render_depth({}, K, 64, 48).values.begin(),
                    render_depth({}, K, 64, 48).values.end(),
                    [](float z) { return !DepthMap::is_valid(z); }));

  Cuboid box;
  box.half_extents = Vec3(0.5, 0.5, 0.5);
  box.translation = Vec3(0, 0, 2);
  const DepthMap depth = render_depth({&box, 1}, K, 64, 48);
  const float center = depth.at(31, 23);  // cx = 31.5: neighbors of center
  CHECK(center == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("rendered depth is the nearest surface along each pixel ray") {
  const Intrinsics K = default_intrinsics(96, 72);
  Rng rng(107);
  std::vector<Cuboid> set = {oracle::random_cuboid_near_camera(rng),
                             oracle::random_cuboid_near_camera(rng)};
  const DepthMap depth = render_depth(set, K, 96, 72, 2);

  for (int i = 0; i < 100000; ++i) {
    const Cuboid& h = set[rng.uniform_index(2)];
    const Vec3 p = sample_surface_point(h, rng);
    if (p.z() <= 0.1) continue;
    const int u = static_cast<int>(std::lround(K.fx * p.x() / p.z() + K.cx));
    const int v = static_cast<int>(std::lround(K.fy * p.y() / p.z() + K.cy));
    if (u < 0 || u >= 96 || v < 0 || v >= 72) continue;
    const float z = depth.at(u, v);
    REQUIRE(DepthMap::is_valid(z));
    // Nearest-hit: the rendered depth can exceed the splatted sample's
    // depth only by the pixel-discretization slack.
    CHECK(static_cast<double>(z) <= p.z() + 0.05 * p.z() + 1e-6);
  }
}

TEST_CASE("render, backproject, and measure: closed loop") {
  const Intrinsics K = default_intrinsics(160, 120);
  const SynthScene scene = make_scene(2, SynthRanges{}, K, 160, 120, 108);
  const auto dists = oa_distances(scene.cloud.points, scene.cuboids, 2);
  for (double d : dists) CHECK(d < 1e-6);
}

TEST_CASE("make_scene determinism and coverage floor") {
  const Intrinsics K = default_intrinsics(128, 96);
  const SynthScene a = make_scene(3, SynthRanges{}, K, 128, 96, 109);
  const SynthScene b = make_scene(3, SynthRanges{}, K, 128, 96, 109);
  CHECK(a.depth.values == b.depth.values);  // bit-identical
  REQUIRE(a.cuboids.size() == 3);

  // Every cuboid owns at least 1% of valid pixels under nearest-hit.
  std::size_t valid = 0;
  std::vector<std::size_t> owned(3, 0);
  for (int v = 0; v < 96; ++v) {
    for (int u = 0; u < 128; ++u) {
      const Ray ray = K.pixel_ray(u, v);
      double best = std::numeric_limits<double>::infinity();
      int who = -1;
      for (int i = 0; i < 3; ++i) {
        const auto s = ray_intersect(a.cuboids[i], ray);
        if (s && *s < best) {
          best = *s;
          who = i;
        }
      }
      if (who >= 0) {
        ++valid;
        ++owned[who];
      }
    }
  }
  for (int i = 0; i < 3; ++i)
    CHECK(owned[i] >= std::max<std::size_t>(1, valid / 100));
}

TEST_CASE("depth noise perturbs values without changing validity") {
  const Intrinsics K = default_intrinsics(64, 48);
  const SynthScene clean = make_scene(1, SynthRanges{}, K, 64, 48, 110, 0.0);
  const SynthScene noisy = make_scene(1, SynthRanges{}, K, 64, 48, 110, 0.005);
  REQUIRE(clean.depth.values.size() == noisy.depth.values.size());
  double max_delta = 0.0;
  for (std::size_t i = 0; i < clean.depth.values.size(); ++i) {
    const bool cv = DepthMap::is_valid(clean.depth.values[i]);
    CHECK(cv == DepthMap::is_valid(noisy.depth.values[i]));
    if (cv)
      max_delta = std::max(
          max_delta, std::abs(static_cast<double>(clean.depth.values[i]) -
                              noisy.depth.values[i]));
  }
  CHECK(max_delta > 0.0);
  CHECK(max_delta < 0.005 * 6);  // ~5 sigma
}
