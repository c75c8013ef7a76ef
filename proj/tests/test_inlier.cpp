#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cubist/robust.hpp"
#include "oracles.hpp"

using namespace cubist;

namespace {

Cuboid front_box() {
  Cuboid b;
  b.half_extents = Vec3(0.5, 0.5, 0.5);
  b.translation = Vec3(0, 0, 2);
  return b;
}

}  // namespace

TEST_CASE("soft inlier hand values") {
  const InlierParams p;
  CHECK(soft_inlier(p.tau, p) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(soft_inlier(0.0, p) == doctest::Approx(0.9933071490757153).epsilon(1e-9));

  double prev = 1.0;
  for (double d = 0.0; d < 0.2; d += 1e-3) {
    const double f = soft_inlier(d, p);
    CHECK(f < prev + 1e-15);  // strictly decreasing until saturation
    prev = f;
  }
  CHECK(soft_inlier(10.0, p) == doctest::Approx(0.0));
}

TEST_CASE("leaky occlusion hand values and continuity") {
  const InlierParams p;
  CHECK(leaky_occlusion(0.0, p) ==
        doctest::Approx(0.0066928509242848554).epsilon(1e-9));

  const double below = leaky_occlusion(p.tau_c - 1e-9, p);
  const double above = leaky_occlusion(p.tau_c + 1e-9, p);
  CHECK(std::abs(above - below) < 1e-6);

  CHECK(leaky_occlusion(10.0 * p.tau_c, p) > 1.0);  // escapes saturation
}

TEST_CASE("leaky occlusion is C1 at the transition for random parameters") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    InlierParams p;
    p.tau = rng.uniform(5e-4, 0.05);
    p.beta = rng.uniform(1.0, 10.0);
    // Keep the sigmoid slope FD-resolvable in double precision.
    p.tau_c = p.tau * (1.0 + rng.uniform(0.2, 8.0 / p.beta));

    // Below-side secant slopes carry O(h) truncation from the sigmoid
    // curvature; Richardson extrapolation removes it. The above side is
    // affine, its secant is exact.
    const double h = 3e-6 * p.tau_c;
    auto secant_below = [&](double step) {
      return (leaky_occlusion(p.tau_c, p) - leaky_occlusion(p.tau_c - step, p)) /
             step;
    };
    const double slope_below = 2.0 * secant_below(h) - secant_below(2.0 * h);
    const double slope_above =
        (leaky_occlusion(p.tau_c + h, p) - leaky_occlusion(p.tau_c, p)) / h;
    CHECK(std::abs(slope_above - slope_below) <=
          1e-6 * std::abs(slope_above) + 1e-12);

    const double jump = std::abs(leaky_occlusion(p.tau_c + 1e-12 * p.tau_c, p) -
                                 leaky_occlusion(p.tau_c - 1e-12 * p.tau_c, p));
    CHECK(jump < 1e-6);
  }
}

TEST_CASE("occlusion-aware inlier on hand cases") {
  const InlierParams p;
  const Cuboid b = front_box();
  const std::vector<Cuboid> set = {b};

  // On the visible front face, unoccluded.
  CHECK(occlusion_aware_inlier(Vec3(0, 0, 1.5), set, p) > 0.99);
  // Far behind the cuboid: occluded, negative.
  CHECK(occlusion_aware_inlier(Vec3(0, 0, 8), set, p) < 0.0);
  // Far to the side: plain outlier, ~0.
  CHECK(occlusion_aware_inlier(Vec3(4, 0, 2), set, p) ==
        doctest::Approx(0.0).epsilon(1e-6));
  // Empty set.
  CHECK(occlusion_aware_inlier(Vec3(1, 2, 3), {}, p) == 0.0);
}

TEST_CASE("f_IO trichotomy matches the geometric classification") {
  Rng rng(42);
  const InlierParams p;
  for (int trial = 0; trial < 3000; ++trial) {
    const Cuboid h = oracle::random_cuboid_near_camera(rng);
    const Vec3 y(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0.2, 10));
    for (Side s : kAllSides) {
      const double io = side_inlier_outlier(y, h, s, p);
      const bool occ = occludes(h, y, s);
      const double d_sq = side_sqdist(h, y, s);
      if (occ && d_sq > p.tau * (1.0 + 1e-6)) {
        CHECK(io < 0.0);  // occluded beyond the inlier band
      } else if (!occ && d_sq < p.tau * (1.0 - 1e-6)) {
        CHECK(io > 0.0);  // fitting side
      } else if (!occ && d_sq > 10.0 * p.tau) {
        CHECK(std::abs(io) < 1e-6);  // plain outlier
      }
    }
  }
}

TEST_CASE("inlier count sums and decomposes exactly") {
  Rng rng(43);
  const InlierParams p;
  const Cuboid b = front_box();
  const std::vector<Cuboid> set = {b, oracle::random_cuboid_near_camera(rng)};

  std::vector<Vec3> points;
  for (int i = 0; i < 500; ++i)
    points.emplace_back(rng.uniform(-3, 3), rng.uniform(-3, 3),
                        rng.uniform(0.2, 8));

  CHECK(inlier_count(points, {}, p) == 0.0);

  const double whole = inlier_count(points, set, p);
  const std::span<const Vec3> all(points);
  const double parts = inlier_count(all.subspan(0, 200), set, p) +
                       inlier_count(all.subspan(200), set, p);
  CHECK(whole == doctest::Approx(parts).epsilon(1e-12));

  // Per-point equivalence with the single-point scorer.
  double manual = 0.0;
  for (const Vec3& y : points) manual += occlusion_aware_inlier(y, set, p);
  CHECK(whole == manual);  // identical fold kernel, identical order
}

TEST_CASE("surface points score near one, fully occluded scenes negative") {
  Rng rng(44);
  const InlierParams p;
  const Cuboid b = front_box();
  const std::vector<Cuboid> set = {b};

  std::vector<Vec3> on_surface;
  for (int i = 0; i < 800; ++i) {
    const Vec3 s = sample_surface_point(b, rng);
    // keep camera-facing samples only (unoccluded)
    bool occ = false;
    for (Side side : kAllSides) occ = occ || occludes(b, s, side);
    if (!occ) on_surface.push_back(s);
  }
  REQUIRE(on_surface.size() > 50);
  const double count = inlier_count(on_surface, set, p);
  CHECK(count > 0.99 * static_cast<double>(on_surface.size()));
  CHECK(count <= static_cast<double>(on_surface.size()));

  // A big plate in front of everything occludes all points far behind it.
  Cuboid plate;
  plate.half_extents = Vec3(5, 5, 0.01);
  plate.translation = Vec3(0, 0, 1);
  std::vector<Vec3> behind;
  for (int i = 0; i < 100; ++i)
    behind.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2),
                        rng.uniform(6, 9));
  CHECK(inlier_count(behind, {&plate, 1}, p) < 0.0);
}
