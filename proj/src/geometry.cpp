#include "cubist/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cubist {

namespace {

constexpr double kOnSurfaceTol = 1e-9;  // meters, double precision at meter scale

inline double sqr(double x) { return x * x; }

}  // namespace

double side_sqdist_local(const Vec3& local, const Vec3& half, Side side) {
  const int axis = side_axis(side);
  const double plane = side_sign(side) * half[axis];
  double d2 = sqr(local[axis] - plane);
  for (int c = 0; c < 3; ++c) {
    if (c == axis) continue;
    d2 += sqr(std::max(std::abs(local[c]) - half[c], 0.0));
  }
  return d2;
}

double point_sqdist(const Cuboid& h, const Vec3& point) {
  const Vec3 local = h.to_local(point);
  return surface_sqdist_local(TVec3<double>(local),
                              TVec3<double>(h.half_extents));
}

double point_distance(const Cuboid& h, const Vec3& point) {
  return std::sqrt(point_sqdist(h, point));
}

double side_sqdist(const Cuboid& h, const Vec3& point, Side side) {
  return side_sqdist_local(h.to_local(point), h.half_extents, side);
}

double side_distance(const Cuboid& h, const Vec3& point, Side side) {
  return std::sqrt(side_sqdist(h, point, side));
}

bool occludes(const Cuboid& h, const Vec3& point, Side side) {
  const Vec3 local = h.to_local(point);
  const Vec3 cam = h.to_local(Vec3::Zero());
  const Vec3 v = cam - local;

  const int axis = side_axis(side);
  const double plane = side_sign(side) * h.half_extents[axis];
  const double den = v[axis];
  if (den == 0.0) return false;  // sight line parallel to the plane

  const double lambda = (plane - local[axis]) / den;
  if (!(lambda > 0.0)) return false;  // on or in front of the plane

  // Intersection lies exactly on the face plane; the surface check reduces
  // to the lateral excess within the face rectangle.
  double excess2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    if (c == axis) continue;
    const double q = local[c] + lambda * v[c];
    excess2 += sqr(std::max(std::abs(q) - h.half_extents[c], 0.0));
  }
  return excess2 <= kOnSurfaceTol * kOnSurfaceTol;
}

double occlusion_distance(std::span<const Cuboid> cuboids, const Vec3& point) {
  double worst = 0.0;
  for (const Cuboid& h : cuboids) {
    for (Side side : kAllSides) {
      if (!occludes(h, point, side)) continue;
      worst = std::max(worst, side_distance(h, point, side));
    }
  }
  return worst;
}

double occlusion_aware_distance(std::span<const Cuboid> cuboids,
                                const Vec3& point) {
  if (cuboids.empty()) return uncovered_distance();
  double nearest = uncovered_distance();
  for (const Cuboid& h : cuboids)
    nearest = std::min(nearest, point_distance(h, point));
  return std::max(nearest, occlusion_distance(cuboids, point));
}

std::optional<double> ray_intersect(const Cuboid& h, const Ray& ray) {
  const Vec3 origin = h.to_local(ray.origin);
  const Vec3 dir = h.rotation.transpose() * ray.direction;

  double t_enter = 0.0;
  double t_exit = std::numeric_limits<double>::infinity();
  for (int c = 0; c < 3; ++c) {
    const double a = h.half_extents[c];
    if (dir[c] == 0.0) {
      if (std::abs(origin[c]) > a) return std::nullopt;
      continue;
    }
    double t0 = (-a - origin[c]) / dir[c];
    double t1 = (a - origin[c]) / dir[c];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return std::nullopt;
  }
  return t_enter;
}

Vec3 sample_surface_point(const Cuboid& h, Rng& rng) {
  const Vec3& a = h.half_extents;
  const double area_x = 4.0 * a.y() * a.z();
  const double area_y = 4.0 * a.x() * a.z();
  const double area_z = 4.0 * a.x() * a.y();
  const double total = 2.0 * (area_x + area_y + area_z);

  double pick = rng.uniform() * total;
  int axis = 0;
  double sign = 1.0;
  const double areas[3] = {area_x, area_y, area_z};
  for (int c = 0; c < 3 && pick >= 0.0; ++c) {
    for (int s = 0; s < 2; ++s) {
      if (pick < areas[c]) {
        axis = c;
        sign = s == 0 ? 1.0 : -1.0;
        pick = -1.0;
        break;
      }
      pick -= areas[c];
    }
  }

  Vec3 local;
  local[axis] = sign * a[axis];
  const int u = (axis + 1) % 3;
  const int v = (axis + 2) % 3;
  local[u] = rng.uniform(-a[u], a[u]);
  local[v] = rng.uniform(-a[v], a[v]);
  return h.to_world(local);
}

double surface_discrepancy(const Cuboid& a, const Cuboid& b, int samples,
                           std::uint64_t seed) {
  if (samples < 100)
    throw std::invalid_argument("surface_discrepancy: need >= 100 samples");
  Rng rng(mix_seed(seed, 0x5d1));
  double sum_ab = 0.0;
  double sum_ba = 0.0;
  for (int i = 0; i < samples; ++i)
    sum_ab += point_distance(b, sample_surface_point(a, rng));
  for (int i = 0; i < samples; ++i)
    sum_ba += point_distance(a, sample_surface_point(b, rng));
  return 0.5 * (sum_ab + sum_ba) / static_cast<double>(samples);
}

}  // namespace cubist
