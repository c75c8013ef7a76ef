#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>

#include "cubist/dual.hpp"
#include "cubist/rng.hpp"
#include "cubist/rotation.hpp"

namespace cubist {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Oriented cuboid: half extents (meters) plus a rigid pose in the camera
/// frame. `rotation` maps cuboid-local coordinates into the camera frame,
/// so a world point y is expressed locally as R^T (y - t).
struct Cuboid {
  Vec3 half_extents = Vec3::Ones();
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_local(const Vec3& p) const {
    return rotation.transpose() * (p - translation);
  }
  Vec3 to_world(const Vec3& p) const { return rotation * p + translation; }

  /// Length of the full space diagonal.
  double diameter() const { return 2.0 * half_extents.norm(); }

  double surface_area() const {
    const Vec3& a = half_extents;
    return 8.0 * (a.y() * a.z() + a.x() * a.z() + a.x() * a.y());
  }
};

/// Cuboid sides in the fixed order +x, -x, +y, -y, +z, -z.
enum class Side : int { pos_x = 0, neg_x, pos_y, neg_y, pos_z, neg_z };

inline constexpr std::array<Side, 6> kAllSides = {
    Side::pos_x, Side::neg_x, Side::pos_y,
    Side::neg_y, Side::pos_z, Side::neg_z};

constexpr int side_axis(Side s) { return static_cast<int>(s) / 2; }
constexpr double side_sign(Side s) {
  return static_cast<int>(s) % 2 == 0 ? 1.0 : -1.0;
}

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit length
};

/// Squared distance from a point (in the cuboid frame) to the cuboid
/// surface: inner slack if inside, sum of per-axis excesses if outside.
template <class T>
T surface_sqdist_local(const TVec3<T>& local, const TVec3<T>& half) {
  using cubist::abs;
  using std::abs;
  const T ax = abs(local.x), ay = abs(local.y), az = abs(local.z);
  T inner = half.x - ax;
  const T sy = half.y - ay;
  const T sz = half.z - az;
  if (value_of(sy) < value_of(inner)) inner = sy;
  if (value_of(sz) < value_of(inner)) inner = sz;
  return sq(positive_part(inner)) + sq(positive_part(ax - half.x)) +
         sq(positive_part(ay - half.y)) + sq(positive_part(az - half.z));
}

/// Squared distance to one closed rectangular face, local frame.
double side_sqdist_local(const Vec3& local, const Vec3& half, Side side);

double point_sqdist(const Cuboid& h, const Vec3& point);
double point_distance(const Cuboid& h, const Vec3& point);
double side_sqdist(const Cuboid& h, const Vec3& point, Side side);
double side_distance(const Cuboid& h, const Vec3& point, Side side);

/// True iff the given face plane blocks the line of sight from `point` to
/// the camera at the origin: the sight line meets the plane at parameter
/// lambda > 0 and the intersection lies on the cuboid (within 1e-9 m).
/// A sight line parallel to the plane never occludes.
bool occludes(const Cuboid& h, const Vec3& point, Side side);

/// Distance to the most distant occluding face over all cuboids and sides;
/// zero when nothing occludes the point (or the set is empty).
double occlusion_distance(std::span<const Cuboid> cuboids, const Vec3& point);

/// max(min_h d(h, y), d_o(M, y)); +infinity for an empty set so metrics
/// over incrementally grown sets stay total.
double occlusion_aware_distance(std::span<const Cuboid> cuboids,
                                const Vec3& point);

inline double uncovered_distance() {
  return std::numeric_limits<double>::infinity();
}

/// Slab test. Returns the smallest parameter s >= 0 with
/// origin + s*direction on or inside the cuboid (0 if the origin is
/// already inside), or nullopt if the ray misses.
std::optional<double> ray_intersect(const Cuboid& h, const Ray& ray);

/// Area-uniform sample on the surface.
Vec3 sample_surface_point(const Cuboid& h, Rng& rng);

/// Symmetry-invariant comparison of two cuboids: mean surface-sample
/// distance from each cuboid to the other, averaged. Zero iff the two
/// surfaces coincide, regardless of axis relabelling. `samples` >= 100.
double surface_discrepancy(const Cuboid& a, const Cuboid& b, int samples,
                           std::uint64_t seed);

}  // namespace cubist
