#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cubist/geometry.hpp"
#include "cubist/rng.hpp"

namespace cubist {

/// Superellipsoid with shape exponents eps1 (latitudinal) and eps2
/// (longitudinal); same pose conventions as Cuboid (local coordinates are
/// R^T (y - t)).
struct Superquadric {
  double eps1 = 1.0;
  double eps2 = 1.0;
  Vec3 half_extents = Vec3::Ones();
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_local(const Vec3& p) const {
    return rotation.transpose() * (p - translation);
  }
  Vec3 to_world(const Vec3& p) const { return rotation * p + translation; }
};

/// Inside-outside function: zero on the surface, negative inside,
/// positive outside.
double sq_inside_outside(const Superquadric& s, const Vec3& point);

struct SqSurfaceSample {
  Vec3 point;   // world frame
  Vec3 normal;  // outward, unit length, world frame
};

/// Samples the angular parametrization with uniform (eta, omega). The area
/// density is not uniform; fine for min-distance queries.
std::vector<SqSurfaceSample> sq_sample_surface(const Superquadric& s, int n,
                                               Rng& rng);

/// Line-of-sight occlusion test: L samples uniformly spaced between the
/// camera (origin) and the point; occluded iff the inside-outside values
/// change sign along the way.
bool sq_occludes(const Superquadric& s, const Vec3& point,
                 int line_samples = 64);

/// Monte-Carlo occlusion-aware distance to a superquadric set: minimum
/// distance to the visible surface samples, maxed with the distance to the
/// most distant occluding superquadric. +infinity for an empty set (and
/// when no superquadric has any visible sample).
double sq_oa_distance(std::span<const Superquadric> set, const Vec3& point,
                      int n_surface = 10000, int line_samples = 64,
                      std::uint64_t seed = 0);

/// Precomputed visible-sample sets for scoring many points against one
/// superquadric scene.
class SqDistanceField {
 public:
  SqDistanceField(std::span<const Superquadric> set, int n_surface,
                  int line_samples, std::uint64_t seed);

  double oa_distance(const Vec3& point) const;

  /// True iff a camera ray hits the superquadric (sampled inside-outside
  /// sign test along the ray within the bounding sphere).
  static bool ray_hits(const Superquadric& s, const Ray& ray,
                       int line_samples = 64);

 private:
  std::vector<Superquadric> set_;
  std::vector<std::vector<Vec3>> visible_;  // world-frame samples
  int line_samples_;
};

}  // namespace cubist
