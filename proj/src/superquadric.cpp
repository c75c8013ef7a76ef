#include "cubist/superquadric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cubist {

namespace {

/// Signed power: sign(x) |x|^e. Keeps the angular parametrization stable
/// across quadrant boundaries.
inline double spow(double x, double e) {
  if (x > 0.0) return std::pow(x, e);
  if (x < 0.0) return -std::pow(-x, e);
  return 0.0;
}

inline double sq_io_local(const Superquadric& s, const Vec3& l) {
  const double wx = std::pow(std::abs(l.x() / s.half_extents.x()), 2.0 / s.eps2);
  const double wy = std::pow(std::abs(l.y() / s.half_extents.y()), 2.0 / s.eps2);
  const double wz = std::pow(std::abs(l.z() / s.half_extents.z()), 2.0 / s.eps1);
  return std::pow(wx + wy, s.eps2 / s.eps1) + wz - 1.0;
}

}  // namespace

double sq_inside_outside(const Superquadric& s, const Vec3& point) {
  return sq_io_local(s, s.to_local(point));
}

std::vector<SqSurfaceSample> sq_sample_surface(const Superquadric& s, int n,
                                               Rng& rng) {
  if (n < 1) throw std::invalid_argument("sq_sample_surface: n must be >= 1");
  std::vector<SqSurfaceSample> out;
  out.reserve(n);
  const Vec3& a = s.half_extents;
  for (int i = 0; i < n; ++i) {
    const double eta = rng.uniform(-M_PI / 2.0, M_PI / 2.0);
    const double omega = rng.uniform(-M_PI, M_PI);
    const double ce = std::cos(eta), se = std::sin(eta);
    const double co = std::cos(omega), so = std::sin(omega);

    const Vec3 local(a.x() * spow(ce, s.eps1) * spow(co, s.eps2),
                     a.y() * spow(ce, s.eps1) * spow(so, s.eps2),
                     a.z() * spow(se, s.eps1));
    Vec3 normal_local(spow(ce, 2.0 - s.eps1) * spow(co, 2.0 - s.eps2) / a.x(),
                      spow(ce, 2.0 - s.eps1) * spow(so, 2.0 - s.eps2) / a.y(),
                      spow(se, 2.0 - s.eps1) / a.z());
    const double norm = normal_local.norm();
    if (norm > 0.0) normal_local /= norm;
    out.push_back(SqSurfaceSample{s.to_world(local), s.rotation * normal_local});
  }
  return out;
}

bool sq_occludes(const Superquadric& s, const Vec3& point, int line_samples) {
  if (line_samples < 16)
    throw std::invalid_argument("sq_occludes: need at least 16 line samples");
  int prev_sign = 0;
  for (int i = 1; i <= line_samples; ++i) {
    const Vec3 x = (static_cast<double>(i) / line_samples) * point;
    const double f = sq_inside_outside(s, x);
    const int sign = f > 0.0 ? 1 : (f < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (prev_sign != 0 && sign != prev_sign) return true;
    prev_sign = sign;
  }
  return false;
}

SqDistanceField::SqDistanceField(std::span<const Superquadric> set,
                                 int n_surface, int line_samples,
                                 std::uint64_t seed)
    : set_(set.begin(), set.end()), line_samples_(line_samples) {
  if (!set.empty() && n_surface < 1000)
    throw std::invalid_argument("SqDistanceField: need n_surface >= 1000");
  visible_.resize(set_.size());
  for (std::size_t i = 0; i < set_.size(); ++i) {
    const Superquadric& s = set_[i];
    Rng rng(mix_seed(seed, 0x59b3, i));
    const auto samples = sq_sample_surface(s, n_surface, rng);
    const Vec3 cam_local = s.to_local(Vec3::Zero());
    const bool camera_outside = sq_io_local(s, cam_local) > 0.0;
    auto& vis = visible_[i];
    vis.reserve(samples.size());
    for (const auto& sample : samples) {
      // Rim test: a sample facing away from the camera is invisible when
      // the camera itself is outside the superquadric.
      const Vec3 view = sample.point - Vec3::Zero();
      const bool back_facing = view.dot(sample.normal) > 0.0;
      if (back_facing && camera_outside) continue;
      vis.push_back(sample.point);
    }
  }
}

double SqDistanceField::oa_distance(const Vec3& point) const {
  if (set_.empty()) return uncovered_distance();

  double nearest = uncovered_distance();
  double occlusion = 0.0;
  for (std::size_t i = 0; i < set_.size(); ++i) {
    if (visible_[i].empty()) continue;  // fully invisible primitive
    double d = uncovered_distance();
    for (const Vec3& p : visible_[i]) d = std::min(d, (p - point).norm());
    nearest = std::min(nearest, d);
    if (sq_occludes(set_[i], point, line_samples_))
      occlusion = std::max(occlusion, d);
  }
  return std::max(nearest, occlusion);
}

bool SqDistanceField::ray_hits(const Superquadric& s, const Ray& ray,
                               int line_samples) {
  // Restrict the sampled interval to the bounding sphere of the
  // superquadric; outside it the inside-outside function cannot go
  // negative.
  const double radius = s.half_extents.norm();
  const Vec3 rel = s.translation - ray.origin;
  const double mid = rel.dot(ray.direction);
  const double closest_sq = rel.squaredNorm() - mid * mid;
  const double r_sq = radius * radius;
  if (closest_sq > r_sq) return false;
  const double half = std::sqrt(r_sq - closest_sq);
  const double lo = std::max(0.0, mid - half);
  const double hi = mid + half;
  if (hi < lo) return false;
  for (int i = 0; i <= line_samples; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / line_samples;
    const Vec3 x = ray.origin + t * ray.direction;
    if (sq_io_local(s, s.to_local(x)) <= 0.0) return true;
  }
  return false;
}

double sq_oa_distance(std::span<const Superquadric> set, const Vec3& point,
                      int n_surface, int line_samples, std::uint64_t seed) {
  const SqDistanceField field(set, n_surface, line_samples, seed);
  return field.oa_distance(point);
}

}  // namespace cubist
