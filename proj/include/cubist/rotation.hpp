#pragma once

#include <Eigen/Core>

#include "cubist/dual.hpp"

namespace cubist {

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual<N>& x) {
  return x.v;
}

// Minimal fixed-size vector/matrix templates. They exist so the rotation
// and distance kernels can run on Dual<> scalars; Eigen types are used
// everywhere at the public interfaces.

template <class T>
struct TVec3 {
  T x{}, y{}, z{};

  TVec3() = default;
  TVec3(T px, T py, T pz) : x(px), y(py), z(pz) {}
  explicit TVec3(const Eigen::Vector3d& v) : x(v.x()), y(v.y()), z(v.z()) {}

  friend TVec3 operator+(const TVec3& a, const TVec3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend TVec3 operator-(const TVec3& a, const TVec3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend T dot(const TVec3& a, const TVec3& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
  }
};

template <class T>
struct TMat3 {
  // Row-major entries.
  T m[3][3]{};

  TVec3<T> apply(const TVec3<T>& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  TVec3<T> apply_transposed(const TVec3<T>& v) const {
    return {m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
            m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
            m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z};
  }
};

/// Rodrigues formula, R = I + A [r]x + B [r]x^2 with A = sin(t)/t and
/// B = (1-cos(t))/t^2. Series expansions keep it smooth through t = 0,
/// which matters when differentiating with dual scalars.
template <class T>
TMat3<T> rotation_from_axis_angle_generic(const TVec3<T>& r) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T t2 = dot(r, r);
  T a, b;
  if (value_of(t2) < 1e-12) {
    a = T(1.0) - t2 * T(1.0 / 6.0) + sq(t2) * T(1.0 / 120.0);
    b = T(0.5) - t2 * T(1.0 / 24.0) + sq(t2) * T(1.0 / 720.0);
  } else {
    const T t = sqrt(t2);
    a = sin(t) / t;
    b = (T(1.0) - cos(t)) / t2;
  }
  TMat3<T> out;
  out.m[0][0] = T(1.0) + b * (-r.z * r.z - r.y * r.y);
  out.m[0][1] = -a * r.z + b * r.x * r.y;
  out.m[0][2] = a * r.y + b * r.x * r.z;
  out.m[1][0] = a * r.z + b * r.x * r.y;
  out.m[1][1] = T(1.0) + b * (-r.z * r.z - r.x * r.x);
  out.m[1][2] = -a * r.x + b * r.y * r.z;
  out.m[2][0] = -a * r.y + b * r.x * r.z;
  out.m[2][1] = a * r.x + b * r.y * r.z;
  out.m[2][2] = T(1.0) + b * (-r.y * r.y - r.x * r.x);
  return out;
}

Eigen::Matrix3d rotation_from_axis_angle(const Eigen::Vector3d& axis_angle);

/// Log map: returns theta * unit_axis with theta in [0, pi].
Eigen::Vector3d axis_angle_from_rotation(const Eigen::Matrix3d& rotation);

}  // namespace cubist
