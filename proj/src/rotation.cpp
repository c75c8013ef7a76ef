#include "cubist/rotation.hpp"

#include <cmath>

namespace cubist {

Eigen::Matrix3d rotation_from_axis_angle(const Eigen::Vector3d& axis_angle) {
  const TMat3<double> r =
      rotation_from_axis_angle_generic(TVec3<double>(axis_angle));
  Eigen::Matrix3d out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = r.m[i][j];
  return out;
}

Eigen::Vector3d axis_angle_from_rotation(const Eigen::Matrix3d& R) {
  const double cos_theta =
      std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);

  if (theta < 1e-10) return Eigen::Vector3d::Zero();

  if (theta < M_PI - 1e-6) {
    Eigen::Vector3d axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0),
                         R(1, 0) - R(0, 1));
    axis /= 2.0 * std::sin(theta);
    return theta * axis.normalized();
  }

  // Near pi the skew part vanishes; recover the axis from the symmetric
  // part R + I = 2 (cos t I + (1 - cos t) u u^T + ...) ~ 2 u u^T.
  Eigen::Matrix3d S = 0.5 * (R + Eigen::Matrix3d::Identity());
  int k = 0;
  if (S(1, 1) > S(k, k)) k = 1;
  if (S(2, 2) > S(k, k)) k = 2;
  Eigen::Vector3d axis;
  axis[k] = std::sqrt(std::max(S(k, k), 0.0));
  for (int c = 0; c < 3; ++c) {
    if (c == k) continue;
    axis[c] = S(k, c) / axis[k];
  }
  axis.normalize();
  // Resolve the remaining sign with the skew part when it is not exactly
  // zero; at exactly pi both signs represent the same rotation.
  Eigen::Vector3d skew(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (skew.dot(axis) < 0.0) axis = -axis;
  return theta * axis;
}

}  // namespace cubist
