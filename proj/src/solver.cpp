#include "cubist/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "cubist/errors.hpp"

namespace cubist {

namespace {

/// Residual of one point given a precomputed rotation; generic over the
/// scalar so the same expression yields values and exact forward-mode
/// derivatives. The rotation is hoisted out because it is shared by every
/// point of the set.
template <class T>
T residual_with_rotation(const TVec3<T>& size, const TMat3<T>& rot,
                         const TVec3<T>& translation, const Vec3& point) {
  const TVec3<T> rel{T(point.x()) - translation.x,
                     T(point.y()) - translation.y,
                     T(point.z()) - translation.z};
  const TVec3<T> local = rot.apply_transposed(rel);
  const T d2 = surface_sqdist_local(local, size);
  return d2 * (size.x + size.y + size.z);
}

template <class T>
T residual_generic(const TVec3<T>& size, const TVec3<T>& axis_angle,
                   const TVec3<T>& translation, const Vec3& point) {
  return residual_with_rotation(size, rotation_from_axis_angle_generic(axis_angle),
                                translation, point);
}

struct Params {
  // Layout: size (0..2), axis-angle (3..5), translation (6..8).
  std::array<double, 9> x{};

  static Params from_cuboid(const Cuboid& h) {
    Params p;
    const Vec3 aa = axis_angle_from_rotation(h.rotation);
    for (int i = 0; i < 3; ++i) {
      p.x[i] = h.half_extents[i];
      p.x[3 + i] = aa[i];
      p.x[6 + i] = h.translation[i];
    }
    return p;
  }

  Cuboid to_cuboid() const {
    Cuboid h;
    h.half_extents = Vec3(x[0], x[1], x[2]);
    h.rotation = rotation_from_axis_angle(Vec3(x[3], x[4], x[5]));
    h.translation = Vec3(x[6], x[7], x[8]);
    return h;
  }

  void clamp_sizes(const SolverOptions& opts) {
    for (int i = 0; i < 3; ++i)
      x[i] = std::clamp(x[i], opts.size_min, opts.size_max);
  }
};

/// L1 objective and its gradient w.r.t. all nine parameters.
double objective_with_gradient(const Params& p, std::span<const Vec3> points,
                               std::array<double, 9>& grad) {
  using D = Dual<9>;
  TVec3<D> size{D::seeded(p.x[0], 0), D::seeded(p.x[1], 1),
                D::seeded(p.x[2], 2)};
  TVec3<D> aa{D::seeded(p.x[3], 3), D::seeded(p.x[4], 4),
              D::seeded(p.x[5], 5)};
  TVec3<D> tr{D::seeded(p.x[6], 6), D::seeded(p.x[7], 7),
              D::seeded(p.x[8], 8)};
  const TMat3<D> rot = rotation_from_axis_angle_generic(aa);
  D total(0.0);
  for (const Vec3& y : points)
    total += residual_with_rotation(size, rot, tr, y);
  grad = total.d;
  return total.v;
}

}  // namespace

std::vector<double> objective_residuals(std::span<const Vec3> points,
                                        const Cuboid& h) {
  const TVec3<double> size(h.half_extents);
  const TVec3<double> aa(axis_angle_from_rotation(h.rotation));
  const TVec3<double> tr(h.translation);
  std::vector<double> out;
  out.reserve(points.size());
  for (const Vec3& y : points)
    out.push_back(residual_generic(size, aa, tr, y));
  return out;
}

double objective_l1(std::span<const Vec3> points, const Cuboid& h) {
  const double sum_sizes = h.half_extents.sum();
  double total = 0.0;
  for (const Vec3& y : points) total += point_sqdist(h, y) * sum_sizes;
  return total;
}

InitResult init_estimate(std::span<const Vec3> points,
                         const SolverOptions& opts) {
  if (points.size() < 3)
    throw std::invalid_argument("init_estimate: need at least 3 points");

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& y : points) centroid += y;
  centroid /= static_cast<double>(points.size());

  Eigen::MatrixXd centred(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i)
    centred.row(i) = (points[i] - centroid).transpose();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);

  InitResult result;
  Mat3 axes = Mat3::Identity();
  if (svd.singularValues()(0) < 1e-12) {
    result.degenerate = true;  // all points coincident
  } else {
    axes = svd.matrixV();
    if (axes.determinant() < 0.0) axes.col(2) = -axes.col(2);
  }

  Vec3 extent = Vec3::Zero();
  for (const Vec3& y : points)
    extent = extent.cwiseMax((axes.transpose() * (y - centroid)).cwiseAbs());

  result.cuboid.half_extents =
      extent.cwiseMax(opts.size_min).cwiseMin(opts.size_max);
  result.cuboid.rotation = axes;
  result.cuboid.translation = centroid;
  return result;
}

FitResult fit_minimal(std::span<const Vec3> points,
                      const SolverOptions& opts) {
  const InitResult init = init_estimate(points, opts);

  Params p = Params::from_cuboid(init.cuboid);
  p.clamp_sizes(opts);

  std::array<double, 9> m{};
  std::array<double, 9> v{};
  std::array<double, 9> grad{};

  FitResult result;
  result.degenerate_init = init.degenerate;

  Params best = p;
  double best_value = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= opts.iterations; ++iter) {
    const double value = objective_with_gradient(p, points, grad);
    if (!std::isfinite(value))
      throw numerical_error("fit_minimal: non-finite objective at iteration " +
                            std::to_string(iter));
    if (iter == 0) result.initial_objective = value;
    if (value < best_value) {
      best_value = value;
      best = p;
    }
    if (iter == opts.iterations) break;

    const double bias1 = 1.0 - std::pow(opts.beta1, iter + 1);
    const double bias2 = 1.0 - std::pow(opts.beta2, iter + 1);
    for (int k = 0; k < 9; ++k) {
      m[k] = opts.beta1 * m[k] + (1.0 - opts.beta1) * grad[k];
      v[k] = opts.beta2 * v[k] + (1.0 - opts.beta2) * grad[k] * grad[k];
      const double step =
          opts.step_size * (m[k] / bias1) / (std::sqrt(v[k] / bias2) + opts.epsilon);
      p.x[k] -= step;
    }
    p.clamp_sizes(opts);
  }

  result.cuboid = best.to_cuboid();
  result.final_objective = best_value;
  return result;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> solver_jacobian(
    std::span<const Vec3> points, const Cuboid& h) {
  const int count = static_cast<int>(points.size());
  const TVec3<double> size(h.half_extents);
  const Vec3 aa_value = axis_angle_from_rotation(h.rotation);

  // dF/d(r, t): one row per point, columns (r, t). Size columns are
  // masked out; their derivatives vanish at the optimum.
  Eigen::MatrixXd dF_dpose(count, 6);
  {
    using D = Dual<6>;
    TVec3<D> sz{D(size.x), D(size.y), D(size.z)};
    TVec3<D> aa{D::seeded(aa_value.x(), 0), D::seeded(aa_value.y(), 1),
                D::seeded(aa_value.z(), 2)};
    TVec3<D> tr{D::seeded(h.translation.x(), 3),
                D::seeded(h.translation.y(), 4),
                D::seeded(h.translation.z(), 5)};
    const TMat3<D> rot = rotation_from_axis_angle_generic(aa);
    for (int i = 0; i < count; ++i) {
      const D r = residual_with_rotation(sz, rot, tr, points[i]);
      for (int k = 0; k < 6; ++k) dF_dpose(i, k) = r.d[k];
    }
  }

  // dF/dS is block diagonal: residual i depends only on point i.
  Eigen::MatrixXd dF_dS = Eigen::MatrixXd::Zero(count, 3 * count);
  {
    using D = Dual<3>;
    TVec3<double> tr(h.translation);
    TMat3<double> rot =
        rotation_from_axis_angle_generic(TVec3<double>(aa_value));
    for (int i = 0; i < count; ++i) {
      TVec3<D> rel{D::seeded(points[i].x(), 0) - tr.x,
                   D::seeded(points[i].y(), 1) - tr.y,
                   D::seeded(points[i].z(), 2) - tr.z};
      // Rotation of a dual vector by a constant matrix.
      TVec3<D> local{
          D(rot.m[0][0]) * rel.x + D(rot.m[1][0]) * rel.y + D(rot.m[2][0]) * rel.z,
          D(rot.m[0][1]) * rel.x + D(rot.m[1][1]) * rel.y + D(rot.m[2][1]) * rel.z,
          D(rot.m[0][2]) * rel.x + D(rot.m[1][2]) * rel.y + D(rot.m[2][2]) * rel.z};
      TVec3<D> sz{D(size.x), D(size.y), D(size.z)};
      const D d2 = surface_sqdist_local(local, sz);
      const D r = d2 * D(size.x + size.y + size.z);
      for (int k = 0; k < 3; ++k) dF_dS(i, 3 * i + k) = r.d[k];
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      dF_dpose, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-8 * sv(0);
  if (sv(sv.size() - 1) <= cutoff)
    throw numerical_error(
        "solver_jacobian: masked Jacobian is rank deficient (degenerate "
        "point configuration)");

  Eigen::VectorXd inv_sv = sv.cwiseInverse();
  Eigen::MatrixXd pinv =
      svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();

  return -(pinv * dF_dS);
}

}  // namespace cubist
