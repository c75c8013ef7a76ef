#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "cubist/geometry.hpp"

namespace cubist {

struct SolverOptions {
  int iterations = 50;
  double step_size = 0.01;
  double size_min = 1e-3;
  double size_max = 2.0;
  double beta1 = 0.9;    // first-moment decay of the adaptive step rule
  double beta2 = 0.999;  // second-moment decay
  double epsilon = 1e-8;
};

/// Per-point residuals d(h, y)^2 * (a_x + a_y + a_z). The solver minimizes
/// their L1 sum; every entry is nonnegative.
std::vector<double> objective_residuals(std::span<const Vec3> points,
                                        const Cuboid& h);

double objective_l1(std::span<const Vec3> points, const Cuboid& h);

struct InitResult {
  Cuboid cuboid;
  bool degenerate = false;  // rank-deficient point set, identity fallback
};

/// Initial estimate: centroid translation, principal axes of the centred
/// points (proper rotation), sizes from the componentwise max of the
/// absolute local coordinates, clamped to [size_min, size_max].
InitResult init_estimate(std::span<const Vec3> points,
                         const SolverOptions& opts = {});

struct FitResult {
  Cuboid cuboid;
  bool degenerate_init = false;
  double initial_objective = 0.0;
  double final_objective = 0.0;  // best iterate, <= initial_objective
};

/// Fits one cuboid to a minimal point set by adaptive first-order descent
/// on (sizes, axis-angle, translation), returning the best iterate seen.
/// Deterministic for fixed inputs. Throws numerical_error if the iteration
/// produces non-finite values.
FitResult fit_minimal(std::span<const Vec3> points,
                      const SolverOptions& opts = {});

/// Implicit-function-theorem linearization of the fitted pose w.r.t. the
/// input points: rows (r_x, r_y, r_z, t_x, t_y, t_z), columns the 3C point
/// coordinates in point-major order. Size derivatives are masked out.
/// Requires h to be a converged fit for the points; throws numerical_error
/// when the masked Jacobian is rank deficient (condition number > 1e8).
Eigen::Matrix<double, 6, Eigen::Dynamic> solver_jacobian(
    std::span<const Vec3> points, const Cuboid& h);

}  // namespace cubist
