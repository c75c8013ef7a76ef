#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "cubist/geometry.hpp"

namespace cubist {

struct EmConfig {
  double sigma = std::sqrt(0.004);  // shared Gaussian scale, sqrt(tau)
  int iterations = 50;
  double step_size = 1e-3;
  double size_min = 1e-3;  // same size clamps as the minimal solver
  double size_max = 2.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // A point can belong to no cuboid at all; the none-class competes in the
  // posterior with the likelihood of a point at this distance. Points much
  // farther than every cuboid then stop pulling on the parameters.
  double outlier_distance_sigmas = 3.0;
};

/// Expected complete-data log-likelihood of the cuboid set under its own
/// posterior point-to-cuboid associations (uniform prior over cuboids,
/// Gaussian point-to-surface likelihood).
double em_objective(std::span<const Vec3> points, std::span<const Cuboid> set,
                    const EmConfig& cfg);

struct EmResult {
  std::vector<Cuboid> cuboids;
  double initial_objective = 0.0;
  double final_objective = 0.0;  // best iterate; >= initial_objective
};

/// EM-style refinement of all cuboids against the full point set. Each
/// iteration recomputes the association posteriors (E-step) and takes one
/// adaptive gradient-ascent step on the expected log-likelihood with the
/// posteriors held fixed (M-step). Returns the best iterate, so the final
/// objective never falls below the initial one. Throws numerical_error on
/// a non-finite objective.
EmResult em_refine(std::span<const Vec3> points, std::span<const Cuboid> set,
                   const EmConfig& cfg = {});

}  // namespace cubist
