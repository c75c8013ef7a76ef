#pragma once

#include <cstdint>
#include <vector>

#include "cubist/solver.hpp"

namespace cubist {

struct GradCheckSummary {
  int trials = 0;
  double step = 1e-4;
  std::uint64_t seed = 0;
  double median_relative_error = 0.0;
  double p90_relative_error = 0.0;
  std::vector<double> per_trial;  // sorted ascending
};

/// Compares the implicit-function-theorem jacobian against a central
/// finite-difference oracle on synthetic minimal sets. The oracle
/// re-solves the fit from a warm start on both sides of each coordinate
/// perturbation and never touches the jacobian code path. Trials whose
/// rotation sits close to the axis-angle chart boundary (|angle| near pi)
/// or whose masked jacobian is rank deficient are resampled; both make the
/// comparison ill-posed rather than wrong.
GradCheckSummary run_gradient_check(int trials, std::uint64_t seed,
                                    double step = 1e-4);

}  // namespace cubist
