#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "cubist/geometry.hpp"
#include "cubist/image.hpp"
#include "cubist/superquadric.hpp"

namespace cubist {

/// Per-scene evaluation summary. mean_oa_all carries the +infinity
/// "uncovered" sentinel when the primitive set is empty; it is serialized
/// as a distinguished marker, never as a float.
struct EvalReport {
  std::size_t num_primitives = 0;
  double coverage_percent = 0.0;
  double mean_oa_all = 0.0;
  double mean_oa_covered = 0.0;
  std::map<double, double> auc;  // bound (m) -> percent
  std::size_t num_points = 0;
  std::size_t num_covered = 0;
};

/// Occlusion-aware distance of every point to the cuboid set (+infinity
/// sentinels when the set is empty).
std::vector<double> oa_distances(std::span<const Vec3> points,
                                 std::span<const Cuboid> set,
                                 int workers = 1);

/// Relative area under the recall curve up to `bound`, in percent,
/// computed exactly from the order statistics: recall(t) is piecewise
/// constant, so the integral is sum(max(bound - d_i, 0)) / (n * bound).
/// Infinite (uncovered) distances never contribute.
double auc(std::span<const double> distances, double bound);

struct CoverageResult {
  double percent = 0.0;             // over valid-depth pixels
  std::vector<std::uint8_t> mask;   // per pixel, row-major
};

/// A pixel is covered iff the camera ray through its center hits any
/// cuboid. The percentage is taken over pixels with valid depth.
CoverageResult coverage(const DepthMap& depth, const Intrinsics& K,
                        std::span<const Cuboid> set, int workers = 1);

/// Mean over entries whose mask flag is set; 0 when nothing is covered
/// (num_covered reports the count).
double covered_mean(std::span<const double> distances,
                    std::span<const std::uint8_t> covered,
                    std::size_t* num_covered = nullptr);

/// Full metric suite for one scene.
EvalReport evaluate(const DepthMap& depth, const Intrinsics& K,
                    std::span<const Cuboid> set,
                    std::span<const double> bounds, int workers = 1);

/// Same metric suite scored against superquadrics (Monte-Carlo distances,
/// sampled ray-hit coverage), so third-party outputs evaluate on the same
/// footing as cuboids.
EvalReport evaluate_superquadrics(const DepthMap& depth, const Intrinsics& K,
                                  std::span<const Superquadric> set,
                                  std::span<const double> bounds,
                                  int n_surface = 10000, int line_samples = 64,
                                  int workers = 1);

CoverageResult superquadric_coverage(const DepthMap& depth,
                                     const Intrinsics& K,
                                     std::span<const Superquadric> set,
                                     int line_samples = 64, int workers = 1);

inline constexpr std::array<double, 2> kDefaultAucBounds = {0.20, 0.05};

}  // namespace cubist
