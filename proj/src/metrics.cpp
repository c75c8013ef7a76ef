#include "cubist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cubist/parallel.hpp"

namespace cubist {

std::vector<double> oa_distances(std::span<const Vec3> points,
                                 std::span<const Cuboid> set, int workers) {
  std::vector<double> out(points.size());
  parallel_for(0, points.size(), workers, [&](std::size_t i) {
    out[i] = occlusion_aware_distance(set, points[i]);
  });
  return out;
}

double auc(std::span<const double> distances, double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("auc: bound must be > 0");
  if (distances.empty()) return 0.0;
  double area = 0.0;
  for (double d : distances) {
    if (d < bound) area += bound - d;  // +inf never recalled
  }
  return 100.0 * area / (bound * static_cast<double>(distances.size()));
}

CoverageResult coverage(const DepthMap& depth, const Intrinsics& K,
                        std::span<const Cuboid> set, int workers) {
  if (depth.width != K.width || depth.height != K.height)
    throw std::invalid_argument("coverage: depth/intrinsics size mismatch");

  CoverageResult result;
  result.mask.assign(static_cast<std::size_t>(depth.width) * depth.height, 0);
  if (!set.empty()) {
    parallel_for(0, static_cast<std::size_t>(depth.height), workers,
                 [&](std::size_t v) {
                   for (int u = 0; u < depth.width; ++u) {
                     const Ray ray = K.pixel_ray(u, static_cast<double>(v));
                     for (const Cuboid& h : set) {
                       if (ray_intersect(h, ray)) {
                         result.mask[v * depth.width + u] = 1;
                         break;
                       }
                     }
                   }
                 });
  }

  std::size_t valid = 0;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    if (!DepthMap::is_valid(depth.values[i])) continue;
    ++valid;
    if (result.mask[i]) ++covered;
  }
  result.percent = valid == 0 ? 0.0
                              : 100.0 * static_cast<double>(covered) /
                                    static_cast<double>(valid);
  return result;
}

double covered_mean(std::span<const double> distances,
                    std::span<const std::uint8_t> covered,
                    std::size_t* num_covered) {
  if (distances.size() != covered.size())
    throw std::invalid_argument("covered_mean: mask/distances mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!covered[i]) continue;
    sum += distances[i];
    ++count;
  }
  if (num_covered) *num_covered = count;
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

EvalReport evaluate(const DepthMap& depth, const Intrinsics& K,
                    std::span<const Cuboid> set,
                    std::span<const double> bounds, int workers) {
  const PointCloud cloud = backproject(depth, K);
  const std::vector<double> dists = oa_distances(cloud.points, set, workers);
  const CoverageResult cov = coverage(depth, K, set, workers);

  EvalReport report;
  report.num_primitives = set.size();
  report.coverage_percent = cov.percent;
  report.num_points = cloud.points.size();

  if (set.empty() || cloud.points.empty()) {
    report.mean_oa_all = uncovered_distance();
  } else {
    double sum = 0.0;
    for (double d : dists) sum += d;
    report.mean_oa_all = sum / static_cast<double>(dists.size());
  }

  std::vector<std::uint8_t> point_covered(cloud.points.size(), 0);
  for (std::size_t i = 0; i < cloud.points.size(); ++i)
    point_covered[i] = cov.mask[cloud.pixel_index[i]];
  report.mean_oa_covered =
      covered_mean(dists, point_covered, &report.num_covered);

  for (double b : bounds) report.auc[b] = auc(dists, b);
  return report;
}

CoverageResult superquadric_coverage(const DepthMap& depth,
                                     const Intrinsics& K,
                                     std::span<const Superquadric> set,
                                     int line_samples, int workers) {
  if (depth.width != K.width || depth.height != K.height)
    throw std::invalid_argument("coverage: depth/intrinsics size mismatch");
  CoverageResult result;
  result.mask.assign(static_cast<std::size_t>(depth.width) * depth.height, 0);
  if (!set.empty()) {
    parallel_for(0, static_cast<std::size_t>(depth.height), workers,
                 [&](std::size_t v) {
                   for (int u = 0; u < depth.width; ++u) {
                     const Ray ray = K.pixel_ray(u, static_cast<double>(v));
                     for (const Superquadric& s : set) {
                       if (SqDistanceField::ray_hits(s, ray, line_samples)) {
                         result.mask[v * depth.width + u] = 1;
                         break;
                       }
                     }
                   }
                 });
  }
  std::size_t valid = 0, covered = 0;
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    if (!DepthMap::is_valid(depth.values[i])) continue;
    ++valid;
    if (result.mask[i]) ++covered;
  }
  result.percent = valid == 0 ? 0.0
                              : 100.0 * static_cast<double>(covered) /
                                    static_cast<double>(valid);
  return result;
}

EvalReport evaluate_superquadrics(const DepthMap& depth, const Intrinsics& K,
                                  std::span<const Superquadric> set,
                                  std::span<const double> bounds,
                                  int n_surface, int line_samples,
                                  int workers) {
  const PointCloud cloud = backproject(depth, K);
  const SqDistanceField field(set, n_surface, line_samples, 0x5eed);
  std::vector<double> dists(cloud.points.size());
  parallel_for(0, cloud.points.size(), workers, [&](std::size_t i) {
    dists[i] = field.oa_distance(cloud.points[i]);
  });
  const CoverageResult cov =
      superquadric_coverage(depth, K, set, line_samples, workers);

  EvalReport report;
  report.num_primitives = set.size();
  report.coverage_percent = cov.percent;
  report.num_points = cloud.points.size();

  if (set.empty() || cloud.points.empty()) {
    report.mean_oa_all = uncovered_distance();
  } else {
    double sum = 0.0;
    for (double d : dists) sum += d;
    report.mean_oa_all = sum / static_cast<double>(dists.size());
  }

  std::vector<std::uint8_t> point_covered(cloud.points.size(), 0);
  for (std::size_t i = 0; i < cloud.points.size(); ++i)
    point_covered[i] = cov.mask[cloud.pixel_index[i]];
  report.mean_oa_covered =
      covered_mean(dists, point_covered, &report.num_covered);

  for (double b : bounds) report.auc[b] = auc(dists, b);
  return report;
}

}  // namespace cubist
