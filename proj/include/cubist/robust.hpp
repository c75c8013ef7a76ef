#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cubist/em.hpp"
#include "cubist/geometry.hpp"
#include "cubist/rng.hpp"
#include "cubist/solver.hpp"

namespace cubist {

/// Soft inlier / occlusion penalty parameters. Inlier functions consume
/// SQUARED distances; tau lives on that scale.
struct InlierParams {
  double tau = 0.004;    // inlier threshold (squared-distance scale)
  double beta = 5.0;     // sigmoid softness
  double tau_c = 0.008;  // occlusion penalty transition, 2 * tau

  static InlierParams with_tau(double tau, double beta = 5.0,
                               double tau_c_multiplier = 2.0) {
    return InlierParams{tau, beta, tau_c_multiplier * tau};
  }
};

namespace detail {
// Shared saturating sigmoid so cached and reference scoring paths agree
// bit-for-bit.
inline double sigmoid(double x) {
  if (x >= 40.0) return 1.0;
  if (x <= -40.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}
}  // namespace detail

/// f_I: 1 - sigmoid(beta/tau * d^2 - beta). Decreasing, 0.5 at d^2 = tau.
inline double soft_inlier(double d_sq, const InlierParams& p) {
  return detail::sigmoid(-(p.beta / p.tau * d_sq - p.beta));
}

/// Leaky occlusion penalty: 1 - f_I below tau_c, affine continuation with
/// matched slope above, so far occluders keep getting penalised.
inline double leaky_occlusion(double d_sq, const InlierParams& p) {
  const double arg_c = p.beta / p.tau * p.tau_c - p.beta;
  if (d_sq < p.tau_c) return detail::sigmoid(p.beta / p.tau * d_sq - p.beta);
  const double s = detail::sigmoid(arg_c);
  const double slope = s * (1.0 - s) * p.beta / p.tau;
  const double offset = s - slope * p.tau_c;
  return slope * d_sq + offset;
}

/// f_IO for one cuboid side: inlier score minus occlusion penalty when the
/// side occludes the point. Positive: fits; negative: occluded; ~0: outlier.
double side_inlier_outlier(const Vec3& point, const Cuboid& h, Side side,
                           const InlierParams& p);

/// f_OAI: the worst (most negative) side wins if any side marks the point
/// occluded-dominated; otherwise the best fitting side. Zero for an empty
/// set.
double occlusion_aware_inlier(const Vec3& point, std::span<const Cuboid> set,
                              const InlierParams& p);

/// I_c: sum of f_OAI over all points; additive over point partitions.
double inlier_count(std::span<const Vec3> points, std::span<const Cuboid> set,
                    const InlierParams& p);

/// Per-point sampling weight sets plus selection probabilities over them.
struct WeightMaps {
  std::vector<std::vector<double>> maps;
  std::vector<double> selection;  // sums to 1

  static WeightMaps uniform(std::size_t n_points);
  std::size_t map_count() const { return maps.size(); }
};

/// Two-stage draw: pick a map by the selection probabilities, then a
/// without-replacement minimal set from that map's categorical weights.
/// Throws if the selected map has fewer than `count` positive weights.
std::vector<int> sample_minimal_set(const WeightMaps& maps, int count,
                                    Rng& rng);

enum class InlierMetric {
  occlusion_aware,  // f_OAI scoring (the default)
  plain_distance,   // f_I of the nearest-cuboid distance, no occlusion term
};

struct FitConfig {
  int minimal_set_size = 6;
  int hypotheses = 4096;
  int max_cuboids = 8;
  std::optional<double> theta;  // stopping threshold; default 9 ln(n)
  std::uint64_t seed = 0;
  InlierParams inlier;
  SolverOptions solver;
  InlierMetric metric = InlierMetric::occlusion_aware;
  int workers = 1;
  // Optional EM pass over all accepted cuboids after each selection, as in
  // the refinement appendix; acceptance decisions still use the selection
  // gains.
  bool refine_each_round = false;
  EmConfig em;
};

struct Hypothesis {
  Cuboid cuboid;
  double inlier_gain = 0.0;  // I_c(Y, M + h) - I_c(Y, M)
};

struct RoundDiagnostics {
  int round = 0;
  double gain = 0.0;
  double theta = 0.0;
  bool accepted = false;
  Cuboid cuboid;
};

/// GRIC-derived acceptance threshold: each cuboid adds nine parameters, so
/// a new one must buy at least 9 ln(n) inliers.
double stopping_threshold(std::size_t n_points, const FitConfig& cfg);

/// Incremental inlier-count evaluator: folds accepted cuboids once and
/// scores candidate cuboids against the cached per-point state. Exactly
/// matches occlusion_aware_inlier / inlier_count.
class InlierScorer {
 public:
  InlierScorer(std::span<const Vec3> points, const InlierParams& params,
               InlierMetric metric);

  void add_cuboid(const Cuboid& h);
  double base() const { return base_; }
  /// I_c(Y, M + h) - I_c(Y, M) for the folded set M.
  double gain(const Cuboid& h, int workers = 1) const;

 private:
  std::span<const Vec3> points_;
  InlierParams params_;
  InlierMetric metric_;
  std::vector<double> min_io_;    // occlusion-aware state
  std::vector<double> max_io_;
  std::vector<double> best_dsq_;  // plain-distance state
  double base_ = 0.0;
};

/// One RANSAC round: samples `hypotheses` minimal sets, fits each, scores
/// by inlier gain against the current set, returns the argmax (ties broken
/// by lowest hypothesis index). Deterministic given cfg.seed and the round
/// index regardless of worker count. Throws numerical_error if every fit
/// is degenerate.
Hypothesis generate_and_select(std::span<const Vec3> points,
                               std::span<const Cuboid> current,
                               const WeightMaps& maps, const FitConfig& cfg,
                               int round = 0);

struct SceneFit {
  std::vector<Cuboid> cuboids;
  std::vector<RoundDiagnostics> rounds;
};

/// Occlusion-aware sequential RANSAC: keeps adding the best hypothesis
/// while its inlier gain exceeds the stopping threshold, up to max_cuboids.
SceneFit fit_scene(std::span<const Vec3> points, const WeightMaps& maps,
                   const FitConfig& cfg);

}  // namespace cubist
