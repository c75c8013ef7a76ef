#include "cubist/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cubist/errors.hpp"
#include "cubist/parallel.hpp"

namespace cubist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOnSurfaceTolSq = 1e-18;  // (1e-9 m)^2, same as core geometry

/// Precomputed local frame of one cuboid for the per-point side kernel.
struct Frame {
  double rt[3][3];  // rows of R^T
  double t[3];
  double a[3];
  double cam[3];        // camera (origin) in the local frame
  double near_sq;       // squared world-space radius of possible influence
  double line_gap;      // ||t||^2 - r_sphere^2 for the sight-line test
  double t_norm_sq;

  explicit Frame(const Cuboid& h) {
    for (int i = 0; i < 3; ++i) {
      t[i] = h.translation[i];
      a[i] = h.half_extents[i];
      for (int j = 0; j < 3; ++j) rt[i][j] = h.rotation(j, i);
    }
    for (int i = 0; i < 3; ++i)
      cam[i] = -(rt[i][0] * t[0] + rt[i][1] * t[1] + rt[i][2] * t[2]);
    near_sq = t_norm_sq = line_gap = 0.0;
  }

  /// Must be called with the inlier cutoff before the kernel may gate.
  void prepare_gate(double fi_cut_gap) {
    const double r_bound = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    const double near = r_bound + 1.7320508075688772 * fi_cut_gap + 1e-8;
    near_sq = near * near;
    t_norm_sq = t[0] * t[0] + t[1] * t[1] + t[2] * t[2];
    const double r_line = r_bound + 1e-8;  // covers the 1e-9 surface slack
    line_gap = t_norm_sq - r_line * r_line;
  }
};

/// Inlier parameters with everything the per-point kernel needs hoisted
/// out of the loop. The expressions mirror soft_inlier / leaky_occlusion
/// exactly so the cached scorer stays bit-identical to them.
struct ScoreParams {
  double tau, beta, tau_c;
  double beta_over_tau;
  double fi_cut;      // f_I saturates to exactly 0 beyond this d^2
  double fi_cut_gap;  // sqrt(fi_cut) as an axis-excess bound for gating
  double leak_slope, leak_offset;

  explicit ScoreParams(const InlierParams& p)
      : tau(p.tau), beta(p.beta), tau_c(p.tau_c) {
    beta_over_tau = p.beta / p.tau;
    fi_cut = p.tau * (1.0 + 40.0 / p.beta);
    fi_cut_gap = std::sqrt(fi_cut);
    const double arg_c = p.beta / p.tau * p.tau_c - p.beta;
    const double s = detail::sigmoid(arg_c);
    leak_slope = s * (1.0 - s) * p.beta / p.tau;
    leak_offset = s - leak_slope * p.tau_c;
  }

  double inlier(double d_sq) const {
    return d_sq >= fi_cut ? 0.0
                          : detail::sigmoid(-(beta_over_tau * d_sq - beta));
  }

  double occlusion(double d_sq) const {
    if (d_sq < tau_c) return detail::sigmoid(beta_over_tau * d_sq - beta);
    return leak_slope * d_sq + leak_offset;
  }
};

/// Folds the six f_IO values of one cuboid into a running (min, max).
/// Single code path shared by the reference counters and the cached
/// scorer so they agree exactly. Points that can contribute only exact
/// zeros (far from every side, sight line missing the hull) are skipped;
/// folding six zeros leaves the combined f_OAI unchanged.
inline void fold_sides(const Frame& f, const Vec3& p, const ScoreParams& prm,
                       double& min_io, double& max_io) {
  const double dx = p.x() - f.t[0];
  const double dy = p.y() - f.t[1];
  const double dz = p.z() - f.t[2];

  // World-space gate: outside the influence sphere and with a sight line
  // that misses the bounding sphere, every side contributes an exact zero.
  const double rel_sq = dx * dx + dy * dy + dz * dz;
  if (rel_sq > f.near_sq && f.line_gap > 0.0) {
    const double y_dot_t =
        p.x() * f.t[0] + p.y() * f.t[1] + p.z() * f.t[2];
    const double y_sq = p.x() * p.x() + p.y() * p.y() + p.z() * p.z();
    if (y_dot_t * y_dot_t < f.line_gap * y_sq) {
      if (min_io > 0.0) min_io = 0.0;
      if (max_io < 0.0) max_io = 0.0;
      return;
    }
  }

  double l[3];
  for (int i = 0; i < 3; ++i)
    l[i] = f.rt[i][0] * dx + f.rt[i][1] * dy + f.rt[i][2] * dz;
  double exc2[3];
  double v[3];
  double exc_max = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double e = std::max(std::abs(l[i]) - f.a[i], 0.0);
    exc2[i] = e * e;
    exc_max = std::max(exc_max, e);
    v[i] = f.cam[i] - l[i];
  }

  if (exc_max >= prm.fi_cut_gap) {
    // Every side distance exceeds the inlier cutoff; only occlusion could
    // contribute, which needs the sight line to cross the (slightly
    // inflated) hull.
    double t_enter = 0.0;
    double t_exit = std::numeric_limits<double>::infinity();
    bool miss = false;
    for (int c = 0; c < 3 && !miss; ++c) {
      const double bound = f.a[c] + 2e-9;
      if (v[c] == 0.0) {
        miss = std::abs(l[c]) > bound;
        continue;
      }
      double t0 = (-bound - l[c]) / v[c];
      double t1 = (bound - l[c]) / v[c];
      if (t0 > t1) std::swap(t0, t1);
      t_enter = std::max(t_enter, t0);
      t_exit = std::min(t_exit, t1);
      miss = t_enter > t_exit;
    }
    if (miss) {
      if (min_io > 0.0) min_io = 0.0;
      if (max_io < 0.0) max_io = 0.0;
      return;
    }
  }

  for (int axis = 0; axis < 3; ++axis) {
    for (int s = 0; s < 2; ++s) {
      const double plane = s == 0 ? f.a[axis] : -f.a[axis];
      const double diff = l[axis] - plane;
      double d2 = diff * diff;
      for (int c = 0; c < 3; ++c)
        if (c != axis) d2 += exc2[c];

      bool occ = false;
      const double den = v[axis];
      if (den != 0.0) {
        const double lambda = (plane - l[axis]) / den;
        if (lambda > 0.0) {
          double e2 = 0.0;
          for (int c = 0; c < 3; ++c) {
            if (c == axis) continue;
            const double q = l[c] + lambda * v[c];
            const double e = std::max(std::abs(q) - f.a[c], 0.0);
            e2 += e * e;
          }
          occ = e2 <= kOnSurfaceTolSq;
        }
      }

      const double fi = prm.inlier(d2);
      const double io = occ ? fi - prm.occlusion(d2) : fi;
      if (io < min_io) min_io = io;
      if (io > max_io) max_io = io;
    }
  }
}

inline double combine(double min_io, double max_io) {
  if (max_io == -kInf) return 0.0;  // empty set
  return min_io < 0.0 ? min_io : max_io;
}

inline double plain_sqdist(const Frame& f, const Vec3& p) {
  const double dx = p.x() - f.t[0];
  const double dy = p.y() - f.t[1];
  const double dz = p.z() - f.t[2];
  double l[3];
  for (int i = 0; i < 3; ++i)
    l[i] = f.rt[i][0] * dx + f.rt[i][1] * dy + f.rt[i][2] * dz;
  return surface_sqdist_local(TVec3<double>(l[0], l[1], l[2]),
                              TVec3<double>(f.a[0], f.a[1], f.a[2]));
}

/// Walker-Vose alias table for O(1) categorical draws. Construction order
/// is fixed, so every build of the same weights behaves identically.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw io_error("weight map is empty");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw io_error("weight map has a negative weight");
      if (w > 0.0) ++positive_;
      sum += w;
    }
    if (!(sum > 0.0)) throw io_error("weight map sums to zero");

    prob_.resize(n);
    alias_.assign(n, 0);
    std::vector<std::uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    const double scale = static_cast<double>(n) / sum;
    for (std::size_t i = 0; i < n; ++i) {
      prob_[i] = weights[i] * scale;
      (prob_[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t g = large.back();
      alias_[s] = g;
      prob_[g] -= 1.0 - prob_[s];
      if (prob_[g] < 1.0) {
        large.pop_back();
        small.push_back(g);
      }
    }
    while (!large.empty()) {
      prob_[large.back()] = 1.0;
      large.pop_back();
    }
    while (!small.empty()) {
      prob_[small.back()] = 1.0;
      small.pop_back();
    }
  }

  int sample(Rng& rng) const {
    const std::uint32_t k =
        rng.uniform_index(static_cast<std::uint32_t>(prob_.size()));
    return rng.uniform() < prob_[k] ? static_cast<int>(k)
                                    : static_cast<int>(alias_[k]);
  }

  int positive_count() const { return positive_; }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
  int positive_ = 0;
};

/// C distinct indices from one categorical map. Redrawing a duplicate
/// samples exactly the renormalized remaining distribution; a linear-scan
/// fallback bounds the worst case on heavily concentrated maps.
std::vector<int> draw_without_replacement(const AliasTable& table,
                                          std::span<const double> weights,
                                          int count, Rng& rng) {
  if (table.positive_count() < count)
    throw io_error("weight map has fewer positive weights than the set size");
  std::vector<int> out;
  out.reserve(count);
  auto seen = [&](int idx) {
    return std::find(out.begin(), out.end(), idx) != out.end();
  };
  for (int j = 0; j < count; ++j) {
    int idx = -1;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const int cand = table.sample(rng);
      if (!seen(cand)) {
        idx = cand;
        break;
      }
    }
    if (idx < 0) {
      double total = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i)
        if (!seen(static_cast<int>(i))) total += weights[i];
      double pick = rng.uniform() * total;
      int last_positive = -1;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (seen(static_cast<int>(i)) || weights[i] <= 0.0) continue;
        last_positive = static_cast<int>(i);
        if (pick < weights[i]) {
          idx = last_positive;
          break;
        }
        pick -= weights[i];
      }
      if (idx < 0) idx = last_positive;
      if (idx < 0)
        throw numerical_error("minimal-set sampling failed to find an index");
    }
    out.push_back(idx);
  }
  return out;
}

int select_map(std::span<const double> selection, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < selection.size(); ++i) {
    acc += selection[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(selection.size()) - 1;
}

void validate_weight_maps(const WeightMaps& maps) {
  if (maps.maps.empty() || maps.selection.size() != maps.maps.size())
    throw io_error("weight maps and selection probabilities do not line up");
  double sum = 0.0;
  for (double q : maps.selection) {
    if (!(q >= 0.0)) throw io_error("negative selection probability");
    sum += q;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw io_error("selection probabilities do not sum to one");
}

}  // namespace

double side_inlier_outlier(const Vec3& point, const Cuboid& h, Side side,
                           const InlierParams& p) {
  const double d_sq = side_sqdist(h, point, side);
  double io = soft_inlier(d_sq, p);
  if (occludes(h, point, side)) io -= leaky_occlusion(d_sq, p);
  return io;
}

double occlusion_aware_inlier(const Vec3& point, std::span<const Cuboid> set,
                              const InlierParams& p) {
  const ScoreParams prm(p);
  double mn = kInf, mx = -kInf;
  for (const Cuboid& h : set) fold_sides(Frame(h), point, prm, mn, mx);
  return combine(mn, mx);
}

double inlier_count(std::span<const Vec3> points, std::span<const Cuboid> set,
                    const InlierParams& p) {
  const ScoreParams prm(p);
  std::vector<Frame> frames;
  frames.reserve(set.size());
  for (const Cuboid& h : set) frames.emplace_back(h);
  double total = 0.0;
  for (const Vec3& y : points) {
    double mn = kInf, mx = -kInf;
    for (const Frame& f : frames) fold_sides(f, y, prm, mn, mx);
    total += combine(mn, mx);
  }
  return total;
}

WeightMaps WeightMaps::uniform(std::size_t n_points) {
  WeightMaps w;
  w.maps.emplace_back(n_points, 1.0);
  w.selection.push_back(1.0);
  return w;
}

std::vector<int> sample_minimal_set(const WeightMaps& maps, int count,
                                    Rng& rng) {
  validate_weight_maps(maps);
  const int map_idx = select_map(maps.selection, rng);
  const AliasTable table(maps.maps[map_idx]);
  return draw_without_replacement(table, maps.maps[map_idx], count, rng);
}

double stopping_threshold(std::size_t n_points, const FitConfig& cfg) {
  if (cfg.theta) return *cfg.theta;
  return 9.0 * std::log(static_cast<double>(n_points));
}

InlierScorer::InlierScorer(std::span<const Vec3> points,
                           const InlierParams& params, InlierMetric metric)
    : points_(points), params_(params), metric_(metric) {
  if (metric_ == InlierMetric::occlusion_aware) {
    min_io_.assign(points.size(), kInf);
    max_io_.assign(points.size(), -kInf);
  } else {
    best_dsq_.assign(points.size(), kInf);
  }
}

void InlierScorer::add_cuboid(const Cuboid& h) {
  const ScoreParams prm(params_);
  const Frame frame(h);
  double total = 0.0;
  if (metric_ == InlierMetric::occlusion_aware) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      fold_sides(frame, points_[i], prm, min_io_[i], max_io_[i]);
      total += combine(min_io_[i], max_io_[i]);
    }
  } else {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      best_dsq_[i] = std::min(best_dsq_[i], plain_sqdist(frame, points_[i]));
      total += soft_inlier(best_dsq_[i], params_);
    }
  }
  base_ = total;
}

double InlierScorer::gain(const Cuboid& h, int workers) const {
  const ScoreParams prm(params_);
  const Frame frame(h);
  const std::size_t n = points_.size();

  // Fixed-size per-chunk partials keep the reduction order independent of
  // the worker count.
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);

  if (metric_ == InlierMetric::occlusion_aware) {
    parallel_for(0, chunks, workers, [&](std::size_t c) {
      const std::size_t lo = c * kChunk;
      const std::size_t hi = std::min(n, lo + kChunk);
      double sum = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        double mn = min_io_[i], mx = max_io_[i];
        fold_sides(frame, points_[i], prm, mn, mx);
        sum += combine(mn, mx);
      }
      partial[c] = sum;
    });
  } else {
    parallel_for(0, chunks, workers, [&](std::size_t c) {
      const std::size_t lo = c * kChunk;
      const std::size_t hi = std::min(n, lo + kChunk);
      double sum = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        const double d2 = std::min(best_dsq_[i], plain_sqdist(frame, points_[i]));
        sum += soft_inlier(d2, params_);
      }
      partial[c] = sum;
    });
  }

  double total = 0.0;
  for (double s : partial) total += s;
  return total - base_;
}

Hypothesis generate_and_select(std::span<const Vec3> points,
                               std::span<const Cuboid> current,
                               const WeightMaps& maps, const FitConfig& cfg,
                               int round) {
  if (static_cast<int>(points.size()) < cfg.minimal_set_size)
    throw std::invalid_argument("generate_and_select: too few points");
  validate_weight_maps(maps);

  InlierScorer scorer(points, cfg.inlier, cfg.metric);
  for (const Cuboid& h : current) scorer.add_cuboid(h);

  std::vector<AliasTable> tables;
  tables.reserve(maps.map_count());
  for (const auto& m : maps.maps) tables.emplace_back(m);

  const int count = cfg.hypotheses;
  std::vector<Cuboid> cuboids(count);
  std::vector<double> gains(count, -kInf);
  std::vector<std::uint8_t> valid(count, 0);

  parallel_for(0, static_cast<std::size_t>(count), cfg.workers,
               [&](std::size_t i) {
                 Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(round),
                                  static_cast<std::uint64_t>(i)));
                 const int map_idx = select_map(maps.selection, rng);
                 const auto indices = draw_without_replacement(
                     tables[map_idx], maps.maps[map_idx], cfg.minimal_set_size,
                     rng);
                 std::vector<Vec3> sample;
                 sample.reserve(indices.size());
                 for (int idx : indices) sample.push_back(points[idx]);
                 try {
                   const FitResult fit = fit_minimal(sample, cfg.solver);
                   if (fit.degenerate_init) return;
                   cuboids[i] = fit.cuboid;
                   gains[i] = scorer.gain(fit.cuboid, 1);
                   valid[i] = 1;
                 } catch (const numerical_error&) {
                   // degenerate hypothesis, leave invalid
                 }
               });

  int best = -1;
  for (int i = 0; i < count; ++i) {
    if (!valid[i]) continue;
    if (best < 0 || gains[i] > gains[best]) best = i;
  }
  if (best < 0)
    throw numerical_error("generate_and_select: every hypothesis degenerate");
  return Hypothesis{cuboids[best], gains[best]};
}

SceneFit fit_scene(std::span<const Vec3> points, const WeightMaps& maps,
                   const FitConfig& cfg) {
  if (points.empty()) throw std::invalid_argument("fit_scene: no points");
  const double theta = stopping_threshold(points.size(), cfg);

  SceneFit result;
  for (int round = 0; round < cfg.max_cuboids; ++round) {
    const Hypothesis hyp =
        generate_and_select(points, result.cuboids, maps, cfg, round);
    const bool accepted = hyp.inlier_gain > theta;
    result.rounds.push_back(
        RoundDiagnostics{round, hyp.inlier_gain, theta, accepted, hyp.cuboid});
    if (!accepted) break;
    result.cuboids.push_back(hyp.cuboid);
    if (cfg.refine_each_round)
      result.cuboids = em_refine(points, result.cuboids, cfg.em).cuboids;
  }
  return result;
}

}  // namespace cubist
