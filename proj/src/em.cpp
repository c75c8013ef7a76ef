#include "cubist/em.hpp"

#include <algorithm>
#include <limits>

#include "cubist/errors.hpp"

namespace cubist {

namespace {

struct CuboidParams {
  // Layout per cuboid: size (0..2), axis-angle (3..5), translation (6..8).
  std::array<double, 9> x{};

  static CuboidParams from(const Cuboid& h) {
    CuboidParams p;
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
};

template <class T>
T sqdist_from_params(const std::array<T, 9>& x, const Vec3& point) {
  const TVec3<T> size{x[0], x[1], x[2]};
  const TVec3<T> aa{x[3], x[4], x[5]};
  const TMat3<T> rot = rotation_from_axis_angle_generic(aa);
  const TVec3<T> rel{T(point.x()) - x[6], T(point.y()) - x[7],
                     T(point.z()) - x[8]};
  return surface_sqdist_local(rot.apply_transposed(rel), size);
}

/// One E+forward pass: objective value and, when grads != nullptr, the
/// gradient of the expected log-likelihood with posteriors held fixed.
double objective_pass(std::span<const Vec3> points,
                      const std::vector<CuboidParams>& params,
                      const EmConfig& cfg,
                      std::vector<std::array<double, 9>>* grads) {
  const std::size_t m = params.size();
  const double inv_two_sigma_sq = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  const double log_norm =
      -0.5 * std::log(2.0 * M_PI * cfg.sigma * cfg.sigma);
  const double e_out = -0.5 * cfg.outlier_distance_sigmas *
                       cfg.outlier_distance_sigmas;  // none-class energy

  if (grads) grads->assign(m, {});

  std::vector<std::array<Dual<9>, 9>> seeded(grads ? m : 0);
  if (grads) {
    for (std::size_t h = 0; h < m; ++h)
      for (int k = 0; k < 9; ++k)
        seeded[h][k] = Dual<9>::seeded(params[h].x[k], k);
  }

  std::vector<Dual<9>> d2(m);
  std::vector<double> energy(m);
  std::vector<double> weight(m);

  double q_total = 0.0;
  for (const Vec3& y : points) {
    double e_max = e_out;
    for (std::size_t h = 0; h < m; ++h) {
      if (grads) {
        d2[h] = sqdist_from_params<Dual<9>>(seeded[h], y);
      } else {
        d2[h] = Dual<9>(sqdist_from_params<double>(params[h].x, y));
      }
      energy[h] = -d2[h].v * inv_two_sigma_sq;
      e_max = std::max(e_max, energy[h]);
    }
    // Posterior association over the cuboids plus the none-class, under a
    // uniform prior that cancels in the normalization. Shifting by e_max
    // keeps the weights well-defined for points far from every cuboid.
    double norm = std::exp(e_out - e_max);
    for (std::size_t h = 0; h < m; ++h) {
      weight[h] = std::exp(energy[h] - e_max);
      norm += weight[h];
    }
    q_total += (std::exp(e_out - e_max) / norm) * (log_norm + e_out);
    for (std::size_t h = 0; h < m; ++h) {
      const double w = weight[h] / norm;
      q_total += w * (log_norm + energy[h]);
      if (grads) {
        const double scale = -w * inv_two_sigma_sq;
        for (int k = 0; k < 9; ++k) (*grads)[h][k] += scale * d2[h].d[k];
      }
    }
  }
  return q_total;
}

}  // namespace

double em_objective(std::span<const Vec3> points, std::span<const Cuboid> set,
                    const EmConfig& cfg) {
  std::vector<CuboidParams> params;
  params.reserve(set.size());
  for (const Cuboid& h : set) params.push_back(CuboidParams::from(h));
  return objective_pass(points, params, cfg, nullptr);
}

EmResult em_refine(std::span<const Vec3> points, std::span<const Cuboid> set,
                   const EmConfig& cfg) {
  if (set.empty()) throw std::invalid_argument("em_refine: empty cuboid set");
  if (points.empty()) throw std::invalid_argument("em_refine: no points");

  std::vector<CuboidParams> params;
  params.reserve(set.size());
  for (const Cuboid& h : set) params.push_back(CuboidParams::from(h));

  const std::size_t dim = 9 * params.size();
  std::vector<double> m(dim, 0.0), v(dim, 0.0);
  std::vector<std::array<double, 9>> grads;

  std::vector<CuboidParams> best = params;
  double best_q = -std::numeric_limits<double>::infinity();
  EmResult result;

  for (int iter = 0; iter <= cfg.iterations; ++iter) {
    const double q = objective_pass(points, params, cfg, &grads);
    if (!std::isfinite(q))
      throw numerical_error("em_refine: non-finite objective");
    if (iter == 0) result.initial_objective = q;
    if (q > best_q) {
      best_q = q;
      best = params;
    }
    if (iter == cfg.iterations) break;

    const double bias1 = 1.0 - std::pow(cfg.beta1, iter + 1);
    const double bias2 = 1.0 - std::pow(cfg.beta2, iter + 1);
    for (std::size_t h = 0; h < params.size(); ++h) {
      for (int k = 0; k < 9; ++k) {
        const std::size_t j = 9 * h + k;
        const double g = grads[h][k];
        m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
        v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
        // Ascent on the expected log-likelihood.
        params[h].x[k] += cfg.step_size * (m[j] / bias1) /
                          (std::sqrt(v[j] / bias2) + cfg.epsilon);
      }
      for (int k = 0; k < 3; ++k)
        params[h].x[k] = std::clamp(params[h].x[k], cfg.size_min, cfg.size_max);
    }
  }

  result.final_objective = best_q;
  result.cuboids.reserve(best.size());
  for (const CuboidParams& p : best) result.cuboids.push_back(p.to_cuboid());
  return result;
}

}  // namespace cubist
