#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace cubist {

/// Forward-mode dual number carrying N partial derivatives.
///
/// Used to differentiate the solver residual exactly instead of writing
/// out the piecewise closed-form partials by hand. At kinks of min/max/abs
/// the derivative of the inactive side (zero) is chosen.
template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit constant lift

  static Dual seeded(double value, int slot) {
    Dual x(value);
    x.d[slot] = 1.0;
    return x;
  }

  Dual operator-() const {
    Dual r(-v);
    for (int i = 0; i < N; ++i) r.d[i] = -d[i];
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }

  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r(a.v * b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }

  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual r(a.v / b.v);
    const double inv2 = 1.0 / (b.v * b.v);
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
    return r;
  }

  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
};

template <int N>
Dual<N> sin(const Dual<N>& x) {
  Dual<N> r(std::sin(x.v));
  const double c = std::cos(x.v);
  for (int i = 0; i < N; ++i) r.d[i] = c * x.d[i];
  return r;
}

template <int N>
Dual<N> cos(const Dual<N>& x) {
  Dual<N> r(std::cos(x.v));
  const double s = -std::sin(x.v);
  for (int i = 0; i < N; ++i) r.d[i] = s * x.d[i];
  return r;
}

template <int N>
Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.v);
  Dual<N> r(s);
  const double g = s > 0.0 ? 0.5 / s : 0.0;
  for (int i = 0; i < N; ++i) r.d[i] = g * x.d[i];
  return r;
}

/// max(x, 0) with derivative zero at the kink.
template <int N>
Dual<N> positive_part(const Dual<N>& x) {
  return x.v > 0.0 ? x : Dual<N>(0.0);
}

/// |x| with derivative zero at the kink.
template <int N>
Dual<N> abs(const Dual<N>& x) {
  if (x.v > 0.0) return x;
  if (x.v < 0.0) return -x;
  return Dual<N>(0.0);
}

template <int N>
Dual<N> sq(const Dual<N>& x) {
  return x * x;
}

// Plain-double counterparts so the same generic code instantiates for both.
inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }
inline double sq(double x) { return x * x; }

}  // namespace cubist
