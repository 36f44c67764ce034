#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "gllab/common.hpp"

namespace gllab {

// Gauss-Legendre rule on [-1, 1]; nodes/weights computed once by Newton
// iteration on the Legendre polynomial.
template <int N>
struct GaussLegendre {
  std::array<real, N> x{};
  std::array<real, N> w{};

  GaussLegendre() {
    const int m = (N + 1) / 2;
    for (int i = 0; i < m; ++i) {
      real z = std::cos(M_PI * (real(i) + 0.75) / (real(N) + 0.5));
      real pp = 0;
      for (int it = 0; it < 100; ++it) {
        real p0 = 1, p1 = 0;
        for (int j = 0; j < N; ++j) {
          const real p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * z * p1 - real(j) * p2) / real(j + 1);
        }
        pp = real(N) * (z * p0 - p1) / (z * z - 1.0);
        const real dz = p0 / pp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[size_t(i)] = -z;
      x[size_t(N - 1 - i)] = z;
      w[size_t(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
      w[size_t(N - 1 - i)] = w[size_t(i)];
    }
  }

  template <typename F>
  real integrate(F&& f, real a, real b) const {
    const real c = 0.5 * (a + b), h = 0.5 * (b - a);
    real s = 0;
    for (int i = 0; i < N; ++i) s += w[size_t(i)] * f(c + h * x[size_t(i)]);
    return s * h;
  }
};

inline const GaussLegendre<32>& gl32() {
  static const GaussLegendre<32> rule;
  return rule;
}
inline const GaussLegendre<64>& gl64() {
  static const GaussLegendre<64> rule;
  return rule;
}

// One refinement step: the halved composite value is returned; the
// difference against the single-panel value serves as the error estimate.
template <typename F>
real integrate_refined(F&& f, real a, real b, real* err_est = nullptr) {
  const auto& rule = gl32();
  const real coarse = rule.integrate(f, a, b);
  const real mid = 0.5 * (a + b);
  const real fine = rule.integrate(f, a, mid) + rule.integrate(f, mid, b);
  if (err_est) *err_est = std::abs(fine - coarse);
  return fine;
}

// Adaptive Simpson, used only as an independent cross-check in tests and for
// generic antiderivatives of opaque integrands.
namespace detail {
template <typename F>
real simpson(F& f, real a, real b, real fa, real fm, real fb) {
  return (b - a) / 6.0 * (fa + 4 * fm + fb);
}
template <typename F>
real adapt(F& f, real a, real b, real fa, real fm, real fb, real whole, real tol, int depth) {
  const real m = 0.5 * (a + b);
  const real lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const real flm = f(lm), frm = f(rm);
  const real left = simpson(f, a, m, fa, flm, fm);
  const real right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adapt(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
}  // namespace detail

template <typename F>
real integrate_adaptive(F&& f, real a, real b, real tol = 1e-11, int max_depth = 40) {
  if (a == b) return 0;
  const real fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const real whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adapt(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace gllab
