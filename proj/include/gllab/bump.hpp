#pragma once

#include <cmath>

#include "gllab/jet.hpp"
#include "gllab/quadrature.hpp"

namespace gllab {

// Fixed even bump profile supported in (-1/4, 1/4) with unit integral:
//   xi(x) = c * exp(-1 / (1 - 16 x^2)),
// c fixed by numerical normalization.
namespace bump_detail {
inline real unnormalized(real x) {
  const real u = 1.0 - 16.0 * x * x;
  if (u <= 1e-14) return 0.0;
  return std::exp(-1.0 / u);
}
inline real norm_constant() {
  static const real c = [] {
    const auto& rule = gl64();
    const real half = rule.integrate([](real x) { return unnormalized(x); }, 0.0, 0.25);
    const real half2 = rule.integrate([](real x) { return unnormalized(x); }, 0.0, 0.125) +
                       rule.integrate([](real x) { return unnormalized(x); }, 0.125, 0.25);
    return 1.0 / (2.0 * half2 + 0.0 * half);
  }();
  return c;
}
}  // namespace bump_detail

inline Jet bump_jet(real x) {
  if (std::abs(x) >= 0.25 - 1e-15) return {};
  const Jet u{1.0 - 16.0 * x * x, -32.0 * x, -32.0, 0.0};
  const Jet g = -1.0 * jet_inv(u);
  return bump_detail::norm_constant() * jet_exp(g);
}

inline real bump_value(real x) { return bump_jet(x).v; }

// Scaled copy with support (-eps/4, eps/4): xi_eps(x) = xi(x/eps) / eps.
inline Jet bump_jet_scaled(real eps, real x) {
  const Jet b = bump_jet(x / eps);
  const real ie = 1.0 / eps;
  return {b.v * ie, b.d1 * ie * ie, b.d2 * ie * ie * ie, b.d3 * ie * ie * ie * ie};
}

inline real bump_deriv_scaled(real eps, real x, int order) {
  const Jet b = bump_jet_scaled(eps, x);
  return b[order];
}

}  // namespace gllab
