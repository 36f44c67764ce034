#pragma once

#include "gllab/curvature.hpp"

namespace gllab {

// Torpedo function of radius delta: spherical near 0, constant past R,
// 0 <= f' <= 1, f'' <= 0, sigma(f) >= (k-1)(k-2)/delta^2.
struct TorpedoSpec {
  real delta = 1;
  real eps = 0.05;
  real R = 0;  // cylinder onset
  SmoothFn f;  // defined on [0, r_bar], constant tail past R
};

// Concave transition u with u = id on [0, pi/2 - eps], u = pi/2 on
// [pi/2 + eps, inf), u'' <= 0: the ramp min(t, pi/2) mollified with radius
// 4*eps, so the transition zone is exactly [pi/2 - eps, pi/2 + eps].
inline SmoothFn build_cap_profile(real eps) {
  if (!(eps > 0) || !(eps < M_PI / 4))
    throw parameter_error("build_cap_profile: eps in (0, pi/4) required");
  const real half_pi = M_PI / 2;
  PiecewiseFn ramp({-1.0, half_pi, M_PI + 1.0},
                   {Piece::linear(0, 1), Piece::constant(half_pi)});
  return mollify(std::move(ramp), 4 * eps);
}

inline TorpedoSpec build_torpedo(real delta, real eps) {
  if (!(delta > 0)) throw parameter_error("build_torpedo: delta must be positive");
  SmoothFn u = build_cap_profile(eps);
  SmoothFn h1 = compose_fn(fn_sin(-1.5, M_PI), u);  // h_1 = sin(u(t))
  TorpedoSpec spec;
  spec.delta = delta;
  spec.eps = eps;
  spec.f = scale_warp(SmoothFn(std::make_shared<RestrictNode>(h1, 0.0, M_PI + 1.0)), delta);
  spec.R = delta * (M_PI / 2 + eps);
  return spec;
}

// Checks the four defining conditions on a grid and reports the worst margin
// of each: (1) 0 <= f' <= 1, (2) f'' <= 0, (3) a constant tail exists,
// (4) sigma(f) >= (k-1)(k-2)/delta^2. Failures are report entries, not errors.
inline CurvatureReport validate_torpedo(const SmoothFn& f, real delta, int k, int grid_n = 1000) {
  CurvatureReport rep;
  rep.name = "torpedo_conditions";
  rep.param_names = {"condition"};
  const real target_bound = real(k - 1) * real(k - 2) / (delta * delta);
  // grid evaluation slack; condition margins are otherwise exact zeros on the
  // cylinder where the definition holds with equality
  rep.bound = -1e-12 * (1.0 + target_bound);

  const real lo = std::max(f.lo(), real(0));
  const real hi = f.hi();
  const auto grid = linspace(lo, hi, grid_n);

  real m1 = std::numeric_limits<real>::infinity();
  real m2 = std::numeric_limits<real>::infinity();
  for (real t : grid) {
    const Jet j = f.eval_jet(t, 2);
    m1 = std::min({m1, j.d1, 1.0 - j.d1});
    m2 = std::min(m2, -j.d2);
  }
  rep.add({1}, m1);
  rep.add({2}, m2);

  // constant tail: the largest suffix of the grid on which f == delta and
  // f' == 0 to tolerance; margin is its length
  const real tail_tol = 1e-8 * (1.0 + delta);
  real tail_start = hi;
  for (size_t i = grid.size(); i-- > 0;) {
    const Jet j = f.eval_jet(grid[i], 1);
    if (std::abs(j.v - delta) > tail_tol || std::abs(j.d1) > tail_tol) break;
    tail_start = grid[i];
  }
  rep.add({3}, (hi - tail_start) > 0 ? (hi - tail_start) : -1.0);

  real m4 = std::numeric_limits<real>::infinity();
  const real target = real(k - 1) * real(k - 2) / (delta * delta);
  WarpSpec w;
  bool valid = true;
  try {
    w = make_warp_spec(k, f);
  } catch (const invalid_warping_error&) {
    valid = false;
  }
  if (valid) {
    for (real t : grid) {
      try {
        m4 = std::min(m4, sigma_warp(w, t) - target);
      } catch (const invalid_warping_error&) {
        m4 = -std::numeric_limits<real>::infinity();
        break;
      }
    }
  } else {
    m4 = -std::numeric_limits<real>::infinity();
  }
  rep.add({4}, m4);
  rep.finalize();
  return rep;
}

}  // namespace gllab
