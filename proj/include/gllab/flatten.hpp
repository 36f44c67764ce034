#pragma once

#include "gllab/deform.hpp"

namespace gllab {

// ---------------------------------------------------------------------------
// Flattening homotopy at the warping level. Input: a radial-grid family
// x -> warping function on [0, R] with sigma >= B'' and f_x = h_delta for
// x >= 1/2. Output: (lambda, x) -> warping with the terminal slices flat
// near R, concave, and bounded by delta, with sigma >= B' throughout.
//
// Schedule per x (r(x) dampens the families, s(x) translates them):
//   lambda in [0, 1/3]:   f_x o u_{r(x), 3 lambda}            (sloping)
//   lambda in [1/3, 2/3]: f_x o u_{r(x),1} o v_{r(x), 3l-1}   (bending)
//   lambda in [2/3, 1]:   collar stretch around tau(x)
// ---------------------------------------------------------------------------

struct DeformFixture {
  std::string name;
  std::vector<real> x_grid;
  std::vector<WarpSpec> family;
  PSCBounds bounds;
  real R = 0;
  real r_flat = 0;    // all members are flat on [r_flat, R]
  real cap_eps = 0.05;
};

// Fixtures: "torpedo" (constant-in-x family h_delta) and "blend" (torpedo
// widened toward a larger-radius torpedo for x <= 1/2).
inline DeformFixture make_fixture(const std::string& name, int k, real delta, int x_points,
                                  real cap_eps = 0.05) {
  DeformFixture fx;
  fx.name = name;
  fx.cap_eps = cap_eps;
  fx.x_grid = linspace(0.0, 1.0, x_points);
  const real delta_wide = 1.15 * delta;
  const auto tor = build_torpedo(delta, cap_eps);
  const auto tor_wide = build_torpedo(delta_wide, cap_eps);
  fx.R = delta * (M_PI / 2 + cap_eps + 0.5);
  fx.r_flat = delta_wide * (M_PI / 2 + cap_eps);
  if (!(fx.r_flat < fx.R))
    throw construction_error("fixture: widened torpedo is not flat inside the window");

  const real top = real(k - 1) * real(k - 2) / (delta * delta);
  const real top_wide = real(k - 1) * real(k - 2) / (delta_wide * delta_wide);
  PSCBounds b;
  b.A = 0;
  b.k = k;
  b.delta = delta;
  b.Bpp = 0.7 * top_wide;
  b.Bp = 0.5 * b.Bpp;
  fx.bounds = b;

  SmoothFn base = restrict_fn(tor.f, 0.0, fx.R);
  SmoothFn wide = restrict_fn(tor_wide.f, 0.0, fx.R);
  for (real x : fx.x_grid) {
    SmoothFn f;
    if (name == "torpedo" || x >= 0.5) {
      f = base;
    } else if (name == "blend") {
      const real w = std::cos(M_PI * x) * std::cos(M_PI * x);
      f = convex_combine(base, wide, w);
    } else {
      throw parameter_error("make_fixture: unknown fixture '" + name + "'");
    }
    fx.family.push_back(make_warp_spec(k, f, 0.0));
  }
  // the bounds must actually hold on the family
  real measured = std::numeric_limits<real>::infinity();
  for (const auto& w : fx.family)
    for (real t : linspace(0.0, fx.R, 400)) measured = std::min(measured, sigma_warp(w, t));
  if (measured < fx.bounds.Bpp) {
    fx.bounds.Bpp = 0.95 * measured;
    fx.bounds.Bp = 0.5 * fx.bounds.Bpp;
    fx.bounds.validate();
  }
  return fx;
}

struct FlattenResult {
  std::vector<real> x_grid;
  std::vector<WarpSpec> input;
  PSCBounds bounds;
  real R = 0, r_flat = 0;
  // selected constants
  real S = 0, F = 0, p = 0, q = 0, T = 0, C_bend = 0, alpha = 0, eta_damp = 0;
  real tau_max = 0, clamp_eps = 0;
  SlopingFamily slope;
  BendingFamily bend;

  real r_of(real x) const {
    if (x <= 2.0 / 3) return 1.0;
    if (x >= 5.0 / 6) return eta_damp;
    return 6 * (eta_damp - 1) * x + 5 - 4 * eta_damp;
  }
  real s_of(real x) const { return std::max(real(0), 6 * R * x - 5 * R); }
  real tau_of(real x) const { return std::min(alpha + s_of(x), tau_max); }

  WarpSpec at(real lambda, size_t xi) const;
  real domain_end(real lambda, size_t xi) const { return at(lambda, xi).r_bar; }
};

namespace flatten_detail {

// root of H(t) = target for a nondecreasing reparametrization H
inline real invert_monotone(const SmoothFn& H, real target, real hint_hi) {
  real hi = std::max(hint_hi, real(1e-9));
  int guard = 0;
  while (H.eval_jet(std::min(hi, H.hi()), 0, true).v < target) {
    hi *= 2;
    if (hi > H.hi() + 1e-9 * std::abs(H.hi()) || guard++ > 2000)
      throw construction_error("flatten: reparametrization never reaches the gluing value");
  }
  real lo = 0;
  for (int it = 0; it < 400 && (hi - lo) > 1e-15 * (1 + hi); ++it) {
    const real mid = 0.5 * (lo + hi);
    (H.eval_jet(mid, 0, true).v < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// mollified clamp min(t, tau): identity below, constant tau above
inline SmoothFn clamp_fn(real tau, real eps, real domain_hi) {
  PiecewiseFn ramp({-1.0, tau, domain_hi}, {Piece::linear(0, 1), Piece::constant(tau)});
  return mollify(std::move(ramp), eps);
}

}  // namespace flatten_detail

inline WarpSpec FlattenResult::at(real lambda, size_t xi) const {
  if (lambda < 0 || lambda > 1) throw parameter_error("flatten at: lambda in [0,1]");
  const real x = x_grid[xi];
  const WarpSpec& base = input[xi];
  const real r = r_of(x), s = s_of(x);
  const real dev = s + std::min(0.8 * slope.a(), alpha / 2);

  auto shifted = [&](const SmoothFn& g) { return s == 0 ? g : shift_fn(g, s, s); };

  auto spec_from = [&](const SmoothFn& composed, real E) {
    SmoothFn w = SmoothFn(std::make_shared<RestrictNode>(composed, 0.0, E));
    return make_warp_spec(bounds.k, w, base.ambient_offset,
                          std::min(1e-3 * E, dev / 4));
  };

  if (lambda <= 1.0 / 3) {
    const real su = 3 * lambda;
    if (su == 0.0) return base;
    SmoothFn H = shifted(slope.member(r, su).u);
    const real E = flatten_detail::invert_monotone(H, R, R + s);
    return spec_from(compose_fn(base.f, H), E);
  }

  const auto u1 = slope.member(r, 1.0).u;
  if (lambda <= 2.0 / 3) {
    const real sv = 3 * lambda - 1;
    SmoothFn H;
    if (sv == 0.0) {
      H = shifted(u1);
    } else {
      const auto vm = bend.member(r, sv, 8 * R / std::min(real(1), 1 - sv + r * sv) + 4 * bend.beta());
      H = shifted(compose_fn(u1, vm.v));
    }
    const real E = flatten_detail::invert_monotone(H, R, R + s);
    return spec_from(compose_fn(base.f, H), E);
  }

  // collar stretch around tau(x)
  const auto vm = bend.member(r, 1.0, 8 * R / r + 4 * bend.beta());
  SmoothFn H23 = shifted(compose_fn(u1, vm.v));
  const real E23 = flatten_detail::invert_monotone(H23, R, R + s);
  SmoothFn G23 = SmoothFn(std::make_shared<RestrictNode>(compose_fn(base.f, H23), 0.0, E23));

  const real tau = tau_of(x);
  const real mu = std::min(real(1), 6 * (lambda - 2.0 / 3));
  const real a_glue = lambda <= 5.0 / 6 ? tau : tau + (6 * lambda - 5) * (R - tau);
  SmoothFn m = flatten_detail::clamp_fn(tau, clamp_eps, std::max(E23, R) + 1);
  if (mu < 1.0)
    m = affine_combine(0.0, 1 - mu, {{mu, m}});
  SmoothFn composed = compose_fn(G23, m);
  SmoothFn w = SmoothFn(std::make_shared<RestrictNode>(composed, 0.0, a_glue));
  return make_warp_spec(bounds.k, w, base.ambient_offset, std::min(1e-3 * a_glue, dev / 4));
}

inline FlattenResult flatten_homotopy(const std::vector<WarpSpec>& family,
                                      const std::vector<real>& x_grid, const PSCBounds& bounds,
                                      real R, real r_flat) {
  bounds.validate();
  if (family.size() != x_grid.size() || family.empty())
    throw parameter_error("flatten_homotopy: family and x grid must match");
  const int k = bounds.k;

  // preconditions: sigma >= B'' everywhere; the outer half is the torpedo
  for (size_t i = 0; i < family.size(); ++i) {
    for (real t : linspace(0.0, R, 300))
      if (sigma_warp(family[i], t) < bounds.Bpp - 1e-9)
        throw infeasibility_error("sigma >= B''",
                                  "flatten_homotopy: family member dips below B''");
  }
  for (size_t i = 0; i < family.size(); ++i) {
    if (x_grid[i] < 0.5) continue;
    for (real t : linspace(r_flat, R, 50)) {
      const Jet j = family[i].f.eval_jet(t, 1);
      if (std::abs(j.d1) > 1e-9)
        throw infeasibility_error("flat tail",
                                  "flatten_homotopy: outer members must be flat on [r_flat, R]");
    }
  }

  FlattenResult out;
  out.x_grid = x_grid;
  out.input = family;
  out.bounds = bounds;
  out.R = R;
  out.r_flat = r_flat;

  // S: largest grid value with concavity and slope range on [0, S] for all x,
  // B'' S^2 <= (k-1)(k-2), and S <= delta
  {
    const real s_cap = std::min({R, bounds.delta,
                                 std::sqrt(real(k - 1) * real(k - 2) / bounds.Bpp)});
    const auto grid = linspace(0.0, s_cap, 200);
    real best = 0;
    for (real cand : grid) {
      bool ok = true;
      for (const auto& w : family) {
        for (real t : linspace(0.0, cand, 60)) {
          const Jet j = w.f.eval_jet(t, 2);
          if (j.d2 > 1e-10 || j.d1 < -1e-10 || j.d1 > 1 + 1e-10) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
      }
      if (ok) best = cand;
    }
    if (!(best > 0)) throw infeasibility_error("S > 0", "flatten_homotopy: no admissible S");
    out.S = best;
  }

  out.F = std::numeric_limits<real>::infinity();
  for (const auto& w : family) out.F = std::min(out.F, w.f.eval_jet(0.8 * out.S, 0).v);
  if (!(out.F > 0)) throw infeasibility_error("F > 0", "flatten_homotopy: F must be positive");
  out.p = (bounds.Bpp - bounds.Bp) * out.F / (2 * (k - 1));
  out.q = out.S * out.p / 10;

  const real budget = real(k - 1) * real(k - 2) * (1 - (1 - out.q) * (1 - out.q));
  out.T = std::min(0.8 * out.S, std::sqrt(0.45 * budget / bounds.Bp));
  out.C_bend = 0.225 * budget / (k - 1);
  if (!(bounds.Bp * out.T * out.T + 2 * (k - 1) * out.C_bend <= budget))
    throw infeasibility_error("B' T^2 + 2(k-1)C <= budget",
                              "flatten_homotopy: bending budget infeasible");

  out.bend = bending_family(out.C_bend, out.T);
  out.alpha = out.bend.alpha();
  if (!(out.alpha < 0.8 * out.S))
    throw infeasibility_error("alpha < 8S/10", "flatten_homotopy: attacking point too large");
  out.slope = sloping_family(out.alpha, out.S, out.p, 4 * R);

  out.eta_damp =
      std::min(real(0.5), 0.9 * (bounds.Bpp - bounds.Bp) * bounds.delta /
                              (2 * (k - 1) * std::max(out.p, out.C_bend / (2 * out.alpha))));
  if (!(out.eta_damp > 0))
    throw infeasibility_error("eta > 0", "flatten_homotopy: dampening factor underflows");

  out.tau_max = 0.5 * (r_flat + R);
  if (!(out.alpha < (R - r_flat) / 4))
    throw infeasibility_error("alpha << R - r_flat",
                              "flatten_homotopy: flat window too small for the attacking point");
  out.clamp_eps = std::min(out.alpha / 4, (R - r_flat) / 4);
  return out;
}

// Verification over the (lambda, x, t) grid; values are A + sigma, the bound
// is B'. Domains with long slow tails are sampled on a graded grid.
inline CurvatureReport verify_flatten(const FlattenResult& fl, int n_lambda, int n_t) {
  CurvatureReport rep;
  rep.name = "flatten_scal";
  rep.param_names = {"lambda", "x", "t"};
  rep.bound = fl.bounds.Bp;
  const auto lambdas = linspace(0.0, 1.0, n_lambda);
  std::vector<std::vector<std::pair<std::vector<real>, real>>> rows(lambdas.size() *
                                                                    fl.x_grid.size());
  parallel_for(rows.size(), [&](size_t idx) {
    const size_t li = idx / fl.x_grid.size();
    const size_t xi = idx % fl.x_grid.size();
    const real lam = lambdas[li];
    const WarpSpec w = fl.at(lam, xi);
    const real E = w.r_bar;
    const real split = std::min(E, 2 * fl.R);
    const auto grid = graded_grid(0.0, split, E, (2 * n_t) / 3, E > 2 * split ? n_t / 3 : 0);
    auto& row = rows[idx];
    for (real t : grid)
      row.push_back({{lam, fl.x_grid[xi], t}, w.ambient_offset + sigma_warp(w, t)});
  });
  for (auto& row : rows)
    for (auto& [params, val] : row) rep.add(std::move(params), val);
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Torpedo matching: deform a flattened family until it equals h_delta on
// [0, R], matching back to the original values across a collar [R, R_inf].
// ---------------------------------------------------------------------------

struct MatchResult {
  std::vector<real> x_grid;
  std::vector<WarpSpec> input;   // flattened family on [0, R]
  PSCBounds bounds;
  real R = 0, R_inf = 0;
  real cap_eps = 0.05;
  std::vector<real> theta;       // scaling factor per x, 1 on the outer half
  std::vector<real> delta_x;     // f_x(R)
  real A_cc = 0;                 // min sigma over sampled convex combinations
  real beta = 0;                 // collar floor
  SmoothFn collar_profile;       // the ramp a(t) on [R, R_inf]

  // warping on [0, R]
  SmoothFn disc_at(real lambda, size_t xi) const;
  // warping on [R, R_inf]
  SmoothFn collar_at(real lambda, size_t xi) const;
  WarpSpec disc_spec(real lambda, size_t xi) const {
    return make_warp_spec(bounds.k, disc_at(lambda, xi), 0.0, input[xi].t_switch);
  }
};

namespace match_detail {

inline SmoothFn extended_torpedo(real radius, real cap_eps, real upto) {
  const auto tor = build_torpedo(radius, cap_eps);
  if (tor.f.hi() >= upto) return restrict_fn(tor.f, 0.0, upto);
  return restrict_fn(extend_const(tor.f, upto + 1), 0.0, upto);
}

}  // namespace match_detail

inline SmoothFn MatchResult::disc_at(real lambda, size_t xi) const {
  if (lambda < 0 || lambda > 1) throw parameter_error("match disc_at: lambda in [0,1]");
  const real th = theta[xi];
  const real dx = delta_x[xi];
  // members extended constantly so the rescaled copies cover [0, R]
  const real reach = 2 * R / std::min(th, real(1)) + 1;
  SmoothFn f_ext = restrict_fn(extend_const(input[xi].f, reach), 0.0, reach);
  if (lambda <= 1.0 / 3) {
    const real scale = 3 * lambda * th + (1 - 3 * lambda);
    return restrict_fn(scale_warp(f_ext, scale), 0.0, R);
  }
  if (lambda <= 2.0 / 3) {
    SmoothFn tor = match_detail::extended_torpedo(dx, cap_eps, reach);
    SmoothFn combo = convex_combine(f_ext, tor, 3 * lambda - 1);
    return restrict_fn(scale_warp(combo, th), 0.0, R);
  }
  const real rad = (3 - 3 * lambda) * th * dx + (3 * lambda - 2) * bounds.delta;
  return match_detail::extended_torpedo(rad, cap_eps, R);
}

inline SmoothFn MatchResult::collar_at(real lambda, size_t xi) const {
  const real p_val = disc_at(lambda, xi).eval_jet(R, 0).v;
  const real q_val = delta_x[xi];
  return collar_combination(p_val, q_val, collar_profile);
}

inline MatchResult torpedo_match_homotopy(const std::vector<WarpSpec>& family,
                                          const std::vector<real>& x_grid,
                                          const PSCBounds& bounds, real R, real cap_eps = 0.05,
                                          int theta_grid = 9, int t_grid = 120) {
  bounds.validate();
  if (family.size() != x_grid.size() || family.empty())
    throw parameter_error("torpedo_match_homotopy: family and x grid must match");
  const int k = bounds.k;

  MatchResult out;
  out.x_grid = x_grid;
  out.input = family;
  out.bounds = bounds;
  out.R = R;
  out.cap_eps = cap_eps;

  // preconditions: concave, slope in [0,1], flat near R, sigma >= B''
  for (size_t i = 0; i < family.size(); ++i) {
    const auto& w = family[i];
    for (real t : linspace(0.0, R, 200)) {
      const Jet j = w.f.eval_jet(t, 2);
      if (j.d2 > 1e-8 || j.d1 < -1e-9 || j.d1 > 1 + 1e-9)
        throw parameter_error("torpedo_match: input family not concave with slope in [0,1]");
    }
    if (std::abs(w.f.eval_jet(R, 1).d1) > 1e-9)
      throw parameter_error("torpedo_match: input family not flat near R");
    for (real t : linspace(0.0, R, 200))
      if (sigma_warp(w, t) < bounds.Bpp - 1e-9)
        throw infeasibility_error("sigma >= B''", "torpedo_match: input dips below B''");
    out.delta_x.push_back(w.f.eval_jet(R, 0).v);
  }

  // A_cc and theta(x): bisection on the feasibility boundary of the grid
  // predicate min sigma(combos scaled by theta) >= B''
  out.A_cc = std::numeric_limits<real>::infinity();
  out.theta.assign(x_grid.size(), 1.0);
  const auto mu_grid = linspace(0.0, 1.0, theta_grid);
  for (size_t xi = 0; xi < x_grid.size(); ++xi) {
    const real reach = 2 * R + 1;
    SmoothFn f_ext = restrict_fn(extend_const(family[xi].f, reach), 0.0, reach);
    SmoothFn tor = match_detail::extended_torpedo(out.delta_x[xi], cap_eps, reach);
    auto min_sigma_combos = [&](real th) {
      real m = std::numeric_limits<real>::infinity();
      for (real mu : mu_grid) {
        WarpSpec w = make_warp_spec(k, convex_combine(f_ext, tor, mu), 0.0,
                                    family[xi].t_switch);
        for (real t : linspace(0.0, R, t_grid)) {
          // sigma of the theta-scaled combination at theta * t
          m = std::min(m, sigma_warp(w, t) / (th * th));
        }
      }
      return m;
    };
    const real m1 = min_sigma_combos(1.0);
    out.A_cc = std::min(out.A_cc, m1);
    if (!(m1 > 0))
      throw infeasibility_error("A_cc > 0",
                                "torpedo_match: a convex combination loses positivity");
    if (x_grid[xi] >= 0.5 || m1 >= bounds.Bpp) {
      out.theta[xi] = 1.0;
      continue;
    }
    real lo = std::sqrt(m1 / bounds.Bpp) * 0.5, hi = 1.0;
    if (!(min_sigma_combos(lo) >= bounds.Bpp))
      throw infeasibility_error("theta bisection",
                                "torpedo_match: no feasible scaling bracket");
    while (hi - lo > 1e-4) {
      const real mid = 0.5 * (lo + hi);
      (min_sigma_combos(mid) >= bounds.Bpp ? lo : hi) = mid;
    }
    out.theta[xi] = lo;
  }

  // collar: beta and a profile wide enough for the budget chain. When the
  // flattened tails are many orders below delta the needed collar length
  // scales like delta^2/beta (the construction allows it to be as long as
  // required); the chain inequality seeds the length so that the capped
  // doubling loop can close the bound.
  out.beta = bounds.delta;
  for (size_t xi = 0; xi < x_grid.size(); ++xi)
    out.beta = std::min({out.beta, out.theta[xi] * out.delta_x[xi]});
  const real kk = real(k - 1) * real(k - 2);
  const real margin = kk / (bounds.delta * bounds.delta) - bounds.Bp;
  const real L_seed =
      std::max(R, 3.0 * bounds.delta * bounds.delta * std::sqrt(2 * kk / margin) / out.beta);
  const auto collar = collar_interp(out.beta, bounds.delta, out.beta, R, R + L_seed, bounds);
  out.R_inf = collar.R_inf;
  out.collar_profile = collar.profile;
  return out;
}

// sigma >= B'' on the disc grid and >= B' on the collar; the terminal slice
// must equal h_delta on [0, R].
inline CurvatureReport verify_match(const MatchResult& mr, int n_lambda, int n_t) {
  CurvatureReport rep;
  rep.name = "match_scal";
  rep.param_names = {"zone", "lambda", "x", "t"};
  rep.bound = 0;
  const auto lambdas = linspace(0.0, 1.0, n_lambda);
  std::vector<std::vector<std::pair<std::vector<real>, real>>> rows(lambdas.size() *
                                                                    mr.x_grid.size());
  parallel_for(rows.size(), [&](size_t idx) {
    const size_t li = idx / mr.x_grid.size();
    const size_t xi = idx % mr.x_grid.size();
    const real lam = lambdas[li];
    const WarpSpec disc = mr.disc_spec(lam, xi);
    auto& row = rows[idx];
    for (real t : linspace(0.0, mr.R, n_t))
      row.push_back({{1, lam, mr.x_grid[xi], t}, sigma_warp(disc, t) - mr.bounds.Bpp});
    const SmoothFn col = mr.collar_at(lam, xi);
    for (real t : linspace(mr.R, mr.R_inf, n_t / 2)) {
      const Jet j = col.eval_jet(t, 2);
      row.push_back({{2, lam, mr.x_grid[xi], t}, sigma_formula(j, mr.bounds.k) - mr.bounds.Bp});
    }
  });
  for (auto& row : rows)
    for (auto& [params, val] : row) rep.add(std::move(params), val);
  rep.finalize();
  return rep;
}

}  // namespace gllab
