#pragma once

#include "gllab/fdoracle.hpp"
#include "gllab/glcurve.hpp"
#include "gllab/planecurve.hpp"
#include "gllab/torpedo.hpp"

namespace gllab {

// Cross-module identity suite on seeded random instances. Each check returns
// a CurvatureReport whose values are margins (tolerance minus observed error)
// against bound 0.

namespace identities {

inline SmoothFn random_smooth_kappa(Rng& rng, real lo, real hi) {
  std::vector<Term> terms;
  for (int i = 0; i < 3; ++i)
    terms.push_back(Term::sine(rng.uniform(-1.5, 1.5), rng.uniform(0.4, 2.5),
                               rng.uniform(0.0, 2 * M_PI)));
  return make_piecewise({lo, hi}, {Piece{terms}});
}

// |scal_revolution(A=0) - sigma of the radius profile| over seeded random
// smooth curves; the expansion carries 2(k-1) on the kappa sin(theta)/r term
// and (k-1)(k-2) on sin^2/r^2.
inline CurvatureReport revolution_identity(std::uint64_t seed, int curves, int samples,
                                           real tol = 1e-8) {
  Rng rng(seed);
  CurvatureReport rep;
  rep.name = "revolution_identity";
  rep.param_names = {"curve", "k"};
  rep.bound = 0;
  for (int c = 0; c < curves; ++c) {
    SmoothFn kappa = random_smooth_kappa(rng, 0.0, 1.0);
    CurveJet start{0.0, rng.uniform(1.5, 3.0), rng.uniform(0.1, M_PI / 2 - 0.1), 0.0};
    PlaneCurve curve = curve_from_curvature(kappa, start, 1.0);
    for (int k : {3, 4, 5}) {
      real worst = 0;
      for (real s : linspace(0.0, curve.s_max(), samples)) {
        const CurveJet cj = curve.jet(s);
        if (!(cj.r > 1e-6)) continue;
        // radius profile along arclength: r' = -cos(theta), r'' = kappa sin(theta)
        const Jet radius{cj.r, -std::cos(cj.theta), cj.kappa * std::sin(cj.theta), 0};
        const real lhs = scal_revolution_jet(cj, k, 0.0);
        const real rhs = sigma_formula(radius, k);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
      rep.add({real(c), real(k)}, tol - worst);
    }
  }
  rep.finalize();
  return rep;
}

// sigma(f^theta)(theta t) = sigma(f)(t)/theta^2 on random concave warpings.
inline CurvatureReport scaling_identity(std::uint64_t seed, real tol = 1e-10) {
  Rng rng(seed);
  CurvatureReport rep;
  rep.name = "scaling_identity";
  rep.param_names = {"case", "theta"};
  rep.bound = 0;
  int case_id = 0;
  for (real theta : {0.3, 1.0, 2.5}) {
    for (int rep_i = 0; rep_i < 4; ++rep_i) {
      const auto tor = build_torpedo(rng.uniform(0.5, 2.0), rng.uniform(0.03, 0.1));
      const int k = rng.uniform_int(3, 7);
      WarpSpec w = make_warp_spec(k, tor.f);
      WarpSpec ws = make_warp_spec(k, scale_warp(tor.f, theta));
      real worst = 0;
      for (real t : linspace(0.05, tor.f.hi() - 1e-9, 60)) {
        const real lhs = sigma_warp(ws, theta * t);
        const real rhs = sigma_warp(w, t) / (theta * theta);
        worst = std::max(worst, std::abs(lhs - rhs) / (1 + std::abs(rhs)));
      }
      rep.add({real(++case_id), theta}, tol - worst);
    }
  }
  rep.finalize();
  return rep;
}

// Conserved quantity h^{1/a}/sqrt(1+h'^2): drift along solutions and the
// terminal identity h(T) = C^a.
inline CurvatureReport bend_conserved(std::uint64_t seed, int cases, real drift_tol = 1e-8,
                                      real terminal_tol = 1e-6) {
  Rng rng(seed);
  CurvatureReport rep;
  rep.name = "bend_conserved";
  rep.param_names = {"case", "item"};
  rep.bound = 0;
  for (int c = 0; c < cases; ++c) {
    const real a = rng.uniform(0.5, 4.0);
    const auto sol = bend_profile_solve(a, rng.uniform(0.2, 2.0), -rng.uniform(0.1, 3.0),
                                        rng.uniform(-1.0, 1.0));
    rep.add({real(c), 1}, drift_tol - sol.max_drift);
    const real predicted = std::pow(sol.conserved, a);
    rep.add({real(c), 2},
            terminal_tol - std::abs(sol.h_T - predicted) / (1 + std::abs(predicted)));
  }
  rep.finalize();
  return rep;
}

// Mollification exactness wherever the base is affine on the bump support,
// over seeded random piecewise functions.
inline CurvatureReport mollifier_affine_exactness(std::uint64_t seed, int cases,
                                                  real tol = 1e-10) {
  Rng rng(seed);
  CurvatureReport rep;
  rep.name = "mollifier_affine_exactness";
  rep.param_names = {"case"};
  rep.bound = 0;
  for (int c = 0; c < cases; ++c) {
    const int n_breaks = rng.uniform_int(3, 6);
    std::vector<real> bp{0.0};
    for (int i = 0; i < n_breaks; ++i) bp.push_back(bp.back() + rng.uniform(0.3, 1.0));
    std::vector<Piece> pieces;
    std::vector<bool> affine;
    for (int i = 0; i < n_breaks; ++i) {
      switch (rng.uniform_int(0, 2)) {
        case 0:
          pieces.push_back(Piece::linear(rng.uniform(-1, 1), rng.uniform(-2, 2)));
          affine.push_back(true);
          break;
        case 1:
          pieces.push_back(Piece{{Term::sine(rng.uniform(-1, 1), rng.uniform(0.5, 3.0),
                                             rng.uniform(0, 6.28))}});
          affine.push_back(false);
          break;
        default:
          pieces.push_back(Piece{{Term::mono(rng.uniform(-1, 1), 2)}});
          affine.push_back(false);
      }
    }
    PiecewiseFn base(bp, pieces);
    const real eps = 0.9 * base.shortest_piece() / 2;
    SmoothFn m = mollify(base, eps);
    real worst = 0;
    for (size_t i = 0; i < pieces.size(); ++i) {
      if (!affine[i]) continue;
      const real lo = bp[i] + eps / 4, hi = bp[i + 1] - eps / 4;
      if (hi <= lo) continue;
      for (real t : linspace(lo, hi, 25))
        worst = std::max(worst, std::abs(m.value(t) - base.jet(t).v));
    }
    rep.add({real(c)}, tol - worst);
  }
  rep.finalize();
  return rep;
}

// Trace formula vs the finite-difference oracle: the conformal torus closed
// form and seeded random diagonal paths.
inline CurvatureReport oracle_agreement(std::uint64_t seed, int diag_cases, real rel_tol = 1e-5) {
  Rng rng(seed);
  CurvatureReport rep;
  rep.name = "oracle_agreement";
  rep.param_names = {"case", "d"};
  rep.bound = 0;

  // conformal torus: both against the closed form -2 d phi'' - d(d+1) phi'^2
  for (int d : {2, 3}) {
    auto phi = [](real t) {
      return Jet{0.25 * std::sin(t), 0.25 * std::cos(t), -0.25 * std::sin(t),
                 -0.25 * std::cos(t)};
    };
    MetricPath p;
    p.d = d;
    p.spatial_scal = 0;
    p.sample = [d, phi](real t, Mat& g, Mat& g1, Mat& g2) {
      const Jet ph = phi(t);
      const real e = std::exp(2 * ph.v);
      g = e * Mat::Identity(d, d);
      g1 = 2 * ph.d1 * e * Mat::Identity(d, d);
      g2 = (2 * ph.d2 + 4 * ph.d1 * ph.d1) * e * Mat::Identity(d, d);
    };
    real worst = 0;
    for (real t : linspace(0.0, 1.0, 9)) {
      const Jet ph = phi(t);
      const real closed = -2 * d * ph.d2 - d * (d + 1) * ph.d1 * ph.d1;
      const real traced = scal_trace_path(p, t);
      worst = std::max(worst, std::abs(traced - closed) / (1 + std::abs(closed)));
    }
    rep.add({0, real(d)}, rel_tol - worst);
  }

  for (int c = 0; c < diag_cases; ++c) {
    const int d = rng.uniform_int(2, 3);
    std::vector<std::array<real, 3>> coef(size_t(d));
    for (auto& ci : coef)
      ci = {rng.uniform(1.0, 2.0), rng.uniform(0.1, 0.45), rng.uniform(0.5, 2.0)};
    auto a_jet = [&](int i, real t) {
      const auto& ci = coef[size_t(i)];
      return Jet{ci[0] + ci[1] * std::sin(ci[2] * t), ci[1] * ci[2] * std::cos(ci[2] * t),
                 -ci[1] * ci[2] * ci[2] * std::sin(ci[2] * t), 0};
    };
    MetricPath p;
    p.d = d;
    p.spatial_scal = 0;
    p.sample = [d, a_jet](real t, Mat& g, Mat& g1, Mat& g2) {
      g = Mat::Zero(d, d);
      g1 = Mat::Zero(d, d);
      g2 = Mat::Zero(d, d);
      for (int i = 0; i < d; ++i) {
        const Jet ai = a_jet(i, t);
        g(i, i) = ai.v * ai.v;
        g1(i, i) = 2 * ai.v * ai.d1;
        g2(i, i) = 2 * (ai.d1 * ai.d1 + ai.v * ai.d2);
      }
    };
    MetricSampler full = [d, a_jet](const Vec& x) {
      Mat g = Mat::Zero(d + 1, d + 1);
      g(0, 0) = 1.0;
      for (int i = 0; i < d; ++i) {
        const Jet ai = a_jet(i, x[0]);
        g(i + 1, i + 1) = ai.v * ai.v;
      }
      return g;
    };
    real worst = 0;
    for (real t : {0.3, 0.7}) {
      Vec pt = Vec::Zero(d + 1);
      pt[0] = t;
      const real traced = scal_trace_path(p, t);
      const real fd = fd_oracle_scal(full, pt, d + 1);
      worst = std::max(worst, std::abs(traced - fd) / (1 + std::abs(traced)));
    }
    rep.add({real(c + 1), real(d)}, rel_tol - worst);
  }
  rep.finalize();
  return rep;
}

}  // namespace identities

}  // namespace gllab
