#pragma once

#include "gllab/glcurve.hpp"
#include "gllab/torpedo.hpp"

namespace gllab {

// ---------------------------------------------------------------------------
// Curvature budget for the warping-level deformations:
//   B <= B' < B'' < (k-1)(k-2)/delta^2,  B = max{0, -A}.
// ---------------------------------------------------------------------------

struct PSCBounds {
  real A = 0;    // ambient offset, stands for inf scal(g_N)
  real Bp = 0;   // B'
  real Bpp = 0;  // B''
  int k = 3;
  real delta = 1;

  real B() const { return std::max(real(0), -A); }

  void validate() const {
    const real top = real(k - 1) * real(k - 2) / (delta * delta);
    if (!(B() <= Bp && Bp < Bpp && Bpp < top))
      throw parameter_error("psc bounds: need B <= B' < B'' < (k-1)(k-2)/delta^2");
  }
};

// ---------------------------------------------------------------------------
// Sloping functions u_{r,s}: identity below 8a/10, slope 1-sq on the long
// middle stretch, slope 1-sq+rsq past c_{r,s} where u(c_{r,s}) = b, with
// u'' <= p r. Built from two second-derivative blocks
//   w = -s chi_[17a/20,19a/20] 10q/a + r s chi_[17e/20,19e/20] 10q/e
// integrated twice and mollified; e is pinned by v(8e/10) = 8b/10.
// ---------------------------------------------------------------------------

class SlopingFamily {
 public:
  struct Member {
    SmoothFn u;
    real c = 0;  // u(c) = b
    real e = 0;
  };

  SlopingFamily() = default;
  SlopingFamily(real a, real b, real p, real domain_hi)
      : a_(a), b_(b), p_(p), hi_(domain_hi) {
    if (!(a > 0) || !(a < 0.8 * b) || !(p > 0))
      throw parameter_error("sloping_family: 0 < a < 8b/10 and p > 0 required");
    q_ = b * p / 10;
    if (!(q_ < 1)) throw parameter_error("sloping_family: resulting slope q must be below 1");
    eps_ = a / 40;
  }

  real a() const { return a_; }
  real b() const { return b_; }
  real p() const { return p_; }
  real q() const { return q_; }
  real domain_hi() const { return hi_; }

  // e from the linear relation v(8e/10) = 8b/10 (the second block lies
  // beyond 8e/10, the first contributes -sq (x - 9a/10) past its support)
  real e_of(real r, real s) const {
    (void)r;
    const real sq = s * q_;
    if (sq == 0) return b_;
    return (b_ - 1.125 * a_ * sq) / (1 - sq);
  }

  Member member(real r, real s) const {
    if (r < 0 || r > 1 || s < 0 || s > 1)
      throw parameter_error("sloping member: (r,s) in [0,1]^2 required");
    const real e = e_of(r, s);
    const real lo = -std::max(hi_, real(2));
    PiecewiseFn w({lo, 0.85 * a_, 0.95 * a_, 0.85 * e, 0.95 * e, hi_},
                  {Piece::zero(), Piece::constant(-s * 10 * q_ / a_), Piece::zero(),
                   Piece::constant(r * s * 10 * q_ / e), Piece::zero()});
    Member m;
    m.e = e;
    m.u = integrate_twice(mollify(std::move(w), eps_), 0.0, 0.0, 1.0);
    // c: the unique point with u(c) = b
    real lo_c = 0.8 * b_, hi_c = hi_;
    if (m.u.value(hi_c) < b_)
      throw construction_error("sloping member: domain too short to reach b");
    for (int it = 0; it < 200 && (hi_c - lo_c) > 1e-15 * hi_c; ++it) {
      const real mid = 0.5 * (lo_c + hi_c);
      (m.u.value(mid) < b_ ? lo_c : hi_c) = mid;
    }
    m.c = 0.5 * (lo_c + hi_c);
    return m;
  }

 private:
  real a_ = 0, b_ = 0, p_ = 0, q_ = 0, hi_ = 0, eps_ = 0;
};

// All six clauses on a (r,s) grid; values are margins against zero.
inline CurvatureReport verify_sloping_clauses(const SlopingFamily& fam, int grid_rs = 5,
                                              int grid_t = 200) {
  CurvatureReport rep;
  rep.name = "sloping_clauses";
  rep.param_names = {"clause", "r", "s"};
  rep.bound = -1e-9;
  const real a = fam.a(), b = fam.b(), p = fam.p(), q = fam.q();
  for (real r : linspace(0.0, 1.0, grid_rs)) {
    for (real s : linspace(0.0, 1.0, grid_rs)) {
      const auto m = fam.member(r, s);
      real id_margin = std::numeric_limits<real>::infinity();   // (1)
      real upp = std::numeric_limits<real>::infinity();         // (3) pr - u''
      real sign_margin = std::numeric_limits<real>::infinity(); // (4)
      real plateau = std::numeric_limits<real>::infinity();     // (5)
      real range01 = std::numeric_limits<real>::infinity();     // (6)
      for (real t : linspace(-0.5 * b, fam.domain_hi() - 1e-9, grid_t)) {
        const Jet j = m.u.eval_jet(t, 2);
        if (s == 0.0 || t <= 0.8 * a) id_margin = std::min(id_margin, -std::abs(j.v - t));
        upp = std::min(upp, p * r - j.d2);
        if (t >= 0.8 * a && t <= a) sign_margin = std::min(sign_margin, -j.d2);
        if (t >= 0.8 * m.c && t <= m.c) sign_margin = std::min(sign_margin, j.d2);
        if ((t < 0.8 * a || (t > a && t < 0.8 * m.c) || t > m.c))
          sign_margin = std::min(sign_margin, -std::abs(j.d2));
        if (t >= a && t <= 0.8 * m.c)
          plateau = std::min(plateau, -std::abs(j.d1 - (1 - s * q)));
        if (t >= m.c) plateau = std::min(plateau, -std::abs(j.d1 - (1 - s * q + r * s * q)));
        range01 = std::min({range01, j.d1, 1 - j.d1});
      }
      const real at_c = -std::abs(m.u.value(m.c) - b);  // (2)
      rep.add({1, r, s}, id_margin);
      rep.add({2, r, s}, at_c);
      rep.add({3, r, s}, upp);
      rep.add({4, r, s}, sign_margin);
      rep.add({5, r, s}, plateau);
      rep.add({6, r, s}, range01);
    }
  }
  rep.finalize();
  return rep;
}

inline SlopingFamily sloping_family(real a, real b, real p, real domain_hi = 0) {
  if (domain_hi <= 0) domain_hi = 4 * b;
  for (int attempt = 0;; ++attempt) {
    SlopingFamily fam(a, b, p, domain_hi);
    const auto rep = verify_sloping_clauses(fam);
    if (rep.pass) return fam;
    if (attempt >= 3)
      throw construction_error("sloping_family: clause verification failed");
    domain_hi *= 2;
  }
}

// ---------------------------------------------------------------------------
// Bending functions v_{r,s} with attacking point alpha = (beta/4) e^{-1/C}:
//   f = -s chi_[4a/6,5a/6] 6/alpha + r s chi_[2 alpha, gamma] C/t,
// integrated twice and mollified. The log integral over [2 alpha, gamma]
// is exactly 1/C, so the terminal slope is 1-s+rs.
// ---------------------------------------------------------------------------

class BendingFamily {
 public:
  struct Member {
    SmoothFn v;
    real d = 0;  // v(d) = beta
  };

  BendingFamily() = default;
  BendingFamily(real C, real beta) : C_(C), beta_(beta) {
    if (!(C > 0) || !(beta > 0)) throw parameter_error("bending_family: C, beta > 0 required");
    gamma_ = beta / 2;
    alpha_ = (beta / 4) * std::exp(-1.0 / C);
    if (!(alpha_ > 1e-290))
      throw infeasibility_error("alpha representable",
                                "bending_family: attacking point underflows double precision");
    eps_ = alpha_ / 24;
  }

  real C() const { return C_; }
  real beta() const { return beta_; }
  real gamma() const { return gamma_; }
  real alpha() const { return alpha_; }

  Member member(real r, real s, real domain_hi = 0) const {
    if (!(r > 0) || r > 1 || s < 0 || s > 1)
      throw parameter_error("bending member: r in (0,1], s in [0,1] required");
    const real slope_end = 1 - s + r * s;
    if (domain_hi <= 0) domain_hi = gamma_ + 2 * beta_ / slope_end + 2 * beta_ + 1;
    PiecewiseFn f({-domain_hi, 4 * alpha_ / 6, 5 * alpha_ / 6, 2 * alpha_, gamma_, domain_hi},
                  {Piece::zero(), Piece::constant(-s * 6 / alpha_), Piece::zero(),
                   Piece{{Term::mono(r * s * C_, -1)}}, Piece::zero()});
    Member m;
    m.v = integrate_twice(mollify(std::move(f), eps_), 0.0, 0.0, 1.0);
    // d: v(d) = beta; terminal slope 1-s+rs > 0
    real hi = gamma_ + (beta_ - m.v.value(gamma_)) / slope_end * 1.01 + eps_;
    if (hi > domain_hi)
      throw construction_error("bending member: domain too short for the terminal height");
    real lo = gamma_;
    for (int it = 0; it < 300 && (hi - lo) > 1e-15 * std::abs(hi); ++it) {
      const real mid = 0.5 * (lo + hi);
      (m.v.value(mid) < beta_ ? lo : hi) = mid;
    }
    m.d = 0.5 * (lo + hi);
    return m;
  }

  // reach of the v = id region and the flat window of the s = 1 members
  real id_end() const { return 4 * alpha_ / 6 - eps_ / 4; }
  real flat_lo() const { return 5 * alpha_ / 6 + eps_ / 4; }
  real flat_hi() const { return 2 * alpha_ - eps_ / 4; }
  real eps() const { return eps_; }

 private:
  real C_ = 0, beta_ = 0, gamma_ = 0, alpha_ = 0, eps_ = 0;
};

inline CurvatureReport verify_bending_clauses(const BendingFamily& fam, int grid_rs = 5,
                                              int grid_t = 200) {
  CurvatureReport rep;
  rep.name = "bending_clauses";
  rep.param_names = {"clause", "r", "s"};
  rep.bound = -1e-5;
  const real alpha = fam.alpha(), beta = fam.beta(), C = fam.C();
  for (real r : linspace(1.0 / grid_rs, 1.0, grid_rs)) {
    for (real s : linspace(0.0, 1.0, grid_rs)) {
      const auto m = fam.member(r, s);
      const real d = m.d;
      real id_margin = std::numeric_limits<real>::infinity();   // (1)
      real envelope = std::numeric_limits<real>::infinity();    // (4) Cr/t - v''
      real open_sign = std::numeric_limits<real>::infinity();   // (4) v'' <= 0 off [2a, d]
      real terminal = std::numeric_limits<real>::infinity();    // (5)
      real range01 = std::numeric_limits<real>::infinity();     // (6)
      real flat1 = std::numeric_limits<real>::infinity();       // (3)
      // dense near the attacking point, coarse beyond
      std::vector<real> grid = linspace(-0.5 * alpha, 3 * alpha, grid_t);
      for (real t : linspace(3 * alpha, m.v.hi() - 1e-9 * std::abs(m.v.hi()), grid_t))
        grid.push_back(t);
      for (real t : grid) {
        const Jet j = m.v.eval_jet(t, 2);
        if (s == 0.0 || t <= alpha / 2) id_margin = std::min(id_margin, -std::abs(j.v - t));
        // the envelope is checked relative to its own scale: convolving the
        // convex 1/t block lifts it by a Jensen term of order (eps/t)^2
        if (t > 0)
          envelope = std::min(envelope, (C * r / t - j.d2) / (1 + C * r / t));
        if (t < 2 * alpha - fam.eps() / 2 || t > d + fam.eps() / 2)
          open_sign = std::min(open_sign, -j.d2);
        if (t >= d) terminal = std::min(terminal, -std::abs(j.d1 - (1 - s + r * s)));
        range01 = std::min({range01, j.d1, 1 - j.d1});
        if (s == 1.0 && t >= fam.flat_lo() && t <= fam.flat_hi())
          flat1 = std::min(flat1, -std::abs(j.d1));
      }
      rep.add({1, r, s}, id_margin);
      rep.add({2, r, s}, -std::abs(m.v.value(d) - beta));
      if (s == 1.0) rep.add({3, r, s}, flat1);
      rep.add({4, r, s}, std::min(envelope, open_sign));
      rep.add({5, r, s}, terminal);
      rep.add({6, r, s}, range01);
    }
  }
  rep.finalize();
  return rep;
}

inline BendingFamily bending_family(real C, real beta) {
  BendingFamily fam(C, beta);
  const auto rep = verify_bending_clauses(fam);
  if (!rep.pass) throw construction_error("bending_family: clause verification failed");
  return fam;
}

// ---------------------------------------------------------------------------
// Easy estimate: for sigma(f) >= B'' with 0 <= f' <= 1,
//   (1) B'' f^2 <= (k-1)(k-2) on [0, r]
//   (2) h'' <= (B''-B')/(2(k-1)) f(h) wherever h <= r
// imply sigma(f o h) >= B' on [0, s]. Hypothesis failures are reported and
// the conclusion is then not asserted.
// ---------------------------------------------------------------------------

inline CurvatureReport easy_estimate_check(const WarpSpec& f, const SmoothFn& h,
                                           const PSCBounds& bounds, real r, real s,
                                           int grid_n = 200) {
  if (!(r > 0) || !(s > 0)) throw parameter_error("easy_estimate_check: r, s > 0 required");
  bounds.validate();
  const int k = bounds.k;
  CurvatureReport rep;
  rep.name = "easy_estimate";
  rep.param_names = {"item", "t"};  // item 1,2: hypotheses; 3: h range; 4: conclusion
  rep.bound = 0;

  bool hyp_ok = true;
  for (real t : linspace(0.0, r, grid_n)) {
    const real fv = f.f.eval_jet(std::min(t, f.r_bar), 0).v;
    const real margin = real(k - 1) * real(k - 2) - bounds.Bpp * fv * fv;
    rep.add({1, t}, margin);
    hyp_ok = hyp_ok && margin >= 0;
  }
  for (real t : linspace(0.0, s, grid_n)) {
    const Jet hj = h.eval_jet(t, 2);
    rep.add({3, t}, r - hj.v);  // h([0,s]) subset [0,r]
    hyp_ok = hyp_ok && hj.v <= r;
    const real fh = f.f.eval_jet(std::clamp(hj.v, real(0), f.r_bar), 0).v;
    const real margin = (bounds.Bpp - bounds.Bp) / (2 * (k - 1)) * fh - hj.d2;
    rep.add({2, t}, margin);
    hyp_ok = hyp_ok && margin >= 0;
  }
  if (hyp_ok) {
    SmoothFn composed = compose_fn(f.f, restrict_fn(h, 0.0, s));
    WarpSpec w = make_warp_spec(k, SmoothFn(std::make_shared<RestrictNode>(composed, 0.0, s)),
                                f.ambient_offset, f.t_switch);
    for (real t : linspace(0.0, s, grid_n)) rep.add({4, t}, sigma_warp(w, t) - bounds.Bp);
  }
  rep.finalize();
  if (!hyp_ok) rep.pass = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Collar interpolation: a_{p,q}(t) = (1 - a(t)) p + a(t) q on [R, R_inf] with
// a mollified ramp a. The budget chain
//   (k-1)(k-2)/delta^2 - delta^2 (k-1)(k-2) a'^2/beta^2 - delta |a''|/beta >= B'
// improves like 1/(R_inf - R)^2; R_inf doubles until it holds (at most 8x).
// ---------------------------------------------------------------------------

struct CollarInterp {
  SmoothFn profile;      // the ramp a on [R, R_inf]
  SmoothFn a_pq;         // the interpolated warping values on [R, R_inf]
  real R = 0, R_inf = 0;
  CurvatureReport report;
};

// a_pq = (1-a) p + a q, evaluated with the two sides kept apart so the
// endpoint values survive even when p and q differ by many orders
inline SmoothFn collar_combination(real p_val, real q_val, const SmoothFn& a) {
  SmoothFn one_minus = affine_combine(1.0, 0.0, {{-1.0, a}});
  return affine_combine(0.0, 0.0, {{p_val, one_minus}, {q_val, a}});
}

inline SmoothFn collar_ramp(real R, real R_inf) {
  const real L = R_inf - R;
  PiecewiseFn ramp({R, R + L / 4, R + 3 * L / 4, R_inf},
                   {Piece::zero(), Piece::linear(-(R + L / 4) / (L / 2) * 1.0, 2.0 / L),
                    Piece::constant(1.0)});
  // intercept fixed so the ramp rises 0 -> 1 across the middle piece
  return mollify(std::move(ramp), L / 10);
}

inline CollarInterp collar_interp(real p_val, real q_val, real beta, real R, real R_inf,
                                  const PSCBounds& bounds) {
  bounds.validate();
  if (!(beta > 0) || p_val < beta - 1e-12 || q_val < beta - 1e-12 || p_val > bounds.delta + 1e-12 ||
      q_val > bounds.delta + 1e-12)
    throw parameter_error("collar_interp: p, q must lie in [beta, delta]");
  if (!(R_inf > R))
    throw infeasibility_error("R_inf > R", "collar_interp: no room to interpolate");
  const int k = bounds.k;
  const real kk = real(k - 1) * real(k - 2);
  CollarInterp out;
  out.R = R;
  for (int attempt = 0;; ++attempt) {
    SmoothFn a = collar_ramp(R, R_inf);
    real max_d1 = 0, max_d2 = 0;
    for (real t : linspace(R, R_inf, 400)) {
      const Jet j = a.eval_jet(t, 2);
      max_d1 = std::max(max_d1, std::abs(j.d1));
      max_d2 = std::max(max_d2, std::abs(j.d2));
    }
    const real dd = bounds.delta;
    const real chain = kk / (dd * dd) - dd * dd * kk * max_d1 * max_d1 / (beta * beta) -
                       dd * max_d2 / beta;
    if (chain >= bounds.Bp) {
      out.R_inf = R_inf;
      out.profile = a;
      out.a_pq = collar_combination(p_val, q_val, a);
      CurvatureReport rep;
      rep.name = "collar_interp";
      rep.param_names = {"t"};
      rep.bound = bounds.Bp;
      for (real t : linspace(R, R_inf, 400)) {
        const Jet j = out.a_pq.eval_jet(t, 2);
        rep.add({t}, sigma_formula(j, k));
      }
      rep.finalize();
      out.report = rep;
      return out;
    }
    if (attempt >= 8)
      throw infeasibility_error("collar chain",
                                "collar_interp: bound unreachable after doublings");
    R_inf = R + 2 * (R_inf - R);
  }
}

}  // namespace gllab
