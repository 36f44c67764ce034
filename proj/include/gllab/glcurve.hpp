#pragma once

#include "gllab/planecurve.hpp"
#include "gllab/torpedo.hpp"

namespace gllab {

// ---------------------------------------------------------------------------
// Parameter selection for the bent-tube curve family
// ---------------------------------------------------------------------------

// Must be positive for the critical-bend radius bound to admit a positive
// value. With the corrected curvature coefficients a = 2 fails at k = 3.
inline real variant_feasibility(int k, real a) { return -2.0 / a + real(k) - 2.0; }

struct GLParams {
  int k = 3;
  real eta = 0.1, eps0 = 0.1, ell = 2.0, r0 = 1.0;
  real rho = 2.0, C = 0.0, base_scal = 0.0;
  real a = 3.0;
  real r1 = 0, r2 = 0, r3 = 0, r4 = 0, r5 = 0;
  real theta0 = 0, q = 0;
  real step_delta = 0;  // width parameter of the initial curvature block
  real omega = 0;       // cap blend length and minimum horizontal run
  real moll_u = 0;      // curvature smoothing radius (halved on retries)
};

// Constant pipeline: a with -2/a + k - 2 > 0, rho = 2 r0, r1 = r0, r2 (with
// the C = 0 convention r2 = r1/2), r3 = r2/2, delta = (r2 - r3)/4, q from
// q (2(k-1)/r3 + C) <= eta/2, theta0 = q delta, r4, and the conserved-
// quantity value r5 = r4 sin(theta0)^a.
inline GLParams select_parameters(int k, real eta, real eps0, real ell, real r0, real C,
                                  real base_scal, real force_a = 0) {
  if (k < 3) throw parameter_error("select_parameters: k >= 3 required");
  if (!(eta > 0) || !(eps0 > 0) || !(ell > 0) || !(r0 > 0) || C < 0)
    throw parameter_error("select_parameters: eta, eps0, ell, r0 > 0 and C >= 0 required");
  GLParams p;
  p.k = k;
  p.eta = eta;
  p.eps0 = eps0;
  p.ell = ell;
  p.r0 = r0;
  p.C = C;
  p.base_scal = base_scal;
  p.a = force_a > 0 ? force_a : 2.0 / (k - 2) + 1.0;
  if (!(variant_feasibility(k, p.a) > 0))
    throw infeasibility_error("-2/a + k - 2",
                              "select_parameters: -2/a + k - 2 must be positive (a = " +
                                  std::to_string(p.a) + ", k = " + std::to_string(k) + ")");
  p.rho = 2 * r0;
  p.r1 = r0;
  p.r2 = C > 0 ? std::min(p.r1, (k - 1) / C) : p.r1 / 2;
  p.r3 = p.r2 / 2;
  p.step_delta = (p.r2 - p.r3) / 4;
  p.q = eta / (2 * (2 * (k - 1) / p.r3 + C));
  p.theta0 = p.q * p.step_delta;
  if (!(p.theta0 < M_PI / 2))
    throw infeasibility_error("q*delta < pi/2", "select_parameters: initial angle too large");
  p.r4 = std::min(eps0, p.r3 / 2);
  if (C > 0) {
    const real s0 = std::sin(p.theta0);
    p.r4 = std::min(p.r4, (k - 1) * s0 * s0 * variant_feasibility(k, p.a) / (C * (1 + 1 / p.a)));
  }
  if (!(p.r4 > 0)) throw infeasibility_error("r4 > 0", "select_parameters: no positive r4");
  p.r5 = p.r4 * std::pow(std::sin(p.theta0), p.a);
  if (!(p.r5 > 1e-300))
    throw infeasibility_error("r5 representable",
                              "select_parameters: inner width underflows double precision");
  p.omega = std::min({p.r5 / 2, p.step_delta, ell}) / 8;
  p.moll_u = p.omega / 2;
  return p;
}

// Margins of the selection inequalities; doubling q after selection, for
// example, violates the eta/2 budget and fails this report.
inline CurvatureReport validate_gl_params(const GLParams& p) {
  CurvatureReport rep;
  rep.name = "gl_params_constraints";
  rep.param_names = {"constraint"};
  rep.bound = 0;
  int id = 0;
  auto check = [&](real margin) { rep.add({real(++id)}, margin); };
  check(variant_feasibility(p.k, p.a));                              // 1
  check(p.eta / 2 - p.q * (2 * (p.k - 1) / p.r3 + p.C));             // 2
  check(M_PI / 2 - p.theta0);                                        // 3
  check(p.eps0 - p.r4);                                              // 4
  check(p.r3 - p.r4);                                                // 5
  check(p.r4 - p.r5);                                                // 6
  check(p.r2 - p.r3);                                                // 7
  check(p.r1 - p.r2);                                                // 8
  check(p.r0 - p.r1);                                                // 9
  check(p.rho - p.r0 - 1e-300);                                      // 10
  if (p.C > 0) {
    const real s0 = std::sin(p.theta0);
    check((p.k - 1) * s0 * s0 * variant_feasibility(p.k, p.a) / (p.C * (1 + 1 / p.a)) - p.r4);
  }
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// The bending ODE h'' = (1 + h'^2)/(a h): descend from a negative slope until
// the slope vanishes. The quantity h^{1/a}/sqrt(1 + h'^2) is conserved, which
// pins the terminal height h(T) = C^a.
// ---------------------------------------------------------------------------

class OdeSolutionNode final : public FnNode {
 public:
  OdeSolutionNode(OdeResult sol, std::function<Jet(real, const std::vector<real>&)> jets, real lo,
                  real hi)
      : sol_(std::move(sol)), jets_(std::move(jets)), lo_(lo), hi_(hi) {}
  real lo() const override { return lo_; }
  real hi() const override { return hi_; }
  Jet jet(real t, int) const override {
    std::vector<real> st;
    sol_.eval(t, st);
    return jets_(t, st);
  }

 private:
  OdeResult sol_;
  std::function<Jet(real, const std::vector<real>&)> jets_;
  real lo_, hi_;
};

struct BendSolution {
  SmoothFn profile;  // h on [t0, T]
  real T = 0;
  real h_T = 0;
  real conserved = 0;  // h^{1/a}/sqrt(1+h'^2), constant along the solution
  real max_drift = 0;  // observed drift of the conserved quantity
};

inline BendSolution bend_profile_solve(real a, real f0, real slope0, real t0) {
  if (!(a > 0) || !(f0 > 0) || !(slope0 < 0))
    throw parameter_error("bend_profile_solve: a > 0, f0 > 0, slope0 < 0 required");
  OdeRhs rhs = [a](real, const std::vector<real>& y, std::vector<real>& dy) {
    dy[0] = y[1];
    dy[1] = (1 + y[1] * y[1]) / (a * y[0]);
  };
  std::vector<OdeEvent> ev{
      OdeEvent{[](real, const std::vector<real>& y) { return y[1]; }, +1, true}};
  OdeOptions opts;
  opts.rtol = 1e-12;
  opts.atol = 1e-14;
  opts.event_tol = 1e-10;
  // h'' >= 1/(a h(t0)) while h' < 0 bounds the slope-zero time
  const real horizon = t0 + 1.2 * (-slope0) * a * f0 + 1.0;
  OdeResult sol = integrate_ode(rhs, {f0, slope0}, t0, horizon, opts, ev);
  if (sol.event_index != 0)
    throw solver_error("bend_profile_solve: slope-zero event not located");

  BendSolution out;
  out.T = sol.t_end;
  const real c0 = std::pow(f0, 1 / a) / std::sqrt(1 + slope0 * slope0);
  out.conserved = c0;
  std::vector<real> st;
  for (real t : linspace(t0, out.T, 200)) {
    sol.eval(t, st);
    const real c = std::pow(st[0], 1 / a) / std::sqrt(1 + st[1] * st[1]);
    out.max_drift = std::max(out.max_drift, std::abs(c - c0));
  }
  sol.eval(out.T, st);
  out.h_T = st[0];
  auto jets = [a](real, const std::vector<real>& y) {
    const real h2 = (1 + y[1] * y[1]) / (a * y[0]);
    return Jet{y[0], y[1], h2, y[1] * h2 * (2 - a) / (a * y[0])};
  };
  out.profile = SmoothFn(std::make_shared<OdeSolutionNode>(std::move(sol), jets, t0, out.T));
  return out;
}

// ---------------------------------------------------------------------------
// Closed form of the critical bend in the angle variable. Along the bend
// kappa = sin(theta)/(a r) and r^{1/a} sin(theta) is conserved:
//   r(theta) = r4 (sin(theta0)/sin(theta))^a,
//   ds/dtheta = a r/sin(theta),  dy/dtheta = a r.
// The terminal stretch is resolved on knots geometric in pi/2 - theta, so
// the bend keeps full precision however small the final height r5 is.
// ---------------------------------------------------------------------------

class RawBend {
 public:
  RawBend() = default;
  RawBend(real a, real theta0, real r4) : a_(a), theta0_(theta0), r4_(r4) {
    r5_ = r4_ * std::pow(std::sin(theta0_), a_);
    real phi = M_PI / 2 - theta0_;
    while (phi > 1e-12) {
      phi_.push_back(phi);
      phi *= 0.5;
    }
    phi_.push_back(phi);
    phi_.push_back(0.0);
    s_pref_.assign(phi_.size(), 0.0);
    y_pref_.assign(phi_.size(), 0.0);
    const auto& rule = gl32();
    for (size_t j = 0; j + 1 < phi_.size(); ++j) {
      const real th_a = M_PI / 2 - phi_[j], th_b = M_PI / 2 - phi_[j + 1];
      s_pref_[j + 1] = s_pref_[j] + rule.integrate([this](real th) { return ds_dtheta(th); }, th_a,
                                                   th_b);
      y_pref_[j + 1] =
          y_pref_[j] + rule.integrate([this](real th) { return a_ * r_of_theta(th); }, th_a, th_b);
    }
    T_ = s_pref_.back();
    y_total_ = y_pref_.back();
  }

  real T() const { return T_; }
  real r5() const { return r5_; }
  real y_total() const { return y_total_; }
  real theta0() const { return theta0_; }

  real r_of_theta(real th) const {
    return r4_ * std::exp(a_ * (std::log(std::sin(theta0_)) - std::log(std::sin(th))));
  }
  real kappa_of_theta(real th) const { return std::sin(th) / (a_ * r_of_theta(th)); }
  real ds_dtheta(real th) const { return a_ * r_of_theta(th) / std::sin(th); }

  real s_of_theta(real th) const {
    const size_t j = bracket(th);
    return s_pref_[j] +
           gl32().integrate([this](real t) { return ds_dtheta(t); }, M_PI / 2 - phi_[j], th);
  }

  real y_of_theta(real th) const {
    const size_t j = bracket(th);
    return y_pref_[j] +
           gl32().integrate([this](real t) { return a_ * r_of_theta(t); }, M_PI / 2 - phi_[j], th);
  }

  real theta_of_s(real s) const {
    const real sc = std::clamp(s, real(0), T_);
    size_t lo = 0, hi = phi_.size() - 1;
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (sc < s_pref_[mid])
        hi = mid;
      else
        lo = mid;
    }
    real th = std::clamp(M_PI / 2 - 0.5 * (phi_[lo] + phi_[hi]), theta0_, M_PI / 2);
    for (int it = 0; it < 80; ++it) {
      const real f = s_of_theta(th) - sc;
      const real th_new = std::clamp(th - f / ds_dtheta(th), theta0_, M_PI / 2);
      if (std::abs(th_new - th) <= 4e-16 * (1 + th)) {
        th = th_new;
        break;
      }
      th = th_new;
    }
    return th;
  }

  real kappa_of_s(real s) const { return kappa_of_theta(theta_of_s(s)); }

 private:
  size_t bracket(real th) const {
    const real phi = M_PI / 2 - th;
    size_t j = 0;
    while (j + 2 < phi_.size() && phi_[j + 1] > phi) ++j;
    return j;
  }

  real a_ = 0, theta0_ = 0, r4_ = 0, r5_ = 0, T_ = 0, y_total_ = 0;
  std::vector<real> phi_;  // descending, last entry 0
  std::vector<real> s_pref_, y_pref_;
};

// ---------------------------------------------------------------------------
// Raw (piecewise C^2) curve bookkeeping in raw arclength from the outer
// anchor (y, r) = (0, rho) downward:
//   [0, b1]        axis segment and straight lead-in (kappa = 0)
//   [b1, b2]       initial bend, kappa = q (width delta)
//   [b2, s4]       straight run at angle theta0 down to height r4
//   [s4, s5]       critical bend
//   [s5, s5+len]   horizontal run
// The homotopy truncates kappa at cut(lambda) for lambda <= 1/2 and shrinks
// the horizontal run for lambda in [1/2, 1].
// ---------------------------------------------------------------------------

struct RawGLCurve {
  GLParams p;
  RawBend bend;
  real L_axis = 0, b1 = 0, b2 = 0;
  real len_straight = 0;
  real s4 = 0, s5 = 0;
  real r_b2 = 0, y_b2 = 0;
};

inline std::shared_ptr<const RawGLCurve> make_raw_gl_curve(const GLParams& p) {
  auto raw = std::make_shared<RawGLCurve>();
  raw->p = p;
  raw->bend = RawBend(p.a, p.theta0, p.r4);
  raw->L_axis = p.rho - p.r2;
  raw->b1 = raw->L_axis + p.step_delta;
  raw->b2 = raw->b1 + p.step_delta;
  raw->y_b2 = (1.0 - std::cos(p.theta0)) / p.q;
  raw->r_b2 = p.r2 - p.step_delta - std::sin(p.theta0) / p.q;
  if (raw->r_b2 <= p.r4) throw construction_error("gl curve: initial bend already below r4");
  raw->len_straight = (raw->r_b2 - p.r4) / std::cos(p.theta0);
  raw->s4 = raw->b2 + raw->len_straight;
  raw->s5 = raw->s4 + raw->bend.T();
  return raw;
}

// Truncated raw curvature with structural marks expressed relative to a
// window anchor, so evaluations keep full precision at the short scales.
struct LocalKappa {
  real rel_b1 = 0, rel_b2 = 0, rel_s4 = 0, rel_s5 = 0;
  real rel_cut = std::numeric_limits<real>::infinity();
  real q = 0;
  const RawBend* bend = nullptr;

  real operator()(real z) const {
    if (z >= rel_cut) return 0.0;
    if (z < rel_b1) return 0.0;
    if (z < rel_b2) return q;
    if (z < rel_s4) return 0.0;
    if (z < rel_s5) return bend->kappa_of_s(z - rel_s4);
    return 0.0;
  }

  std::vector<real> jumps_in(real lo, real hi) const {
    std::vector<real> out;
    for (real m : {rel_b1, rel_b2, rel_s4, rel_s5, rel_cut})
      if (std::isfinite(m) && m > lo && m < hi) out.push_back(m);
    std::sort(out.begin(), out.end());
    return out;
  }
};

// Mollification of the truncated raw curvature against the scaled bump,
// evaluated in window-local coordinates.
inline real mollified_kappa(const LocalKappa& kr, real u, real z) {
  const real h = u / 4;
  std::vector<real> cuts{z - h};
  for (real m : kr.jumps_in(z - h, z + h)) cuts.push_back(m);
  cuts.push_back(z + h);
  real s = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    s += integrate_refined([&](real w) { return bump_value((z - w) / u) / u * kr(w); }, cuts[i],
                           cuts[i + 1]);
  return s;
}

// ---------------------------------------------------------------------------
// Family construction
// ---------------------------------------------------------------------------

struct GLFamily {
  GLParams params;
  std::vector<real> lambda_grid;
  std::vector<PlaneCurve> curves;
  std::vector<size_t> horizontal_span;  // index of the horizontal/lowest run per curve
  real r_inf = 0;                       // inner width (horizontal height of the last curve)
  real length_achieved = 0;             // horizontal run length of the last curve
  real smoothing_u = 0;
  real cap_tiny = 0;  // r below which the circular-limit ratio is used
  std::shared_ptr<const RawGLCurve> raw;
};

namespace gl_detail {

// smooth 0 -> 1 ramp over [0, omega], exactly flat at both ends
inline SmoothFn cap_ramp(real omega) {
  PiecewiseFn ramp({0.0, omega / 4, 3 * omega / 4, omega},
                   {Piece::zero(), Piece::linear(-0.5, 2.0 / omega), Piece::constant(1.0)});
  return mollify(std::move(ramp), omega / 10);
}

struct CapResult {
  std::vector<PlaneCurve::Span> spans;
  real rho_c = 0;
  bool straight = false;
};

// The axis cap: a blend over [0, omega] ramping the curvature from 0 to the
// value -1/rho_c of the unique circle centered on the axis through the blend
// endpoint; the curve then follows that circle into the axis at a right
// angle. Degenerates to a straight drop when the entry angle vanishes.
inline CapResult solve_cap(const CurveJet& entry, real omega, const SmoothFn& ramp, real atol) {
  CapResult out;
  if (std::sin(entry.theta) < 1e-9) {
    out.straight = true;
    out.spans.push_back(straight_span(entry, entry.r / std::cos(entry.theta)));
    return out;
  }
  auto blend = [&](real rho_c) {
    auto kap = [ramp, rho_c](real tau) { return -ramp.eval_jet(tau, 0, true).v / rho_c; };
    std::vector<OdeEvent> ev{
        OdeEvent{[](real, const std::vector<real>& y) { return y[0]; }, -1, true},
        OdeEvent{[](real, const std::vector<real>& y) { return y[2]; }, -1, true}};
    return ode_span(kap, entry, omega, ev, 1e-10, atol);
  };
  auto fval = [&](real rho_c) {
    const auto res = blend(rho_c);
    if (res.sol.event_index >= 0) return std::max(res.end.r, real(0)) + 1e-30;
    return res.end.r - rho_c * std::sin(res.end.theta);
  };
  real hi = entry.r / std::sin(entry.theta);
  real f_hi = fval(hi);
  int guard = 0;
  while (f_hi > 0 && guard++ < 200) {
    hi *= 2;
    f_hi = fval(hi);
  }
  if (f_hi > 0) throw construction_error("gl cap: no circle radius bracket (upper)");
  real lo = hi;
  guard = 0;
  while (fval(lo) <= 0) {
    lo *= 0.5;
    if (lo < 1e-300 || guard++ > 2000)
      throw construction_error("gl cap: no circle radius bracket (lower)");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
    const real mid = 0.5 * (lo + hi);
    (fval(mid) > 0 ? lo : hi) = mid;
  }
  out.rho_c = 0.5 * (lo + hi);
  auto res = blend(out.rho_c);
  const real theta1 = res.end.theta;
  const real rho_c = out.rho_c;
  const real r1 = rho_c * std::sin(theta1);
  if (std::abs(r1 - res.end.r) > 1e-6 * (std::abs(r1) + 1e-300))
    throw construction_error("gl cap: blend endpoint does not meet the circle");
  const real y_c = res.end.y - rho_c * std::cos(theta1);
  out.spans.push_back(res.span);
  out.spans.push_back({0, rho_c * theta1, [y_c, rho_c, theta1](real tau) {
                         const real th = theta1 - tau / rho_c;
                         return CurveJet{y_c + rho_c * std::cos(th), rho_c * std::sin(th), th,
                                         -1.0 / rho_c};
                       }});
  return out;
}

}  // namespace gl_detail

// Assemble the curve for one lambda with smoothing radius u. Smoothed windows
// around curvature jumps are integrated in window-local coordinates; the
// stretches between them are rigid closed forms rotated by the accumulated
// angle drift. The total turning angle is snapped to the exact curvature
// mass, which mollification preserves.
struct BuiltGLCurve {
  PlaneCurve curve;
  size_t horizontal_span = 0;
  real horizontal_height = 0;
  real horizontal_length = 0;
};

inline BuiltGLCurve build_gl_curve(const std::shared_ptr<const RawGLCurve>& raw_sp, real lambda,
                                   real u, const SmoothFn& ramp) {
  const RawGLCurve& raw = *raw_sp;
  const GLParams& p = raw.p;
  const real atol = std::min(1e-14, 1e-6 * p.r5);
  BuiltGLCurve out;
  PlaneCurve& curve = out.curve;

  const real m_b1 = p.step_delta;
  const real m_b2 = 2 * p.step_delta;
  const real m_s4 = m_b2 + raw.len_straight;
  const real m_s5 = m_s4 + raw.bend.T();
  const real m_cut =
      lambda <= 0.5 ? 2 * lambda * (raw.s5 - raw.L_axis) : std::numeric_limits<real>::infinity();
  const real horiz_len =
      lambda <= 0.5 ? p.omega : p.omega + (2 * lambda - 1) * (2 * p.ell - p.omega);

  // all curvature truncated away: the curve is the axis segment
  if (m_cut <= m_b1) {
    curve.append(straight_span(CurveJet{0.0, p.rho, 0.0, 0.0}, p.rho));
    curve.axis_hit = p.rho;
    out.horizontal_span = 0;
    out.horizontal_height = 0;
    out.horizontal_length = 0;
    return out;
  }

  std::vector<real> jumps;
  for (real m : {m_b1, m_b2, m_s4})
    if (m < m_cut) jumps.push_back(m);
  jumps.push_back(std::min(m_s5, m_cut));
  std::sort(jumps.begin(), jumps.end());

  std::vector<std::pair<real, real>> windows;
  for (real j : jumps) {
    const real lo = j - u / 4, hi = j + u / 4;
    if (!windows.empty() && lo <= windows.back().second)
      windows.back().second = hi;
    else
      windows.emplace_back(lo, hi);
  }

  auto local_kappa = [&](real anchor) {
    LocalKappa kr;
    kr.q = p.q;
    kr.bend = &raw_sp->bend;
    kr.rel_b1 = m_b1 - anchor;
    kr.rel_b2 = m_b2 - anchor;
    kr.rel_s4 = m_s4 - anchor;
    kr.rel_s5 = m_s5 - anchor;
    if (std::isfinite(m_cut)) kr.rel_cut = m_cut - anchor;
    return kr;
  };

  CurveJet state{0.0, p.rho, 0.0, 0.0};

  // exact total curvature mass of kappa_trunc, which the mollification
  // preserves: the closed form avoids the ill-conditioned arclength-to-angle
  // map at the flat end of the bend
  real theta_exact;
  if (!std::isfinite(m_cut) || m_cut >= m_s5)
    theta_exact = M_PI / 2;
  else if (m_cut <= m_b2)
    theta_exact = p.q * (m_cut - m_b1);
  else if (m_cut <= m_s4)
    theta_exact = p.theta0;
  else
    theta_exact = raw.bend.theta_of_s(m_cut - m_s4);

  // straight lead-in from the outer anchor to the first window
  {
    const real len = raw.L_axis + windows.front().first;
    curve.append(straight_span(state, len));
    state = curve.span(curve.span_count() - 1).jet(len);
  }

  for (size_t w = 0; w < windows.size(); ++w) {
    const auto [wlo, whi] = windows[w];
    {
      LocalKappa kr = local_kappa(wlo);
      auto kap = [kr, u, raw_sp](real tau) { return mollified_kappa(kr, u, tau); };
      auto res = ode_span(kap, state, whi - wlo, {}, 1e-10, atol);
      curve.append(res.span);
      state = res.end;
    }
    if (w + 1 == windows.size()) break;

    const real next_lo = windows[w + 1].first;
    const real len = next_lo - whi;
    if (len <= 0) continue;
    LocalKappa kr_mid = local_kappa(whi);
    const real z_mid = 0.5 * len;
    if (z_mid >= kr_mid.rel_b1 && z_mid < kr_mid.rel_b2 && z_mid < kr_mid.rel_cut) {
      curve.append(arc_span(state, p.q, len));
      state = curve.span(curve.span_count() - 1).jet(len);
    } else if (z_mid >= kr_mid.rel_s4 && z_mid < kr_mid.rel_s5 && z_mid < kr_mid.rel_cut) {
      // inside the critical bend: rotate the closed form by the angle drift
      const real tau0 = whi - m_s4;
      const real th0_raw = raw.bend.theta_of_s(tau0);
      const real dtheta = state.theta - th0_raw;
      const real y0_raw = raw.bend.y_of_theta(th0_raw);
      const real r0_raw = raw.bend.r_of_theta(th0_raw);
      const real cd = std::cos(dtheta), sd = std::sin(dtheta);
      const CurveJet entry = state;
      curve.append({0, len, [=, bend_keeper = raw_sp](real tau) {
                      const RawBend& b = bend_keeper->bend;
                      const real th = b.theta_of_s(tau0 + tau);
                      const real dy = b.y_of_theta(th) - y0_raw;
                      const real dr = b.r_of_theta(th) - r0_raw;
                      return CurveJet{entry.y + cd * dy - sd * dr, entry.r + sd * dy + cd * dr,
                                      th + dtheta, b.kappa_of_theta(th)};
                    }});
      state = curve.span(curve.span_count() - 1).jet(len);
    } else {
      curve.append(straight_span(state, len));
      state = curve.span(curve.span_count() - 1).jet(len);
    }
  }

  // snap the angle onto the exact curvature mass
  if (std::abs(state.theta - theta_exact) > 1e-6)
    throw construction_error("gl curve: angle drift after smoothing exceeds tolerance");
  state.theta = theta_exact;

  if (lambda <= 0.5) {
    if (state.r > p.r5 && std::cos(state.theta) > 1e-12) {
      const real drop = (state.r - p.r5) / std::cos(state.theta);
      curve.append(straight_span(state, drop));
      state = curve.span(curve.span_count() - 1).jet(drop);
    }
    out.horizontal_span = curve.span_count();
    curve.append(straight_span(state, horiz_len));
    state = curve.span(curve.span_count() - 1).jet(horiz_len);
  } else {
    out.horizontal_span = curve.span_count();
    curve.append(straight_span(state, horiz_len - u / 4));
    state = curve.span(curve.span_count() - 1).jet(horiz_len - u / 4);
  }
  {
    const auto& hspan = curve.span(out.horizontal_span);
    out.horizontal_height = hspan.jet(hspan.len / 2).r;
    out.horizontal_length = hspan.len;
  }

  auto cap = gl_detail::solve_cap(state, p.omega, ramp, atol);
  for (auto& sp : cap.spans) curve.append(std::move(sp));
  curve.axis_hit = curve.s_max();
  return out;
}

inline CurvatureReport verify_gl_family(const GLFamily& fam, int k, real C, real base_scal,
                                        int s_samples = 400) {
  CurvatureReport rep;
  rep.name = "gl_family_scal";
  rep.param_names = {"lambda", "s"};
  rep.bound = base_scal - fam.params.eta;
  const real tiny = fam.cap_tiny;
  std::vector<std::vector<std::pair<std::vector<real>, real>>> rows(fam.curves.size());
  parallel_for(fam.curves.size(), [&](size_t ci) {
    const PlaneCurve& c = fam.curves[ci];
    const real lam = fam.lambda_grid[ci];
    const real total = c.s_max();
    auto& row = rows[ci];
    for (size_t sp = 0; sp < c.span_count(); ++sp) {
      const auto& span = c.span(sp);
      const int n = std::max(6, int(std::lround(real(s_samples) * span.len / total)));
      for (int i = 0; i <= n; ++i) {
        const real tau = span.len * real(i) / real(n);
        const CurveJet cj = c.jet_local(sp, tau);
        if (!(cj.r > 0)) continue;  // the axis endpoint itself
        real val;
        if (C == 0 || cj.r <= tiny)
          val = scal_revolution_jet(cj, k, base_scal, tiny);
        else
          val = lower_bound_estimate(cj, k, C, base_scal);
        row.push_back({{lam, span.s0 + tau}, val});
      }
    }
  });
  for (auto& row : rows)
    for (auto& [params, val] : row) rep.add(std::move(params), val);
  rep.finalize();
  return rep;
}

inline GLFamily build_gl_family(const GLParams& p, const std::vector<real>& lambda_grid) {
  if (lambda_grid.size() < 2) throw parameter_error("build_gl_family: need at least two lambdas");
  GLFamily fam;
  fam.params = p;
  fam.lambda_grid = lambda_grid;
  fam.raw = make_raw_gl_curve(p);
  fam.cap_tiny = 1e-7 * p.r5;

  real u = p.moll_u;
  const SmoothFn ramp = gl_detail::cap_ramp(p.omega);
  for (int attempt = 0;; ++attempt) {
    fam.smoothing_u = u;
    fam.curves.assign(fam.lambda_grid.size(), PlaneCurve{});
    fam.horizontal_span.assign(fam.lambda_grid.size(), 0);
    std::vector<BuiltGLCurve> built(fam.lambda_grid.size());
    parallel_for(fam.lambda_grid.size(), [&](size_t i) {
      built[i] = build_gl_curve(fam.raw, fam.lambda_grid[i], u, ramp);
    });
    for (size_t i = 0; i < built.size(); ++i) {
      fam.curves[i] = std::move(built[i].curve);
      fam.horizontal_span[i] = built[i].horizontal_span;
    }
    fam.r_inf = built.back().horizontal_height;
    fam.length_achieved = built.back().horizontal_length;
    const CurvatureReport rep = verify_gl_family(fam, p.k, p.C, p.base_scal);
    if (rep.pass) break;
    if (attempt >= 6)
      throw construction_error("build_gl_family: verification failed after smoothing retries");
    u /= 2;
  }
  return fam;
}

inline GLFamily build_gl_family(const GLParams& p, int lambda_points = 51) {
  return build_gl_family(p, linspace(0.0, 1.0, lambda_points));
}

}  // namespace gllab
