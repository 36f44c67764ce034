#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "gllab/bump.hpp"
#include "gllab/piecewise.hpp"
#include "gllab/quadrature.hpp"

namespace gllab {

// ---------------------------------------------------------------------------
// SmoothFn: a real function of one variable evaluable with derivatives to
// order 3. Leaves are closed-form piecewise data, optionally mollified
// against the fixed bump profile; inner nodes are the algebraic operations
// the constructions need (affine combinations, warp scaling, translation,
// composition, restriction, constant extension). All nodes are immutable.
// ---------------------------------------------------------------------------

class FnNode {
 public:
  virtual ~FnNode() = default;
  virtual real lo() const = 0;
  virtual real hi() const = 0;
  virtual Jet jet(real t, int order) const = 0;
};

class SmoothFn {
 public:
  SmoothFn() = default;
  explicit SmoothFn(std::shared_ptr<const FnNode> node) : node_(std::move(node)) {}

  bool valid() const { return node_ != nullptr; }
  real lo() const { return node_->lo(); }
  real hi() const { return node_->hi(); }
  const FnNode* node() const { return node_.get(); }
  std::shared_ptr<const FnNode> node_ptr() const { return node_; }

  // Jets outside the declared domain raise a domain error unless `extended`
  // is set (quadrature windows may reach slightly past the ends, where the
  // end pieces extend).
  Jet eval_jet(real t, int order = 3, bool extended = false) const {
    if (!extended) {
      const real tol = 1e-9 * (1.0 + std::abs(lo()) + std::abs(hi()));
      if (t < lo() - tol || t > hi() + tol)
        throw domain_error("eval_jet: t outside the function domain");
    }
    Jet j = node_->jet(t, order);
    if (order < 3) j.d3 = 0;
    if (order < 2) j.d2 = 0;
    if (order < 1) j.d1 = 0;
    return j;
  }

  real value(real t) const { return eval_jet(t, 0).v; }
  real deriv1(real t) const { return eval_jet(t, 1).d1; }
  real deriv2(real t) const { return eval_jet(t, 2).d2; }

 private:
  std::shared_ptr<const FnNode> node_;
};

// ---------------------------------------------------------------------------
// Leaf nodes
// ---------------------------------------------------------------------------

class PiecewiseNode final : public FnNode {
 public:
  explicit PiecewiseNode(PiecewiseFn pw) : pw_(std::move(pw)) {}
  real lo() const override { return pw_.lo(); }
  real hi() const override { return pw_.hi(); }
  Jet jet(real t, int) const override { return pw_.jet(t); }
  const PiecewiseFn& data() const { return pw_; }

 private:
  PiecewiseFn pw_;
};

// Convolution against the scaled bump. The m-th derivative is the a.e.
// convolution of the m-th piece derivative plus bump-derivative corrections
// for the distributional jumps at breakpoints:
//   (xi*f)^(m) = int xi_eps(t-x) f_ae^(m)(x) dx
//              + sum_c sum_{j<m} xi_eps^(m-1-j)(t-c) [f^(j)](c).
class MollifiedNode final : public FnNode {
 public:
  MollifiedNode(PiecewiseFn base, real eps) : base_(std::move(base)), eps_(eps) {
    if (!(eps_ > 0)) throw parameter_error("mollify: epsilon must be positive");
    if (!(eps_ < base_.shortest_piece() / 2))
      throw construction_error(
          "mollify: epsilon too large relative to piece lengths (would smear adjacent features)");
  }

  real lo() const override { return base_.lo(); }
  real hi() const override { return base_.hi(); }
  real epsilon() const { return eps_; }
  const PiecewiseFn& base() const { return base_; }

  Jet jet(real t, int order) const override {
    const real h = eps_ / 4.0;
    const real wa = t - h, wb = t + h;

    // When the window is below floating-point resolution at t, every
    // representable point carries the base value (the smoothed zones around
    // breakpoints are narrower than one ulp); the breakpoint itself reports
    // the left limit per the piecewise convention.
    if (wb - wa < 8 * std::numeric_limits<real>::epsilon() * (std::abs(t) + 1e-300))
      return base_.jet(t);

    // Exactness fast path: a single affine piece covering the whole window.
    const auto& bp = base_.breakpoints();
    const size_t pa = base_.piece_index(std::nextafter(wa, wb));
    const size_t pb = base_.piece_index(std::nextafter(wb, wa));
    if (pa == pb && piece_is_affine(base_.pieces()[pa])) return base_.pieces()[pa].jet(t);

    // Split the window at interior breakpoints.
    std::vector<real> cuts{wa};
    for (size_t i = 1; i + 1 < bp.size(); ++i)
      if (bp[i] > wa && bp[i] < wb) cuts.push_back(bp[i]);
    cuts.push_back(wb);

    Jet out;
    for (int m = 0; m <= order; ++m) {
      real s = 0;
      for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        const real mid = 0.5 * (cuts[i] + cuts[i + 1]);
        const Piece& piece = base_.pieces()[base_.piece_index(mid)];
        s += integrate_refined(
            [&](real x) { return bump_value((t - x) / eps_) / eps_ * piece.jet(x)[m]; }, cuts[i],
            cuts[i + 1]);
      }
      // jump corrections
      for (size_t i = 1; i + 1 < bp.size(); ++i) {
        const real c = bp[i];
        if (c <= wa || c >= wb) continue;
        const Jet jmp = base_.jump(i);
        for (int j = 0; j < m; ++j) s += bump_deriv_scaled(eps_, t - c, m - 1 - j) * jmp[j];
      }
      switch (m) {
        case 0: out.v = s; break;
        case 1: out.d1 = s; break;
        case 2: out.d2 = s; break;
        default: out.d3 = s; break;
      }
    }
    return out;
  }

  static bool piece_is_affine(const Piece& p) {
    for (const auto& tm : p.terms)
      if (tm.kind != Term::Kind::Mono || tm.n < 0 || tm.n > 1) return false;
    return true;
  }

 private:
  PiecewiseFn base_;
  real eps_;
};

// ---------------------------------------------------------------------------
// Inner nodes
// ---------------------------------------------------------------------------

// c0 + c1*t + sum_i a_i * f_i(t)
class AffineNode final : public FnNode {
 public:
  AffineNode(real c0, real c1, std::vector<std::pair<real, SmoothFn>> members)
      : c0_(c0), c1_(c1), members_(std::move(members)) {
    lo_ = -std::numeric_limits<real>::infinity();
    hi_ = std::numeric_limits<real>::infinity();
    for (const auto& [a, f] : members_) {
      (void)a;
      lo_ = std::max(lo_, f.lo());
      hi_ = std::min(hi_, f.hi());
    }
    if (!(lo_ < hi_)) throw domain_error("affine combination: domains do not overlap");
  }

  real lo() const override { return lo_; }
  real hi() const override { return hi_; }
  const std::vector<std::pair<real, SmoothFn>>& members() const { return members_; }
  real c0() const { return c0_; }
  real c1() const { return c1_; }

  Jet jet(real t, int order) const override {
    Jet out{c0_ + c1_ * t, c1_, 0, 0};
    for (const auto& [a, f] : members_) out = out + a * f.eval_jet(t, order, true);
    return out;
  }

 private:
  real c0_, c1_;
  std::vector<std::pair<real, SmoothFn>> members_;
  real lo_, hi_;
};

// theta * f(t/theta)
class ScaleNode final : public FnNode {
 public:
  ScaleNode(SmoothFn f, real theta) : f_(std::move(f)), theta_(theta) {
    if (!(theta_ > 0)) throw parameter_error("scale_warp: theta must be positive");
  }
  real lo() const override { return theta_ * f_.lo(); }
  real hi() const override { return theta_ * f_.hi(); }
  real theta() const { return theta_; }
  const SmoothFn& inner() const { return f_; }

  Jet jet(real t, int order) const override {
    const Jet j = f_.eval_jet(t / theta_, order, true);
    return {theta_ * j.v, j.d1, j.d2 / theta_, j.d3 / (theta_ * theta_)};
  }

 private:
  SmoothFn f_;
  real theta_;
};

// f(t - s) + offset
class ShiftNode final : public FnNode {
 public:
  ShiftNode(SmoothFn f, real s, real offset) : f_(std::move(f)), s_(s), off_(offset) {}
  real lo() const override { return f_.lo() + s_; }
  real hi() const override { return f_.hi() + s_; }

  Jet jet(real t, int order) const override {
    Jet j = f_.eval_jet(t - s_, order, true);
    j.v += off_;
    return j;
  }

 private:
  SmoothFn f_;
  real s_, off_;
};

// f(h(t)); h values are clamped into f's domain within a small tolerance,
// anything further out is a domain error.
class ComposeNode final : public FnNode {
 public:
  ComposeNode(SmoothFn f, SmoothFn h) : f_(std::move(f)), h_(std::move(h)) {}
  real lo() const override { return h_.lo(); }
  real hi() const override { return h_.hi(); }
  const SmoothFn& outer() const { return f_; }
  const SmoothFn& inner() const { return h_; }

  Jet jet(real t, int order) const override {
    const Jet hj = h_.eval_jet(t, order, true);
    real x = hj.v;
    const real tol = 1e-8 * (1.0 + std::abs(f_.lo()) + std::abs(f_.hi()));
    if (x < f_.lo() - tol || x > f_.hi() + tol)
      throw domain_error("compose: inner value leaves the outer domain");
    x = std::clamp(x, f_.lo(), f_.hi());
    const Jet fj = f_.eval_jet(x, order);
    return jet_compose(fj, hj);
  }

 private:
  SmoothFn f_, h_;
};

class RestrictNode final : public FnNode {
 public:
  RestrictNode(SmoothFn f, real lo, real hi) : f_(std::move(f)), lo_(lo), hi_(hi) {
    const real tol = 1e-9 * (1.0 + std::abs(f_.lo()) + std::abs(f_.hi()));
    if (lo_ < f_.lo() - tol || hi_ > f_.hi() + tol || !(lo_ < hi_))
      throw domain_error("restrict: window not inside the function domain");
  }
  real lo() const override { return lo_; }
  real hi() const override { return hi_; }
  Jet jet(real t, int order) const override { return f_.eval_jet(t, order, true); }
  const SmoothFn& inner() const { return f_; }

 private:
  SmoothFn f_;
  real lo_, hi_;
};

// Constant continuation past the right end (the construction site checks the
// function is already flat there).
class ExtendConstNode final : public FnNode {
 public:
  ExtendConstNode(SmoothFn f, real new_hi) : f_(std::move(f)), hi_(new_hi) {
    if (!(hi_ > f_.hi())) throw parameter_error("extend_const: new endpoint must extend the domain");
    const Jet j = f_.eval_jet(f_.hi(), 2);
    if (std::abs(j.d1) > 1e-8)
      throw construction_error("extend_const: function is not flat at the right endpoint");
    tail_ = j.v;
  }
  real lo() const override { return f_.lo(); }
  real hi() const override { return hi_; }

  Jet jet(real t, int order) const override {
    if (t >= f_.hi()) return {tail_, 0, 0, 0};
    return f_.eval_jet(t, order, true);
  }

 private:
  SmoothFn f_;
  real hi_;
  real tail_;
};

// Fallback for integrate_twice on opaque integrands, via Cauchy's repeated
// integration formula u(t) = v0 + s0 (t-t0) + int_{t0}^t (t-x) w(x) dx.
// Prefix integrals of w and x*w are cached on a fixed grid.
class DoubleIntegralNode final : public FnNode {
 public:
  DoubleIntegralNode(SmoothFn w, real t0, real v0, real s0, int cells = 2048)
      : w_(std::move(w)), t0_(t0), v0_(v0), s0_(s0) {
    lo_ = w_.lo();
    hi_ = w_.hi();
    knots_ = linspace(lo_, hi_, cells + 1);
    p0_.assign(knots_.size(), 0.0);
    p1_.assign(knots_.size(), 0.0);
    const auto& rule = gl32();
    for (size_t i = 0; i + 1 < knots_.size(); ++i) {
      p0_[i + 1] = p0_[i] + rule.integrate([&](real x) { return w_.value(x); }, knots_[i],
                                           knots_[i + 1]);
      p1_[i + 1] = p1_[i] + rule.integrate([&](real x) { return x * w_.value(x); }, knots_[i],
                                           knots_[i + 1]);
    }
  }

  real lo() const override { return lo_; }
  real hi() const override { return hi_; }

  Jet jet(real t, int order) const override {
    const real I0 = prefix(p0_, t, false), I1 = prefix(p1_, t, true);
    const real J0 = prefix(p0_, t0_, false), J1 = prefix(p1_, t0_, true);
    Jet out;
    out.v = v0_ + s0_ * (t - t0_) + (t * (I0 - J0) - (I1 - J1));
    out.d1 = s0_ + (I0 - J0);
    if (order >= 2) {
      const Jet wj = w_.eval_jet(t, order >= 3 ? 1 : 0, true);
      out.d2 = wj.v;
      out.d3 = wj.d1;
    }
    return out;
  }

 private:
  real prefix(const std::vector<real>& p, real t, bool moment) const {
    const real tc = std::clamp(t, lo_, hi_);
    size_t i = size_t(std::min<real>(real(knots_.size() - 2),
                                     std::max<real>(0.0, (tc - lo_) / (knots_[1] - knots_[0]))));
    while (i > 0 && tc < knots_[i]) --i;
    while (i + 2 < knots_.size() && tc > knots_[i + 1]) ++i;
    const auto& rule = gl32();
    const real tail =
        moment ? rule.integrate([&](real x) { return x * w_.value(x); }, knots_[i], tc)
               : rule.integrate([&](real x) { return w_.value(x); }, knots_[i], tc);
    return p[i] + tail;
  }

  SmoothFn w_;
  real t0_, v0_, s0_;
  real lo_, hi_;
  std::vector<real> knots_;
  std::vector<real> p0_, p1_;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

inline SmoothFn make_piecewise(std::vector<real> breakpoints, std::vector<Piece> pieces) {
  return SmoothFn(
      std::make_shared<PiecewiseNode>(PiecewiseFn(std::move(breakpoints), std::move(pieces))));
}

inline SmoothFn from_piecewise(PiecewiseFn pw) {
  return SmoothFn(std::make_shared<PiecewiseNode>(std::move(pw)));
}

inline const PiecewiseFn* as_piecewise(const SmoothFn& f) {
  if (auto* p = dynamic_cast<const PiecewiseNode*>(f.node())) return &p->data();
  return nullptr;
}

inline const MollifiedNode* as_mollified(const SmoothFn& f) {
  return dynamic_cast<const MollifiedNode*>(f.node());
}

inline SmoothFn mollify(PiecewiseFn base, real eps) {
  return SmoothFn(std::make_shared<MollifiedNode>(std::move(base), eps));
}

inline SmoothFn mollify(const SmoothFn& f, real eps) {
  if (const auto* pw = as_piecewise(f)) return mollify(*pw, eps);
  throw construction_error("mollify: argument must be unmollified piecewise data");
}

inline SmoothFn scale_warp(const SmoothFn& f, real theta) {
  if (!(theta > 0)) throw parameter_error("scale_warp: theta must be positive");
  if (theta == 1.0) return f;
  if (const auto* pw = as_piecewise(f)) return from_piecewise(pw->warp_scaled(theta));
  if (const auto* mn = as_mollified(f))
    return SmoothFn(
        std::make_shared<MollifiedNode>(mn->base().warp_scaled(theta), theta * mn->epsilon()));
  return SmoothFn(std::make_shared<ScaleNode>(f, theta));
}

inline SmoothFn affine_combine(real c0, real c1, std::vector<std::pair<real, SmoothFn>> members) {
  return SmoothFn(std::make_shared<AffineNode>(c0, c1, std::move(members)));
}

inline SmoothFn convex_combine(const SmoothFn& f0, const SmoothFn& f1, real lambda) {
  if (lambda < 0 || lambda > 1) throw parameter_error("convex_combine: lambda in [0,1] required");
  if (lambda == 0.0) return f0;
  if (lambda == 1.0) return f1;
  return affine_combine(0, 0, {{1 - lambda, f0}, {lambda, f1}});
}

inline SmoothFn shift_fn(const SmoothFn& f, real s, real offset = 0) {
  if (s == 0 && offset == 0) return f;
  return SmoothFn(std::make_shared<ShiftNode>(f, s, offset));
}

inline SmoothFn restrict_fn(const SmoothFn& f, real lo, real hi) {
  return SmoothFn(std::make_shared<RestrictNode>(f, lo, hi));
}

inline SmoothFn extend_const(const SmoothFn& f, real new_hi) {
  return SmoothFn(std::make_shared<ExtendConstNode>(f, new_hi));
}

inline SmoothFn compose_fn(const SmoothFn& f, const SmoothFn& h) {
  return SmoothFn(std::make_shared<ComposeNode>(f, h));
}

inline SmoothFn integrate_twice(const SmoothFn& w, real t0, real value0, real slope0) {
  const real tol = 1e-9 * (1.0 + std::abs(w.lo()) + std::abs(w.hi()));
  if (t0 < w.lo() - tol || t0 > w.hi() + tol)
    throw domain_error("integrate_twice: anchor outside the integrand domain");
  if (const auto* pw = as_piecewise(w)) {
    PiecewiseFn first = pw->antiderivative(t0, slope0);
    PiecewiseFn second = first.antiderivative(t0, value0);
    return from_piecewise(std::move(second));
  }
  if (const auto* mn = as_mollified(w)) {
    // the anchor data is folded into the closed-form antiderivatives so the
    // mollified function carries the full values (no cancelling linear part)
    PiecewiseFn W2 = mn->base().antiderivative(t0, slope0).antiderivative(t0, value0);
    SmoothFn M = SmoothFn(std::make_shared<MollifiedNode>(std::move(W2), mn->epsilon()));
    const Jet at0 = M.eval_jet(t0, 1);
    const real c1 = slope0 - at0.d1;
    const real c0 = value0 - at0.v - c1 * t0;
    if (c0 == 0.0 && c1 == 0.0) return M;
    return affine_combine(c0, c1, {{1.0, M}});
  }
  return SmoothFn(std::make_shared<DoubleIntegralNode>(w, t0, value0, slope0));
}

enum class GlueMode { flat_f, unit_slope_h };

// Warping-function composition f(h(t)) on [0, S]. The precondition set is
// exactly the smoothness obstruction for gluing the reparametrized disc back
// into the ambient metric: h(0)=0, h'=1 near 0, 0<=h'<=1, h(S) at the right
// endpoint of f, and either f flat at its right endpoint or h of unit slope
// near S. The jet of f(h(t)) at S must match the jet of the translated f.
inline SmoothFn compose_warp(const SmoothFn& f, const SmoothFn& h, real S, GlueMode mode) {
  if (!(S > 0) || S > h.hi() + 1e-12 * (1 + std::abs(h.hi())))
    throw parameter_error("compose_warp: S must lie in h's domain");
  const real R = f.hi();
  const Jet h0 = h.eval_jet(std::max(h.lo(), 0.0), 1);
  if (std::abs(h0.v) > 1e-9) throw gluing_error("compose_warp: h(0) = 0 required");

  const real near0 = S * 1e-3;
  for (real t : {0.0, near0 / 2, near0})
    if (std::abs(h.eval_jet(t, 1).d1 - 1.0) > 1e-9)
      throw gluing_error("compose_warp: h' = 1 near 0 required");

  for (real t : linspace(0.0, S, 201)) {
    const real d = h.eval_jet(t, 1).d1;
    if (d < -1e-9 || d > 1 + 1e-9)
      throw gluing_error("compose_warp: 0 <= h' <= 1 violated");
  }
  if (std::abs(h.eval_jet(S, 0).v - R) > 1e-8 * (1 + std::abs(R)))
    throw gluing_error("compose_warp: h(S) must equal the right endpoint of f's domain");

  const real nearR = (R - f.lo()) * 1e-3;
  const real nearS = S * 1e-3;
  if (mode == GlueMode::flat_f) {
    for (real t : {R - nearR, R - nearR / 2, R})
      if (std::abs(f.eval_jet(t, 1).d1) > 1e-8)
        throw gluing_error("compose_warp: glue mode flat_f requires f' = 0 near the right endpoint");
  } else {
    for (real t : {S - nearS, S - nearS / 2, S})
      if (std::abs(h.eval_jet(t, 1).d1 - 1.0) > 1e-8)
        throw gluing_error("compose_warp: glue mode unit_slope_h requires h' = 1 near S");
  }

  SmoothFn composed =
      SmoothFn(std::make_shared<RestrictNode>(compose_fn(f, h), std::max(h.lo(), 0.0), S));

  // numerical smoothness check at the seam: f(h(t)) vs f(t - S + R)
  const Jet left = composed.eval_jet(S, 2);
  const Jet right = f.eval_jet(R, 2);
  const real scale = 1.0 + std::abs(right.v) + std::abs(right.d1) + std::abs(right.d2);
  if (std::abs(left.v - right.v) + std::abs(left.d1 - right.d1) + std::abs(left.d2 - right.d2) >
      1e-7 * scale)
    throw gluing_error("compose_warp: glued jet at S does not match the translated jet of f");
  return composed;
}

// ---------------------------------------------------------------------------
// Common closed forms
// ---------------------------------------------------------------------------

inline SmoothFn fn_constant(real c, real lo, real hi) {
  return make_piecewise({lo, hi}, {Piece::constant(c)});
}

inline SmoothFn fn_identity(real lo, real hi) {
  return make_piecewise({lo, hi}, {Piece::linear(0, 1)});
}

inline SmoothFn fn_sin(real lo, real hi) {
  return make_piecewise({lo, hi}, {Piece{{Term::sine(1, 1, 0)}}});
}

}  // namespace gllab
