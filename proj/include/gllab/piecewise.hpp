#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gllab/jet.hpp"

namespace gllab {

// ---------------------------------------------------------------------------
// Closed-form term algebra. A piece is a sum of terms; the set of kinds is
// closed under differentiation, antidifferentiation (the cases we need) and
// the warp scaling f(t) -> theta * f(t/theta).
//   Mono:    c * t^n            (integer n, possibly negative)
//   MonoLog: c * t^n * ln(t)
//   Sine:    c * sin(w t + phi)
//   Expo:    c * exp(w t)
// ---------------------------------------------------------------------------

struct Term {
  enum class Kind { Mono, MonoLog, Sine, Expo };
  Kind kind = Kind::Mono;
  real c = 0;
  int n = 0;
  real w = 0, phi = 0;

  static Term mono(real c, int n) { return {Kind::Mono, c, n, 0, 0}; }
  static Term monolog(real c, int n) { return {Kind::MonoLog, c, n, 0, 0}; }
  static Term sine(real c, real w, real phi) { return {Kind::Sine, c, 0, w, phi}; }
  static Term expo(real c, real w) { return {Kind::Expo, c, 0, w, 0}; }
};

namespace term_detail {

inline real ipow(real t, int n) {
  if (n == 0) return 1.0;
  if (n < 0) return 1.0 / ipow(t, -n);
  real r = 1.0, b = t;
  int e = n;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

inline void accumulate(const Term& tm, real t, Jet& out) {
  switch (tm.kind) {
    case Term::Kind::Mono: {
      if (tm.n < 0 && t == 0.0)
        throw smoothness_error("piecewise term c*t^n with n<0 evaluated at t=0");
      const real n = real(tm.n);
      const real c1 = tm.c * n, c2 = c1 * (n - 1), c3 = c2 * (n - 2);
      out.v += tm.c * ipow(t, tm.n);
      if (c1 != 0) out.d1 += c1 * ipow(t, tm.n - 1);
      if (c2 != 0) out.d2 += c2 * ipow(t, tm.n - 2);
      if (c3 != 0) out.d3 += c3 * ipow(t, tm.n - 3);
      return;
    }
    case Term::Kind::MonoLog: {
      if (t <= 0.0) throw smoothness_error("piecewise term c*t^n*ln(t) evaluated at t<=0");
      const real L = std::log(t);
      const real n = real(tm.n);
      out.v += tm.c * ipow(t, tm.n) * L;
      out.d1 += tm.c * ipow(t, tm.n - 1) * (n * L + 1);
      out.d2 += tm.c * ipow(t, tm.n - 2) * (n * (n - 1) * L + 2 * n - 1);
      out.d3 += tm.c * ipow(t, tm.n - 3) * (n * (n - 1) * (n - 2) * L + 3 * n * n - 6 * n + 2);
      return;
    }
    case Term::Kind::Sine: {
      const real s = std::sin(tm.w * t + tm.phi), cs = std::cos(tm.w * t + tm.phi);
      out.v += tm.c * s;
      out.d1 += tm.c * tm.w * cs;
      out.d2 += -tm.c * tm.w * tm.w * s;
      out.d3 += -tm.c * tm.w * tm.w * tm.w * cs;
      return;
    }
    case Term::Kind::Expo: {
      const real e = std::exp(tm.w * t);
      out.v += tm.c * e;
      out.d1 += tm.c * tm.w * e;
      out.d2 += tm.c * tm.w * tm.w * e;
      out.d3 += tm.c * tm.w * tm.w * tm.w * e;
      return;
    }
  }
}

inline std::vector<Term> antiderivative(const Term& tm) {
  switch (tm.kind) {
    case Term::Kind::Mono:
      if (tm.n == -1) return {Term::monolog(tm.c, 0)};
      return {Term::mono(tm.c / real(tm.n + 1), tm.n + 1)};
    case Term::Kind::MonoLog: {
      if (tm.n == -1)
        throw construction_error("antiderivative of c*ln(t)/t is outside the term algebra");
      const real a = tm.c / real(tm.n + 1);
      return {Term::monolog(a, tm.n + 1), Term::mono(-a / real(tm.n + 1), tm.n + 1)};
    }
    case Term::Kind::Sine:
      return {Term::sine(-tm.c / tm.w, tm.w, tm.phi + M_PI / 2)};
    case Term::Kind::Expo:
      return {Term::expo(tm.c / tm.w, tm.w)};
  }
  return {};
}

// theta * term(t/theta)
inline std::vector<Term> warp_scale(const Term& tm, real theta) {
  switch (tm.kind) {
    case Term::Kind::Mono:
      return {Term::mono(tm.c * std::pow(theta, 1 - tm.n), tm.n)};
    case Term::Kind::MonoLog: {
      const real a = tm.c * std::pow(theta, 1 - tm.n);
      return {Term::monolog(a, tm.n), Term::mono(-a * std::log(theta), tm.n)};
    }
    case Term::Kind::Sine:
      return {Term::sine(theta * tm.c, tm.w / theta, tm.phi)};
    case Term::Kind::Expo:
      return {Term::expo(theta * tm.c, tm.w / theta)};
  }
  return {};
}

}  // namespace term_detail

struct Piece {
  std::vector<Term> terms;

  Jet jet(real t) const {
    Jet out;
    for (const auto& tm : terms) term_detail::accumulate(tm, t, out);
    return out;
  }

  static Piece zero() { return {}; }
  static Piece constant(real c) { return {{Term::mono(c, 0)}}; }
  static Piece linear(real intercept, real slope) {
    return {{Term::mono(intercept, 0), Term::mono(slope, 1)}};
  }

  Piece antiderivative() const {
    Piece out;
    for (const auto& tm : terms)
      for (const auto& a : term_detail::antiderivative(tm)) out.terms.push_back(a);
    return out;
  }

  Piece warp_scaled(real theta) const {
    Piece out;
    for (const auto& tm : terms)
      for (const auto& a : term_detail::warp_scale(tm, theta)) out.terms.push_back(a);
    return out;
  }

  Piece scaled(real a) const {
    Piece out = *this;
    for (auto& tm : out.terms) tm.c *= a;
    return out;
  }

  Piece plus(const Piece& other) const {
    Piece out = *this;
    out.terms.insert(out.terms.end(), other.terms.begin(), other.terms.end());
    return out;
  }
};

// ---------------------------------------------------------------------------
// PiecewiseFn: closed-form segments between strictly increasing breakpoints.
// Pieces are left-closed/right-open. Jets at an interior breakpoint report
// the one-sided left limit. Continuity is not enforced: second-derivative
// data is allowed to jump. End pieces extend beyond the declared domain; the
// declared domain is [breakpoints.front(), breakpoints.back()].
// ---------------------------------------------------------------------------

class PiecewiseFn {
 public:
  PiecewiseFn() = default;

  PiecewiseFn(std::vector<real> breakpoints, std::vector<Piece> pieces)
      : bp_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    if (bp_.size() < 2) throw construction_error("make_piecewise: need at least two breakpoints");
    if (pieces_.size() + 1 != bp_.size())
      throw construction_error("make_piecewise: need exactly one piece per interval");
    for (size_t i = 0; i + 1 < bp_.size(); ++i)
      if (!(bp_[i] < bp_[i + 1]))
        throw construction_error("make_piecewise: breakpoints must be strictly increasing");
  }

  real lo() const { return bp_.front(); }
  real hi() const { return bp_.back(); }
  const std::vector<real>& breakpoints() const { return bp_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  size_t piece_index(real t) const {
    // left-closed/right-open, with the left-limit convention at interior
    // breakpoints; first/last pieces own everything beyond the domain.
    if (t <= bp_.front()) return 0;
    if (t >= bp_.back()) return pieces_.size() - 1;
    size_t lo = 0, hi = bp_.size() - 1;
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (t < bp_[mid])
        hi = mid;
      else
        lo = mid;
    }
    // t in [bp_[lo], bp_[lo+1]); exact hit on an interior breakpoint reports
    // the left piece
    if (t == bp_[lo] && lo > 0) return lo - 1;
    return lo;
  }

  Jet jet(real t) const { return pieces_[piece_index(t)].jet(t); }

  // Jump of the m-th derivative across interior breakpoint i (1..n-1).
  Jet jump(size_t i) const {
    const real b = bp_[i];
    return pieces_[i].jet(b) - pieces_[i - 1].jet(b);
  }

  real shortest_piece() const {
    real m = bp_[1] - bp_[0];
    for (size_t i = 1; i + 1 < bp_.size(); ++i) m = std::min(m, bp_[i + 1] - bp_[i]);
    return m;
  }

  // Closed-form antiderivative G with G(anchor) = g0; continuous across
  // breakpoints (the integral of jump data is continuous).
  PiecewiseFn antiderivative(real anchor, real g0) const {
    std::vector<Piece> anti(pieces_.size());
    for (size_t i = 0; i < pieces_.size(); ++i) anti[i] = pieces_[i].antiderivative();
    std::vector<real> c(pieces_.size(), 0.0);
    const size_t k = piece_index(anchor);
    c[k] = g0 - anti[k].jet(anchor).v;
    for (size_t i = k + 1; i < pieces_.size(); ++i) {
      const real b = bp_[i];
      c[i] = (anti[i - 1].jet(b).v + c[i - 1]) - anti[i].jet(b).v;
    }
    for (size_t i = k; i-- > 0;) {
      const real b = bp_[i + 1];
      c[i] = (anti[i + 1].jet(b).v + c[i + 1]) - anti[i].jet(b).v;
    }
    for (size_t i = 0; i < anti.size(); ++i)
      if (c[i] != 0.0) anti[i].terms.push_back(Term::mono(c[i], 0));
    return PiecewiseFn(bp_, std::move(anti));
  }

  PiecewiseFn warp_scaled(real theta) const {
    std::vector<real> bp(bp_.size());
    for (size_t i = 0; i < bp_.size(); ++i) bp[i] = theta * bp_[i];
    std::vector<Piece> ps(pieces_.size());
    for (size_t i = 0; i < pieces_.size(); ++i) ps[i] = pieces_[i].warp_scaled(theta);
    return PiecewiseFn(std::move(bp), std::move(ps));
  }

  // Linear combination on the merged breakpoint set.
  static PiecewiseFn combine(const PiecewiseFn& f, real a, const PiecewiseFn& g, real b) {
    std::vector<real> bp;
    bp.reserve(f.bp_.size() + g.bp_.size());
    size_t i = 0, j = 0;
    while (i < f.bp_.size() || j < g.bp_.size()) {
      real next;
      if (i == f.bp_.size())
        next = g.bp_[j++];
      else if (j == g.bp_.size())
        next = f.bp_[i++];
      else {
        next = std::min(f.bp_[i], g.bp_[j]);
        if (f.bp_[i] == next) ++i;
        if (j < g.bp_.size() && g.bp_[j] == next) ++j;
      }
      if (bp.empty() || next > bp.back()) bp.push_back(next);
    }
    std::vector<Piece> ps;
    for (size_t k = 0; k + 1 < bp.size(); ++k) {
      const real mid = 0.5 * (bp[k] + bp[k + 1]);
      ps.push_back(f.pieces_[f.piece_index(mid)].scaled(a).plus(
          g.pieces_[g.piece_index(mid)].scaled(b)));
    }
    return PiecewiseFn(std::move(bp), std::move(ps));
  }

 private:
  std::vector<real> bp_;
  std::vector<Piece> pieces_;
};

}  // namespace gllab
