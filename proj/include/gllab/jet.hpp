#pragma once

#include <cmath>

#include "gllab/common.hpp"

namespace gllab {

// Value and derivatives to order 3 at a point. Entries above the requested
// evaluation order are left at zero by producers.
struct Jet {
  real v = 0, d1 = 0, d2 = 0, d3 = 0;

  real operator[](int i) const {
    switch (i) {
      case 0: return v;
      case 1: return d1;
      case 2: return d2;
      default: return d3;
    }
  }

  bool finite() const {
    return std::isfinite(v) && std::isfinite(d1) && std::isfinite(d2) && std::isfinite(d3);
  }
};

inline Jet operator+(const Jet& a, const Jet& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3};
}
inline Jet operator-(const Jet& a, const Jet& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3};
}
inline Jet operator*(real c, const Jet& a) { return {c * a.v, c * a.d1, c * a.d2, c * a.d3}; }
inline Jet operator*(const Jet& a, real c) { return c * a; }

inline Jet jet_mul(const Jet& f, const Jet& g) {
  return {f.v * g.v,
          f.d1 * g.v + f.v * g.d1,
          f.d2 * g.v + 2 * f.d1 * g.d1 + f.v * g.d2,
          f.d3 * g.v + 3 * f.d2 * g.d1 + 3 * f.d1 * g.d2 + f.v * g.d3};
}

inline Jet jet_inv(const Jet& g) {
  const real w = g.v;
  const real w2 = w * w, w3 = w2 * w, w4 = w2 * w2;
  return {1 / w, -g.d1 / w2, (2 * g.d1 * g.d1 - w * g.d2) / w3,
          (-6 * g.d1 * g.d1 * g.d1 + 6 * w * g.d1 * g.d2 - w2 * g.d3) / w4};
}

inline Jet jet_div(const Jet& f, const Jet& g) { return jet_mul(f, jet_inv(g)); }

// f(h(t)) where `f` is the jet of f at h(t) and `h` the jet of h at t.
inline Jet jet_compose(const Jet& f, const Jet& h) {
  return {f.v,
          f.d1 * h.d1,
          f.d2 * h.d1 * h.d1 + f.d1 * h.d2,
          f.d3 * h.d1 * h.d1 * h.d1 + 3 * f.d2 * h.d1 * h.d2 + f.d1 * h.d3};
}

inline Jet jet_exp(const Jet& g) {
  const real e = std::exp(g.v);
  // chain rule applied to exp at the inner jet
  const Jet f{e, e, e, e};
  return jet_compose(f, g);
}

inline Jet jet_var(real t) { return {t, 1, 0, 0}; }
inline Jet jet_const(real c) { return {c, 0, 0, 0}; }

}  // namespace gllab
