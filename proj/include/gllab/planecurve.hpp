#pragma once

#include <optional>

#include "gllab/curvature.hpp"
#include "gllab/ode.hpp"

namespace gllab {

// Arclength-parametrized curve in the half plane {(y, r): r >= 0}, stored as
// consecutive spans. Each span evaluates in its own local arclength, so
// constructions whose features are many orders of magnitude shorter than the
// total length (the bent tube regions) keep full precision: the global
// parameter only selects the span.
class PlaneCurve {
 public:
  struct Span {
    real s0 = 0;   // global arclength at the span start
    real len = 0;  // span length
    std::function<CurveJet(real tau)> jet;  // tau in [0, len]
  };

  PlaneCurve() = default;

  void append(Span sp) {
    if (!spans_.empty()) sp.s0 = spans_.back().s0 + spans_.back().len;
    spans_.push_back(std::move(sp));
  }

  bool empty() const { return spans_.empty(); }
  size_t span_count() const { return spans_.size(); }
  const Span& span(size_t i) const { return spans_[i]; }

  real s_min() const { return spans_.front().s0; }
  real s_max() const { return spans_.back().s0 + spans_.back().len; }

  CurveJet jet(real s) const {
    size_t lo = 0, hi = spans_.size();
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (s < spans_[mid].s0)
        hi = mid;
      else
        lo = mid;
    }
    const Span& sp = spans_[lo];
    return sp.jet(std::clamp(s - sp.s0, real(0), sp.len));
  }

  CurveJet jet_local(size_t i, real tau) const {
    const Span& sp = spans_[i];
    return sp.jet(std::clamp(tau, real(0), sp.len));
  }

  std::optional<real> axis_hit;

 private:
  std::vector<Span> spans_;
};

// Straight span from a starting jet (kappa = 0).
inline PlaneCurve::Span straight_span(const CurveJet& start, real len) {
  const real st = std::sin(start.theta), ct = std::cos(start.theta);
  return {0, len, [=](real tau) {
            return CurveJet{start.y + st * tau, start.r - ct * tau, start.theta, 0.0};
          }};
}

// Constant-curvature arc from a starting jet.
inline PlaneCurve::Span arc_span(const CurveJet& start, real kappa, real len) {
  return {0, len, [=](real tau) {
            const real th = start.theta + kappa * tau;
            return CurveJet{start.y + (std::cos(start.theta) - std::cos(th)) / kappa,
                            start.r - (std::sin(th) - std::sin(start.theta)) / kappa, th, kappa};
          }};
}

// ODE-backed span: state (theta, y, r) integrated against a curvature
// function given in span-local arclength.
struct OdeSpanResult {
  PlaneCurve::Span span;
  CurveJet end;
  OdeResult sol;
};

inline OdeSpanResult ode_span(const std::function<real(real)>& kappa_local, const CurveJet& start,
                              real len, const std::vector<OdeEvent>& events = {},
                              real rtol = 1e-10, real atol = 1e-14) {
  OdeRhs rhs = [&kappa_local](real tau, const std::vector<real>& y, std::vector<real>& dy) {
    dy[0] = kappa_local(tau);
    dy[1] = std::sin(y[0]);
    dy[2] = -std::cos(y[0]);
  };
  OdeOptions opts;
  opts.rtol = rtol;
  opts.atol = atol;
  OdeResult sol = integrate_ode(rhs, {start.theta, start.y, start.r}, 0.0, len, opts, events);
  auto shared = std::make_shared<OdeResult>(std::move(sol));
  auto kap = kappa_local;
  OdeSpanResult out;
  out.sol = *shared;
  const real end_t = shared->t_end;
  out.span = {0, end_t, [shared, kap](real tau) {
                std::vector<real> st;
                shared->eval(tau, st);
                return CurveJet{st[1], st[2], st[0], kap(tau)};
              }};
  std::vector<real> st;
  shared->eval(end_t, st);
  out.end = CurveJet{st[1], st[2], st[0], kap(end_t)};
  return out;
}

// Curve synthesis from a curvature function: the unit-speed solution of
// gamma'' = kappa J gamma'. If r reaches 0 before s_max the integration
// terminates there and the crossing is reported on the curve.
inline PlaneCurve curve_from_curvature(const SmoothFn& kappa, const CurveJet& start, real s_max) {
  auto kap = [kappa](real s) { return kappa.eval_jet(s, 0, true).v; };
  std::vector<OdeEvent> ev{
      OdeEvent{[](real, const std::vector<real>& y) { return y[2]; }, -1, true}};
  OdeSpanResult res = ode_span(kap, start, s_max, ev);
  PlaneCurve curve;
  curve.append(res.span);
  if (res.sol.event_index == 0) curve.axis_hit = res.sol.event_time;
  return curve;
}

}  // namespace gllab
