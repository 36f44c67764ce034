#pragma once

#include <array>
#include <functional>
#include <vector>

#include "gllab/common.hpp"

namespace gllab {

// Adaptive Dormand-Prince 5(4) integrator with dense output and event
// detection. Events are located on the dense interpolant by bisection.

using OdeRhs = std::function<void(real t, const std::vector<real>& y, std::vector<real>& dydt)>;

struct OdeEvent {
  std::function<real(real t, const std::vector<real>& y)> value;
  int direction = 0;  // +1 upcrossing, -1 downcrossing, 0 any
  bool stop = true;
};

struct OdeOptions {
  real rtol = 1e-10;
  real atol = 1e-10;
  real initial_step = 0;
  real max_step = 0;  // 0 = span
  long max_steps = 2000000;
  real event_tol = 1e-12;
};

struct OdeResult {
  std::vector<real> ts;                       // accepted step boundaries
  std::vector<std::vector<real>> states;      // states at ts
  std::vector<std::array<std::vector<real>, 5>> dense;  // per-step interpolant
  real t_end = 0;
  int event_index = -1;  // which event terminated, -1 if none
  real event_time = 0;

  size_t dim() const { return states.empty() ? 0 : states.front().size(); }

  void eval(real t, std::vector<real>& out) const {
    const size_t n = ts.size();
    if (n < 2) {
      out = states.front();
      return;
    }
    real tc = std::clamp(t, ts.front(), ts.back());
    size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (tc < ts[mid])
        hi = mid;
      else
        lo = mid;
    }
    const real h = ts[lo + 1] - ts[lo];
    const real theta = h == 0 ? 0.0 : (tc - ts[lo]) / h;
    const real theta1 = 1.0 - theta;
    const auto& rc = dense[lo];
    out.resize(dim());
    for (size_t i = 0; i < out.size(); ++i)
      out[i] = rc[0][i] +
               theta * (rc[1][i] + theta1 * (rc[2][i] + theta * (rc[3][i] + theta1 * rc[4][i])));
  }

  std::vector<real> eval(real t) const {
    std::vector<real> out;
    eval(t, out);
    return out;
  }
};

namespace ode_detail {
constexpr real c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr real a21 = 1.0 / 5;
constexpr real a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr real a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr real a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
               a54 = -212.0 / 729;
constexpr real a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
               a65 = -5103.0 / 18656;
constexpr real a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
               a76 = 11.0 / 84;
constexpr real e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
               e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr real d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
               d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
               d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace ode_detail

inline OdeResult integrate_ode(const OdeRhs& rhs, std::vector<real> y0, real t0, real t1,
                               const OdeOptions& opts = {},
                               const std::vector<OdeEvent>& events = {}) {
  using namespace ode_detail;
  const size_t n = y0.size();
  const real span = t1 - t0;
  if (!(span > 0)) throw parameter_error("integrate_ode: t1 > t0 required");

  OdeResult res;
  res.ts.push_back(t0);
  res.states.push_back(y0);

  std::vector<real> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);
  rhs(t0, y0, k1);

  real h = opts.initial_step > 0 ? opts.initial_step : span / 100;
  const real hmax = opts.max_step > 0 ? opts.max_step : span;
  h = std::min(h, hmax);
  real t = t0;
  std::vector<real> y = std::move(y0);
  std::vector<real> ev_prev(events.size());
  for (size_t e = 0; e < events.size(); ++e) ev_prev[e] = events[e].value(t, y);

  long steps = 0;
  while (t < t1) {
    if (++steps > opts.max_steps) throw solver_error("integrate_ode: step limit exceeded");
    if (h < 1e-14 * (1.0 + std::abs(t))) throw solver_error("integrate_ode: step underflow");
    h = std::min(h, t1 - t);

    for (size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(t + h, ynew, k7);

    real err = 0;
    for (size_t i = 0; i < n; ++i) {
      const real ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const real sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / real(n));

    if (err > 1.0) {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
      continue;
    }

    // accept; build the dense interpolant for this step
    std::array<std::vector<real>, 5> rc;
    for (auto& v : rc) v.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const real ydiff = ynew[i] - y[i];
      const real bspl = h * k1[i] - ydiff;
      rc[0][i] = y[i];
      rc[1][i] = ydiff;
      rc[2][i] = bspl;
      rc[3][i] = ydiff - h * k7[i] - bspl;
      rc[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    res.dense.push_back(std::move(rc));
    const real t_new = t + h;
    res.ts.push_back(t_new);
    res.states.push_back(ynew);

    // event check on the accepted step
    for (size_t e = 0; e < events.size(); ++e) {
      const real g_new = events[e].value(t_new, ynew);
      const real g_old = ev_prev[e];
      const bool crossed = (g_old < 0 && g_new >= 0 && events[e].direction >= 0) ||
                           (g_old > 0 && g_new <= 0 && events[e].direction <= 0);
      if (crossed) {
        real lo_t = t, hi_t = t_new;
        std::vector<real> ymid(n);
        while (hi_t - lo_t > opts.event_tol * (1.0 + std::abs(hi_t))) {
          const real mid = 0.5 * (lo_t + hi_t);
          res.eval(mid, ymid);
          const real g_mid = events[e].value(mid, ymid);
          const bool left = (g_old < 0) ? (g_mid < 0) : (g_mid > 0);
          (left ? lo_t : hi_t) = mid;
        }
        res.event_index = int(e);
        res.event_time = hi_t;
        if (events[e].stop) {
          res.t_end = hi_t;
          return res;
        }
      }
      ev_prev[e] = g_new;
    }

    y = ynew;
    k1 = k7;  // FSAL
    t = t_new;
    h = std::min(hmax, h * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0));
  }
  res.t_end = t1;
  return res;
}

}  // namespace gllab
