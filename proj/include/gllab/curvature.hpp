#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>

#include "gllab/smoothfn.hpp"

namespace gllab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// CurvatureReport: sampled values of a curvature functional against a lower
// bound. pass <=> margin >= 0.
// ---------------------------------------------------------------------------

struct CurvatureReport {
  std::string name;
  std::vector<std::string> param_names;
  std::vector<std::vector<real>> sample_points;
  std::vector<real> values;
  real bound = 0;
  real min_value = 0;
  real margin = 0;
  bool pass = false;

  void add(std::vector<real> params, real value) {
    sample_points.push_back(std::move(params));
    values.push_back(value);
  }

  void finalize() {
    min_value = std::numeric_limits<real>::infinity();
    for (real v : values) min_value = std::min(min_value, v);
    if (values.empty()) min_value = bound;
    margin = min_value - bound;
    pass = margin >= 0;
  }
};

// ---------------------------------------------------------------------------
// Rotationally symmetric metrics dt^2 + f(t)^2 dxi^2 on a k-disc.
// ---------------------------------------------------------------------------

// Core formula: sigma = (k-1) * ( (k-2) (1 - f'^2) / f^2 - 2 f'' / f ).
inline real sigma_formula(const Jet& f, int k) {
  if (!(f.v > 0)) throw invalid_warping_error("sigma: warping function not positive");
  const real f2 = f.v * f.v;
  return (k - 1) * ((k - 2) * (1.0 - f.d1 * f.d1) / f2 - 2.0 * f.d2 / f.v);
}

// Normalized rotationally symmetric warping data: f(0)=0, f'(0)=1 (odd
// extension implied), f > 0 on (0, R].
struct WarpSpec {
  int k = 3;
  SmoothFn f;
  real ambient_offset = 0;  // stands for inf scal(g_N); 0 in the model case
  real r_bar = 0;
  // below t_switch the limit branch built from the third-derivative expansion
  // is used; compositions with deviation onset below the default must narrow it
  real t_switch = 0;

  real B() const { return std::max(real(0), -ambient_offset); }
};

inline WarpSpec make_warp_spec(int k, SmoothFn f, real ambient_offset = 0,
                               real t_switch_override = -1) {
  if (k < 2) throw parameter_error("warp spec: k >= 2 required");
  WarpSpec w;
  w.k = k;
  w.f = std::move(f);
  w.ambient_offset = ambient_offset;
  w.r_bar = w.f.hi();
  const Jet j0 = w.f.eval_jet(std::max(w.f.lo(), real(0)), 1);
  if (std::abs(j0.v) > 1e-10 || std::abs(j0.d1 - 1.0) > 1e-10)
    throw invalid_warping_error("warp spec: f(0)=0 and f'(0)=1 required");
  w.t_switch = t_switch_override > 0 ? t_switch_override : 1e-3 * w.r_bar;
  return w;
}

// Scalar curvature of dt^2 + f^2 dxi^2. For t <= t_switch the 0/0 limit is
// evaluated through the cubic expansion of f at 0 (value -k(k-1) f'''(0) at
// t=0); the two branches agree at t_switch to the documented tolerance.
inline real sigma_warp(const WarpSpec& w, real t) {
  const real tol = 1e-12 * (1.0 + w.r_bar);
  if (t < -tol || t > w.r_bar + tol) throw domain_error("sigma_warp: t outside [0, R]");
  t = std::clamp(t, real(0), w.r_bar);
  if (t > w.t_switch) {
    const Jet f = w.f.eval_jet(t, 2);
    return sigma_formula(f, w.k);
  }
  const Jet j0 = w.f.eval_jet(std::max(w.f.lo(), real(0)), 3);
  real b = j0.d2;
  const real c = j0.d3;
  if (std::abs(b) <= 1e-8) b = 0;  // odd extension
  const real D = 1.0 + b * t / 2 + c * t * t / 6;
  real ratio1 = -(b * b + c) - b * c * t - c * c * t * t / 4;  // (1-f'^2)/f^2 * D^2, b=0 part
  if (b != 0) {
    if (t == 0) throw invalid_warping_error("sigma_warp: f''(0) != 0 (not oddly extendable)");
    ratio1 += -2 * b / t;
  }
  ratio1 /= D * D;
  real ratio2 = c;  // f''/f * D, b=0 part
  if (b != 0) ratio2 += b / t;
  ratio2 /= D;
  return (w.k - 1) * ((w.k - 2) * ratio1 - 2 * ratio2);
}

// ---------------------------------------------------------------------------
// Trace construction dt^2 + g(t) on R x M.
// ---------------------------------------------------------------------------

struct MetricPath {
  int d = 1;
  // fills g(t), dg/dt, d^2g/dt^2
  std::function<void(real t, Mat& g, Mat& g1, Mat& g2)> sample;
  real spatial_scal = 0;  // scalar curvature of each fiber metric (constant)
};

namespace trace_detail {
struct Contractions {
  real tr_m = 0;     // tr(g^{-1} g')
  real tr_m2 = 0;    // tr((g^{-1} g')^2)
  real tr_g2 = 0;    // tr(g^{-1} g'')
};
inline Contractions contract(const Mat& g, const Mat& g1, const Mat& g2) {
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + g.cwiseAbs().maxCoeff()))
    throw parameter_error("scal_trace_path: metric must be symmetric");
  Eigen::FullPivLU<Mat> lu(g);
  if (!lu.isInvertible()) throw solver_error("scal_trace_path: singular metric");
  const Mat m = lu.solve(g1);
  Contractions c;
  c.tr_m = m.trace();
  c.tr_m2 = (m * m).trace();
  c.tr_g2 = lu.solve(g2).trace();
  return c;
}
}  // namespace trace_detail

// scal(dt^2 + g(t)) = scal(g(t)) + 3/4 tr((g^{-1}g')^2) - tr(g^{-1}g'')
//                     - 1/4 (tr(g^{-1}g'))^2
inline real scal_trace_path(const MetricPath& p, real t) {
  Mat g(p.d, p.d), g1(p.d, p.d), g2(p.d, p.d);
  p.sample(t, g, g1, g2);
  const auto c = trace_detail::contract(g, g1, g2);
  return p.spatial_scal + 0.75 * c.tr_m2 - c.tr_g2 - 0.25 * c.tr_m * c.tr_m;
}

struct GajerBound {
  real lambda = 0;  // admissible C0 bound on f' and f''
  real coefficient = 0;
};

// Returns Lambda > 0 such that any smooth f: R -> [0,1] with |f'|,|f''| <=
// Lambda keeps scal(g(f(t)) + dt^2) >= B - eta. Derived from the sampled
// supremum C of the trace-formula coefficients: Lambda = eta / (2 C), capped.
inline GajerBound gajer_bound(const std::vector<MetricPath>& family, real eta, real cap = 1.0,
                              int grid_n = 101) {
  if (family.empty()) throw parameter_error("gajer_bound: empty family");
  if (!(eta > 0)) throw parameter_error("gajer_bound: eta must be positive");
  real C = 0;
  for (const auto& p : family) {
    Mat g(p.d, p.d), g1(p.d, p.d), g2(p.d, p.d);
    for (real t : linspace(0.0, 1.0, grid_n)) {
      p.sample(t, g, g1, g2);
      const auto c = trace_detail::contract(g, g1, g2);
      const real c_second = std::abs(0.75 * c.tr_m2 - c.tr_g2 - 0.25 * c.tr_m * c.tr_m);
      const real c_first = std::abs(c.tr_m);
      C = std::max({C, c_second, c_first});
    }
  }
  GajerBound out;
  out.coefficient = C;
  out.lambda = (C == 0) ? cap : std::min(cap, eta / (2 * C));
  return out;
}

// ---------------------------------------------------------------------------
// Hypersurfaces of revolution in the model N x R^k x R.
// ---------------------------------------------------------------------------

// Jet of a plane curve point in the half plane {(y, r): r >= 0}: theta is the
// angle from the negative r-axis (tangent = (sin theta, -cos theta)), kappa
// the signed curvature.
struct CurveJet {
  real y = 0;
  real r = 0;
  real theta = 0;
  real kappa = 0;
};

struct PrincipalCurvatures {
  std::vector<real> lambdas;
};

// Model-case principal curvatures: kappa once, -sin(theta)/r with
// multiplicity k-1, zero for the N-directions.
inline PrincipalCurvatures principal_curvatures_model(const CurveJet& cj, int k, int d_total) {
  if (!(cj.r > 0)) throw axis_error("principal_curvatures_model: r <= 0");
  if (d_total < k) throw parameter_error("principal_curvatures_model: d_total >= k required");
  PrincipalCurvatures pc;
  pc.lambdas.assign(size_t(d_total), 0.0);
  pc.lambdas[0] = cj.kappa;
  for (int j = 1; j < k; ++j) pc.lambdas[size_t(j)] = -std::sin(cj.theta) / cj.r;
  return pc;
}

inline real sum_pairwise_products_doubled(const PrincipalCurvatures& pc) {
  real s = 0, s2 = 0;
  for (real l : pc.lambdas) {
    s += l;
    s2 += l * l;
  }
  return s * s - s2;  // = 2 sum_{i<j} l_i l_j
}

// scal of the induced metric on the revolution hypersurface:
//   A + 2 sum_{i<j} lambda_i lambda_j
// In the flat model this equals sigma of the radius profile exactly. Near the
// axis the ratio sin(theta)/r is replaced by its circular limit -kappa.
inline real scal_revolution_jet(const CurveJet& cj, int k, real ambient_offset,
                                real axis_tiny = 0.0) {
  if (cj.r <= axis_tiny) {
    if (cj.r < 0) throw axis_error("scal_revolution: r < 0");
    const real ratio = -cj.kappa;
    return ambient_offset - 2 * (k - 1) * cj.kappa * ratio + (k - 1) * (k - 2) * ratio * ratio;
  }
  const real ratio = std::sin(cj.theta) / cj.r;
  return ambient_offset - 2 * (k - 1) * cj.kappa * ratio + (k - 1) * (k - 2) * ratio * ratio;
}

// Certified lower bound for scal on the revolution hypersurface over a
// general fiber with Taylor-remainder constant C >= 0:
//   base + |kappa| (-sign(kappa) 2(k-1) sin(theta)/r - C sin(theta))
//        + (k-1)(k-2) sin^2(theta)/r^2 - C sin^2(theta)/r
inline real lower_bound_estimate(const CurveJet& cj, int k, real C, real base_scal) {
  if (!(cj.r > 0)) throw axis_error("lower_bound_estimate: r <= 0");
  if (C < 0) throw parameter_error("lower_bound_estimate: C >= 0 required");
  const real st = std::sin(cj.theta);
  const real sgn = cj.kappa > 0 ? 1.0 : (cj.kappa < 0 ? -1.0 : 0.0);
  return base_scal +
         std::abs(cj.kappa) * (-sgn * 2.0 * (k - 1) * st / cj.r - C * st) +
         (k - 1) * (k - 2) * st * st / (cj.r * cj.r) - C * st * st / cj.r;
}

}  // namespace gllab
