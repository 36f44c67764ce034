#pragma once

#include "gllab/curvature.hpp"

namespace gllab {

// ---------------------------------------------------------------------------
// Smooth partition of unity subordinate to U_ni = ((i-1)/n, (i+1)/n):
// plateaued hats built from one mollified ramp, so the weights sum to 1
// exactly and the endpoint weights are exactly 1 near t = 0 and t = 1.
// ---------------------------------------------------------------------------

class PartitionOfUnity {
 public:
  explicit PartitionOfUnity(int n) : n_(n) {
    if (n < 1) throw parameter_error("partition of unity: n >= 1 required");
    const real w = 1.0 / (4 * n);
    PiecewiseFn base({-16 * w, -w, w, 16 * w},
                     {Piece::zero(), Piece::linear(0.5, 0.5 / w), Piece::constant(1.0)});
    ramp_ = mollify(std::move(base), w / 2);  // radius 1/(8n), transitions inside [-9w/8, 9w/8]
    w_ = w;
  }

  int n() const { return n_; }

  // lambda_{n i}(t) with t-derivatives
  Jet weight_jet(int i, real t) const {
    const real lo = (2.0 * i - 1) / (2 * n_), hi = (2.0 * i + 1) / (2 * n_);
    return ramp_at(t - lo) - ramp_at(t - hi);
  }
  real weight(int i, real t) const { return weight_jet(i, t).v; }

 private:
  Jet ramp_at(real x) const {
    if (x <= -9 * w_ / 8) return {0, 0, 0, 0};
    if (x >= 9 * w_ / 8) return {1, 0, 0, 0};
    return ramp_.eval_jet(x, 2, true);
  }
  int n_ = 1;
  real w_ = 0;
  SmoothFn ramp_;
};

// ---------------------------------------------------------------------------
// Path-of-metrics approximation C_n(s, t) = sum_i G(s i/n) lambda_{ni}(t):
// smooth in t, C_n(s, 0) = G(0) and C_n(s, 1) = G(s) exactly.
// ---------------------------------------------------------------------------

using MatPath = std::function<Mat(real)>;

class ConcatApprox {
 public:
  ConcatApprox(MatPath G, int d, int n, real spatial_scal = 0)
      : G_(std::move(G)), d_(d), n_(n), pou_(n), spatial_(spatial_scal) {
    if (n < 1) throw parameter_error("path_concat_approx: n >= 1 required");
    samples_.resize(size_t(n) + 1);
  }

  int n() const { return n_; }
  int dim() const { return d_; }
  real spatial_scal() const { return spatial_; }

  // t-jets of C_n(s, .) at t
  void eval(real s, real t, Mat& c, Mat& c1, Mat& c2) const {
    c = Mat::Zero(d_, d_);
    c1 = Mat::Zero(d_, d_);
    c2 = Mat::Zero(d_, d_);
    for (int i = 0; i <= n_; ++i) {
      const Jet w = pou_.weight_jet(i, t);
      if (w.v == 0 && w.d1 == 0 && w.d2 == 0) continue;
      const Mat gi = G_(s * real(i) / real(n_));
      c += w.v * gi;
      c1 += w.d1 * gi;
      c2 += w.d2 * gi;
    }
  }

  Mat value(real s, real t) const {
    Mat c, c1, c2;
    eval(s, t, c, c1, c2);
    return c;
  }

  // the t-path at fixed s as a MetricPath for the trace formula
  MetricPath path_at(real s) const {
    MetricPath p;
    p.d = d_;
    p.spatial_scal = spatial_;
    auto self = *this;
    p.sample = [self, s](real t, Mat& g, Mat& g1, Mat& g2) { self.eval(s, t, g, g1, g2); };
    return p;
  }

 private:
  MatPath G_;
  int d_, n_;
  PartitionOfUnity pou_;
  real spatial_;
  std::vector<Mat> samples_;
};

inline ConcatApprox path_concat_approx(MatPath G, int d, int n, real spatial_scal = 0) {
  return ConcatApprox(std::move(G), d, n, spatial_scal);
}

// sup distance of C_n(s, t) to G(s t) over a (s, t) grid, entrywise
inline real concat_sup_distance(const ConcatApprox& c, const MatPath& G, int grid = 33) {
  real worst = 0;
  for (real s : linspace(0.0, 1.0, grid))
    for (real t : linspace(0.0, 1.0, grid)) {
      const Mat diff = c.value(s, t) - G(s * t);
      worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Collar transition: for each s the cylinder metric dt^2 + C(s, f(t/a(s)))
// with a(s) from the reparametrization bound, psc up to the loss eta and
// exactly cylindrical near both ends.
// ---------------------------------------------------------------------------

struct CollarTransition {
  int n = 0;
  SmoothFn profile;             // f: 0 near (-inf, 0], 1 near [1, inf)
  real profile_d1 = 0;          // measured sup |f'|
  real profile_d2 = 0;          // measured sup |f''|
  std::vector<real> s_grid;
  std::vector<real> lambda_s;   // admissible bound per s
  std::vector<real> a_s;        // collar length per s
  real b = 0;                   // sup_s a(s)
  CurvatureReport report;
  std::shared_ptr<ConcatApprox> approx;

  real a_of(real s) const {
    // conservative: the largest collar length among grid points at or below s
    real a = a_s.front();
    for (size_t i = 0; i < s_grid.size(); ++i)
      if (s_grid[i] <= s + 1e-12) a = std::max(a, a_s[i]);
    return a;
  }

  MetricPath cylinder_at(real s) const {
    const real a = a_of(s);
    MetricPath p;
    p.d = approx->dim();
    p.spatial_scal = approx->spatial_scal();
    auto ap = approx;
    SmoothFn f = profile;
    p.sample = [ap, f, s, a](real t, Mat& g, Mat& g1, Mat& g2) {
      const Jet fj = f.eval_jet(std::clamp(t / a, f.lo(), f.hi()), 2, true);
      Mat c, c1, c2;
      ap->eval(s, fj.v, c, c1, c2);
      g = c;
      g1 = c1 * (fj.d1 / a);
      g2 = c2 * (fj.d1 / a) * (fj.d1 / a) + c1 * (fj.d2 / (a * a));
    };
    return p;
  }
};

// Fixed transition profile: double integral of a balanced bang-bang second
// derivative, mollified; rises 0 -> 1 inside (0, 1) with flat ends.
inline SmoothFn collar_transition_profile() {
  const real L = 7.0 / 16;
  const real A = 1.0 / (L * L);
  PiecewiseFn w({-1.0, 1.0 / 16, 0.5, 15.0 / 16, 2.0},
                {Piece::zero(), Piece::constant(A), Piece::constant(-A), Piece::zero()});
  return integrate_twice(mollify(std::move(w), 1.0 / 8), 0.0, 0.0, 0.0);
}

inline CollarTransition collar_transition(const MatPath& G, int d, real eta,
                                          real spatial_scal = 0, int n = 16, int s_points = 9,
                                          int t_points = 60) {
  if (!(eta > 0)) throw parameter_error("collar_transition: eta > 0 required");
  CollarTransition out;
  out.n = n;
  out.approx = std::make_shared<ConcatApprox>(G, d, n, spatial_scal);
  out.profile = collar_transition_profile();
  for (real t : linspace(-0.2, 1.2, 600)) {
    const Jet j = out.profile.eval_jet(t, 2, true);
    out.profile_d1 = std::max(out.profile_d1, std::abs(j.d1));
    out.profile_d2 = std::max(out.profile_d2, std::abs(j.d2));
  }
  out.s_grid = linspace(0.0, 1.0, s_points);

  // the declared curvature floor of the family (constant fibers)
  const real B = spatial_scal;
  for (real s : out.s_grid) {
    const MetricPath p = out.approx->path_at(s);
    const auto gb = gajer_bound({p}, eta);
    out.lambda_s.push_back(gb.lambda);
  }
  const real m = std::max(out.profile_d1, out.profile_d2);
  for (real lam : out.lambda_s)
    out.a_s.push_back(std::max(std::sqrt(m / lam), m / lam) + 1);
  out.b = *std::max_element(out.a_s.begin(), out.a_s.end());

  CurvatureReport rep;
  rep.name = "collar_transition";
  rep.param_names = {"s", "t"};
  rep.bound = B - eta;
  for (real s : out.s_grid) {
    const MetricPath cyl = out.cylinder_at(s);
    const real a = out.a_of(s);
    for (real t : linspace(-0.5, a + 0.5, t_points)) rep.add({s, t}, scal_trace_path(cyl, t));
  }
  rep.finalize();
  out.report = rep;
  return out;
}

}  // namespace gllab
