#pragma once

#include <Eigen/Dense>
#include <functional>

#include "gllab/curvature.hpp"

namespace gllab {

// Independent brute-force scalar-curvature oracle: Christoffel symbols and
// curvature components from their definitions,
//   Gamma^k_ij = 1/2 h^{kl} (h_il,j + h_jl,i - h_ij,l)
//   R^k_lij    = Gamma^k_jl,i - Gamma^k_il,j + Gamma^k_im Gamma^m_jl
//                - Gamma^k_jm Gamma^m_il
//   S          = h^{jl} R^k_jkl
// by 4th-order central differences with one Richardson level. Documented
// accuracy target: 1e-6 relative for metrics with entries of order 1.

using MetricSampler = std::function<Mat(const Vec&)>;

namespace fd_detail {

using Tensor3 = std::vector<Mat>;  // [k](i,j) -> Gamma^k_ij

inline Tensor3 christoffel(const MetricSampler& h, const Vec& x, const std::vector<real>& steps) {
  const int d = int(x.size());
  const Mat h0 = h(x);
  Eigen::FullPivLU<Mat> lu(h0);
  if (!lu.isInvertible()) throw oracle_error("fd oracle: singular metric");
  const Mat hinv = lu.inverse();

  // dh[l](i,j) = d h_ij / d x_l, 4th-order central stencil
  auto dh = std::vector<Mat>(size_t(d));
  for (int l = 0; l < d; ++l) {
    Vec xp = x, xm = x, xp2 = x, xm2 = x;
    const real s = steps[size_t(l)];
    xp[l] += s;
    xm[l] -= s;
    xp2[l] += 2 * s;
    xm2[l] -= 2 * s;
    dh[size_t(l)] = (-h(xp2) + 8 * h(xp) - 8 * h(xm) + h(xm2)) / (12 * s);
  }

  Tensor3 gamma(size_t(d), Mat::Zero(d, d));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        real s = 0;
        for (int l = 0; l < d; ++l)
          s += hinv(k, l) *
               (dh[size_t(j)](i, l) + dh[size_t(i)](j, l) - dh[size_t(l)](i, j));
        gamma[size_t(k)](i, j) = 0.5 * s;
      }
  return gamma;
}

inline real scal_at(const MetricSampler& h, const Vec& x, const std::vector<real>& steps) {
  const int d = int(x.size());
  const Mat h0 = h(x);
  Eigen::FullPivLU<Mat> lu(h0);
  if (!lu.isInvertible()) throw oracle_error("fd oracle: singular metric");
  const Mat hinv = lu.inverse();

  const Tensor3 g0 = christoffel(h, x, steps);

  // dgamma[i][k](l, j)-style derivative Gamma^k_{jl,i}
  auto dgamma = std::vector<Tensor3>(size_t(d));
  for (int i = 0; i < d; ++i) {
    const real s = steps[size_t(i)];
    Vec xp = x, xm = x, xp2 = x, xm2 = x;
    xp[i] += s;
    xm[i] -= s;
    xp2[i] += 2 * s;
    xm2[i] -= 2 * s;
    const Tensor3 gp = christoffel(h, xp, steps);
    const Tensor3 gm = christoffel(h, xm, steps);
    const Tensor3 gp2 = christoffel(h, xp2, steps);
    const Tensor3 gm2 = christoffel(h, xm2, steps);
    Tensor3 der(size_t(d), Mat::Zero(d, d));
    for (int k = 0; k < d; ++k)
      der[size_t(k)] =
          (-gp2[size_t(k)] + 8 * gp[size_t(k)] - 8 * gm[size_t(k)] + gm2[size_t(k)]) / (12 * s);
    dgamma[size_t(i)] = std::move(der);
  }

  // S = h^{jl} R^k_{jkl}, R^k_{lij} = G^k_{jl,i} - G^k_{il,j} + G^k_{im}G^m_{jl}
  //                                   - G^k_{jm}G^m_{il}
  real S = 0;
  for (int j = 0; j < d; ++j)
    for (int l = 0; l < d; ++l) {
      real r = 0;
      for (int k = 0; k < d; ++k) {
        // R^k_{jkl}: lower indices (l->j, i->k, j->l) in the formula above
        real term = dgamma[size_t(k)][size_t(k)](l, j) - dgamma[size_t(l)][size_t(k)](k, j);
        for (int m = 0; m < d; ++m)
          term += g0[size_t(k)](k, m) * g0[size_t(m)](l, j) -
                  g0[size_t(k)](l, m) * g0[size_t(m)](k, j);
        r += term;
      }
      S += hinv(j, l) * r;
    }
  return S;
}

}  // namespace fd_detail

inline real fd_oracle_scal(const MetricSampler& sampler, const Vec& point, int d_total) {
  if (d_total != int(point.size()) || d_total < 1 || d_total > 4)
    throw parameter_error("fd_oracle_scal: d_total must match the point and be <= 4");
  auto steps = std::vector<real>(size_t(d_total));
  for (int i = 0; i < d_total; ++i) {
    steps[size_t(i)] = 1e-3 * (1.0 + std::abs(point[i]));
    if (!(steps[size_t(i)] > 1e-12)) throw oracle_error("fd oracle: step underflow");
  }
  const real coarse = fd_detail::scal_at(sampler, point, steps);
  std::vector<real> half(steps);
  for (auto& s : half) s *= 0.5;
  const real fine = fd_detail::scal_at(sampler, point, half);
  // one Richardson level on the 4th-order stencils
  return (16.0 * fine - coarse) / 15.0;
}

}  // namespace gllab
