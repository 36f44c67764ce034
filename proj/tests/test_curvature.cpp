#include <catch2/catch_amalgamated.hpp>

#include "gllab/curvature.hpp"
#include "gllab/fdoracle.hpp"
#include "gllab/torpedo.hpp"

using namespace gllab;

namespace {

MetricPath conformal_torus(int d, std::function<Jet(real)> phi) {
  MetricPath p;
  p.d = d;
  p.spatial_scal = 0;
  p.sample = [d, phi](real t, Mat& g, Mat& g1, Mat& g2) {
    const Jet ph = phi(t);
    const real e = std::exp(2 * ph.v);
    g = e * Mat::Identity(d, d);
    g1 = 2 * ph.d1 * e * Mat::Identity(d, d);
    g2 = (2 * ph.d2 + 4 * ph.d1 * ph.d1) * e * Mat::Identity(d, d);
  };
  return p;
}

MetricPath diagonal_path(const std::vector<std::function<Jet(real)>>& a) {
  MetricPath p;
  p.d = int(a.size());
  p.spatial_scal = 0;
  p.sample = [a](real t, Mat& g, Mat& g1, Mat& g2) {
    const int d = int(a.size());
    g = Mat::Zero(d, d);
    g1 = Mat::Zero(d, d);
    g2 = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      const Jet ai = a[size_t(i)](t);
      g(i, i) = ai.v * ai.v;
      g1(i, i) = 2 * ai.v * ai.d1;
      g2(i, i) = 2 * (ai.d1 * ai.d1 + ai.v * ai.d2);
    }
  };
  return p;
}

std::function<Jet(real)> smooth_positive(Rng& rng, real base) {
  const real a = rng.uniform(0.1, 0.5), w = rng.uniform(0.5, 2.0), ph = rng.uniform(0, 6.28);
  return [=](real t) {
    return Jet{base + a * std::sin(w * t + ph), a * w * std::cos(w * t + ph),
               -a * w * w * std::sin(w * t + ph), -a * w * w * w * std::cos(w * t + ph)};
  };
}

}  // namespace

TEST_CASE("sigma_warp on closed forms") {
  SECTION("round sphere: sigma(sin) = k(k-1)") {
    for (int k : {3, 4, 5, 6, 7}) {
      WarpSpec w = make_warp_spec(k, fn_sin(0.0, M_PI - 0.05));
      for (real t : linspace(0.1, M_PI - 0.1, 50))
        REQUIRE(sigma_warp(w, t) == Catch::Approx(real(k * (k - 1))).margin(1e-9));
    }
  }
  SECTION("flat metric: sigma(id) = 0") {
    WarpSpec w = make_warp_spec(4, fn_identity(0.0, 2.0));
    for (real t : {0.0, 1e-4, 0.5, 1.9}) REQUIRE(sigma_warp(w, t) == Catch::Approx(0.0).margin(1e-9));
  }
  SECTION("cylinder region of a torpedo: (k-1)(k-2)/delta^2") {
    auto tor = build_torpedo(1.0, 0.05);
    WarpSpec w = make_warp_spec(4, tor.f);
    REQUIRE(sigma_warp(w, tor.R + 0.2) == Catch::Approx(6.0).margin(1e-9));
  }
  SECTION("limit branch: sigma(0) = -k(k-1) f'''(0) and branch agreement") {
    // f = sin: f'''(0) = -1, sigma(0) = k(k-1)
    for (int k : {3, 5}) {
      WarpSpec w = make_warp_spec(k, fn_sin(0.0, 3.0));
      REQUIRE(sigma_warp(w, 0.0) == Catch::Approx(real(k * (k - 1))).margin(1e-9));
      const real ts = w.t_switch;
      WarpSpec below = w, above = w;
      below.t_switch = ts * 2;  // forces the expansion branch at ts
      above.t_switch = ts / 2;  // forces the direct branch at ts
      REQUIRE(sigma_warp(below, ts) == Catch::Approx(sigma_warp(above, ts)).margin(1e-6));
    }
  }
  SECTION("invalid warping: f <= 0 in the interior") {
    WarpSpec w = make_warp_spec(3, fn_sin(0.0, 3.1399));
    w.f = make_piecewise({0.0, 3.2}, {Piece{{Term::sine(1.0, 1.0, 0.0)}}});
    w.r_bar = 3.2;
    REQUIRE_THROWS_AS(sigma_warp(w, 3.15), invalid_warping_error);
  }
}

TEST_CASE("scaling identity: sigma(f^theta)(theta t) = sigma(f)(t)/theta^2") {
  Rng rng(2024);
  for (real theta : {0.3, 1.0, 2.5}) {
    for (int rep = 0; rep < 3; ++rep) {
      const real delta = rng.uniform(0.5, 2.0);
      auto tor = build_torpedo(delta, rng.uniform(0.03, 0.1));
      for (int k : {3, 4, 6}) {
        WarpSpec w = make_warp_spec(k, tor.f);
        WarpSpec ws = make_warp_spec(k, scale_warp(tor.f, theta));
        for (real t : linspace(0.05, tor.f.hi() - 1e-9, 40)) {
          const real lhs = sigma_warp(ws, theta * t);
          const real rhs = sigma_warp(w, t) / (theta * theta);
          REQUIRE(lhs == Catch::Approx(rhs).margin(1e-10 * (1 + std::abs(rhs))));
        }
      }
    }
  }
}

TEST_CASE("scal_trace_path") {
  SECTION("constant path returns the fiber curvature") {
    MetricPath p;
    p.d = 3;
    p.spatial_scal = 1.7;
    p.sample = [](real, Mat& g, Mat& g1, Mat& g2) {
      g = Mat::Identity(3, 3);
      g(0, 1) = g(1, 0) = 0.2;
      g1 = Mat::Zero(3, 3);
      g2 = Mat::Zero(3, 3);
    };
    REQUIRE(scal_trace_path(p, 0.3) == Catch::Approx(1.7).margin(1e-13));
  }
  SECTION("conformal flat-torus path: closed form -2 d phi'' - d(d+1) phi'^2") {
    for (int d : {2, 3}) {
      auto phi = [](real t) {
        return Jet{0.3 * std::sin(t), 0.3 * std::cos(t), -0.3 * std::sin(t), -0.3 * std::cos(t)};
      };
      MetricPath p = conformal_torus(d, phi);
      for (real t : linspace(0.0, 1.0, 11)) {
        const Jet ph = phi(t);
        const real expect = -2 * d * ph.d2 - d * (d + 1) * ph.d1 * ph.d1;
        REQUIRE(scal_trace_path(p, t) == Catch::Approx(expect).margin(1e-11));
      }
    }
  }
  SECTION("invariant under conjugation by a constant orthogonal matrix") {
    Rng rng(7);
    auto a1 = smooth_positive(rng, 1.5);
    auto a2 = smooth_positive(rng, 2.0);
    auto a3 = smooth_positive(rng, 1.0);
    MetricPath p = diagonal_path({a1, a2, a3});
    Vec v(3);
    v << 1, 2, -1;
    const Mat Q = Mat::Identity(3, 3) - 2.0 * (v * v.transpose()) / v.squaredNorm();
    MetricPath pq;
    pq.d = 3;
    pq.spatial_scal = p.spatial_scal;
    pq.sample = [&p, Q](real t, Mat& g, Mat& g1, Mat& g2) {
      p.sample(t, g, g1, g2);
      g = Q * g * Q.transpose();
      g1 = Q * g1 * Q.transpose();
      g2 = Q * g2 * Q.transpose();
    };
    for (real t : linspace(0.0, 1.0, 9))
      REQUIRE(scal_trace_path(pq, t) == Catch::Approx(scal_trace_path(p, t)).margin(1e-10));
  }
  SECTION("singular metric raises") {
    MetricPath p;
    p.d = 2;
    p.sample = [](real, Mat& g, Mat& g1, Mat& g2) {
      g = Mat::Zero(2, 2);
      g1 = Mat::Zero(2, 2);
      g2 = Mat::Zero(2, 2);
    };
    REQUIRE_THROWS_AS(scal_trace_path(p, 0.0), solver_error);
  }
}

TEST_CASE("fd oracle") {
  SECTION("Euclidean metric has zero curvature") {
    MetricSampler flat = [](const Vec& x) { return Mat::Identity(int(x.size()), int(x.size())); };
    Vec pt(3);
    pt << 0.3, -0.2, 1.0;
    REQUIRE(fd_oracle_scal(flat, pt, 3) == Catch::Approx(0.0).margin(1e-8));
  }
  SECTION("round 2-sphere of radius rho: scal = 2/rho^2") {
    const real rho = 1.7;
    MetricSampler sphere = [rho](const Vec& x) {
      Mat g = Mat::Zero(2, 2);
      g(0, 0) = 1.0;
      const real s = rho * std::sin(x[0] / rho);
      g(1, 1) = s * s;
      return g;
    };
    Vec pt(2);
    pt << 0.9, 0.4;
    REQUIRE(fd_oracle_scal(sphere, pt, 2) == Catch::Approx(2.0 / (rho * rho)).epsilon(1e-6));
  }
  SECTION("torpedo cap as a full 3d metric agrees with sigma_warp") {
    auto tor = build_torpedo(1.0, 0.05);
    WarpSpec w = make_warp_spec(3, tor.f);
    MetricSampler m = [&tor](const Vec& x) {
      Mat g = Mat::Zero(3, 3);
      const real f = tor.f.value(x[0]);
      g(0, 0) = 1.0;
      g(1, 1) = f * f;
      g(2, 2) = f * f * std::sin(x[1]) * std::sin(x[1]);
      return g;
    };
    for (real t : {0.4, 0.9, 1.3}) {
      Vec pt(3);
      pt << t, 1.1, 0.7;
      const real expect = sigma_warp(w, t);
      REQUIRE(fd_oracle_scal(m, pt, 3) == Catch::Approx(expect).epsilon(1e-5));
    }
  }
  SECTION("trace formula vs oracle on random diagonal paths") {
    Rng rng(41);
    for (int rep = 0; rep < 3; ++rep) {
      auto a1 = smooth_positive(rng, 1.2);
      auto a2 = smooth_positive(rng, 1.8);
      MetricPath p = diagonal_path({a1, a2});
      MetricSampler m = [&](const Vec& x) {
        Mat g = Mat::Zero(3, 3);
        g(0, 0) = 1.0;
        const Jet j1 = a1(x[0]), j2 = a2(x[0]);
        g(1, 1) = j1.v * j1.v;
        g(2, 2) = j2.v * j2.v;
        return g;
      };
      for (real t : {0.2, 0.8}) {
        Vec pt(3);
        pt << t, 0.0, 0.0;
        const real expect = scal_trace_path(p, t);
        REQUIRE(fd_oracle_scal(m, pt, 3) ==
                Catch::Approx(expect).margin(1e-5 * (1 + std::abs(expect))));
      }
    }
  }
}

TEST_CASE("principal curvatures and revolution curvature") {
  SECTION("horizontal line at height eps") {
    const real eps = 0.01;
    CurveJet cj{0.0, eps, M_PI / 2, 0.0};
    const auto pc = principal_curvatures_model(cj, 4, 6);
    REQUIRE(pc.lambdas.size() == 6);
    REQUIRE(pc.lambdas[0] == 0.0);
    for (int j = 1; j < 4; ++j) REQUIRE(pc.lambdas[size_t(j)] == Catch::Approx(-1.0 / eps));
    REQUIRE(pc.lambdas[4] == 0.0);
    REQUIRE(scal_revolution_jet(cj, 4, 0.0) == Catch::Approx(6.0 / (eps * eps)).epsilon(1e-12));
    REQUIRE(sum_pairwise_products_doubled(pc) ==
            Catch::Approx(6.0 / (eps * eps)).epsilon(1e-12));
  }
  SECTION("vertical segment: cylinder, scal = ambient") {
    CurveJet cj{0.0, 0.7, 0.0, 0.0};
    REQUIRE(scal_revolution_jet(cj, 5, 1.25) == Catch::Approx(1.25));
    const auto pc = principal_curvatures_model(cj, 5, 5);
    for (int j = 1; j < 5; ++j) REQUIRE(pc.lambdas[size_t(j)] == 0.0);
  }
  SECTION("axis-meeting circle of radius rho: k(k-1)/rho^2 everywhere") {
    const real rho = 0.8;
    for (real theta : linspace(0.05, M_PI / 2, 10)) {
      CurveJet cj{0.0, rho * std::sin(theta), theta, -1.0 / rho};
      for (int k : {3, 4, 5})
        REQUIRE(scal_revolution_jet(cj, k, 0.0) ==
                Catch::Approx(k * (k - 1) / (rho * rho)).epsilon(1e-12));
    }
  }
  SECTION("axis error") {
    CurveJet cj{0.0, -0.1, 0.3, 0.0};
    REQUIRE_THROWS_AS(scal_revolution_jet(cj, 3, 0.0), axis_error);
    REQUIRE_THROWS_AS(principal_curvatures_model(cj, 3, 3), axis_error);
  }
}

TEST_CASE("lower_bound_estimate") {
  SECTION("kappa = 0, theta = pi/2, C = 0") {
    CurveJet cj{0.0, 0.5, M_PI / 2, 0.0};
    REQUIRE(lower_bound_estimate(cj, 4, 0.0, 2.0) == Catch::Approx(2.0 + 6.0 / 0.25));
  }
  SECTION("nonpositive curvature keeps the bound above base (C = 0)") {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
      CurveJet cj{0.0, rng.uniform(0.01, 2.0), rng.uniform(0.0, M_PI / 2), -rng.uniform(0.0, 5.0)};
      REQUIRE(lower_bound_estimate(cj, 3, 0.0, 0.3) >= 0.3 - 1e-12);
    }
  }
  SECTION("C = 0 bound equals the model revolution curvature (algebraic identity)") {
    Rng rng(99);
    for (int rep = 0; rep < 100; ++rep) {
      CurveJet cj{rng.uniform(-1, 1), rng.uniform(0.05, 2.0), rng.uniform(0.0, M_PI / 2),
                  rng.uniform(-3.0, 3.0)};
      for (int k : {3, 4, 5}) {
        const real lhs = lower_bound_estimate(cj, k, 0.0, 0.0);
        const real rhs = scal_revolution_jet(cj, k, 0.0);
        REQUIRE(lhs == Catch::Approx(rhs).margin(1e-8 * (1 + std::abs(rhs))));
      }
    }
  }
}

TEST_CASE("gajer_bound") {
  SECTION("constant family returns the cap") {
    MetricPath p;
    p.d = 2;
    p.spatial_scal = 2.0;
    p.sample = [](real, Mat& g, Mat& g1, Mat& g2) {
      g = Mat::Identity(2, 2);
      g1 = Mat::Zero(2, 2);
      g2 = Mat::Zero(2, 2);
    };
    const auto gb = gajer_bound({p}, 0.1);
    REQUIRE(gb.lambda == Catch::Approx(1.0));
  }
  SECTION("eta <= 0 and empty family raise") {
    REQUIRE_THROWS_AS(gajer_bound({}, 0.1), parameter_error);
    MetricPath p = conformal_torus(2, [](real t) { return Jet{t, 1, 0, 0}; });
    REQUIRE_THROWS_AS(gajer_bound({p}, 0.0), parameter_error);
  }
  SECTION("returned bound validated by random admissible reparametrizations") {
    const real eta = 0.1;
    MetricPath p = conformal_torus(2, [](real t) { return Jet{t, 1, 0, 0}; });
    // along the path, scal = -2*2*0 - 2*3*1 = -6 identically
    const real B = -6.0;
    const auto gb = gajer_bound({p}, eta);
    REQUIRE(gb.lambda > 0);
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
      // f(t) = c + a sin(w t) stays in [0,1] with |f'|,|f''| <= lambda
      const real w = rng.uniform(0.3, 2.0);
      const real a = std::min({0.2, gb.lambda / w * 0.99, gb.lambda / (w * w) * 0.99});
      const real c = rng.uniform(0.3, 0.7);
      MetricPath comp;
      comp.d = 2;
      comp.spatial_scal = 0;
      comp.sample = [&p, a, w, c](real t, Mat& g, Mat& g1, Mat& g2) {
        const real f = c + a * std::sin(w * t);
        const real f1 = a * w * std::cos(w * t);
        const real f2 = -a * w * w * std::sin(w * t);
        Mat gg(2, 2), gg1(2, 2), gg2(2, 2);
        p.sample(f, gg, gg1, gg2);
        g = gg;
        g1 = gg1 * f1;
        g2 = gg2 * f1 * f1 + gg1 * f2;
      };
      for (real t : linspace(0.0, 6.0, 40))
        REQUIRE(scal_trace_path(comp, t) >= B - eta - 1e-9);
    }
  }
}
