#include <catch2/catch_amalgamated.hpp>

#include "gllab/flatten.hpp"

using namespace gllab;

TEST_CASE("sloping family") {
  const real a = 0.4, b = 1.0, p = 0.8;
  const SlopingFamily fam = sloping_family(a, b, p);
  REQUIRE(fam.q() == Catch::Approx(b * p / 10));

  SECTION("clause suite on the 5x5 grid") {
    const auto rep = verify_sloping_clauses(fam);
    REQUIRE(rep.pass);
  }
  SECTION("s = 0 member is the identity") {
    const auto m = fam.member(0.7, 0.0);
    for (real t : linspace(-0.3, 2.5, 40))
      REQUIRE(m.u.value(t) == Catch::Approx(t).margin(1e-10));
    REQUIRE(m.c == Catch::Approx(b).margin(1e-9));
  }
  SECTION("(1,1) member has plateau slope 1 - q and unit terminal slope") {
    const auto m = fam.member(1.0, 1.0);
    REQUIRE(m.u.eval_jet(0.5 * (a + 0.8 * m.c), 1).d1 == Catch::Approx(1 - fam.q()).margin(1e-10));
    REQUIRE(m.u.eval_jet(m.c + 0.1, 1).d1 == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(m.u.value(m.c) == Catch::Approx(b).margin(1e-10));
  }
  SECTION("c_{r,s} moves continuously in (r, s)") {
    real prev = -1;
    for (real s : linspace(0.0, 1.0, 21)) {
      const auto m = fam.member(0.5, s);
      if (prev > 0) REQUIRE(std::abs(m.c - prev) < 0.05);
      prev = m.c;
    }
  }
}

TEST_CASE("bending family") {
  SECTION("sane parameters (clause suite, two parameter sets)") {
    for (auto [C, beta] : {std::pair{0.5, 1.0}, std::pair{1.0, 0.6}}) {
      const BendingFamily fam = bending_family(C, beta);
      REQUIRE(fam.alpha() == Catch::Approx((beta / 4) * std::exp(-1.0 / C)));
      const auto rep = verify_bending_clauses(fam);
      REQUIRE(rep.pass);
    }
  }
  SECTION("v_{r,0} = id and terminal slope r at s = 1") {
    const BendingFamily fam = bending_family(0.8, 1.0);
    const auto id_member = fam.member(0.5, 0.0);
    for (real t : linspace(0.0, 1.5, 25))
      REQUIRE(id_member.v.value(t) == Catch::Approx(t).margin(1e-10));
    const auto m = fam.member(0.3, 1.0);
    REQUIRE(m.v.eval_jet(m.d + 0.2, 1).d1 == Catch::Approx(0.3).margin(1e-10));
    REQUIRE(m.v.value(m.d) == Catch::Approx(1.0).margin(1e-10));
  }
  SECTION("s = 1 members plateau near the attacking point, for small r too") {
    const BendingFamily fam = bending_family(0.6, 0.8);
    for (real r : {1.0, 0.2, 1e-3}) {
      const auto m = fam.member(r, 1.0);
      const real mid = 0.5 * (fam.flat_lo() + fam.flat_hi());
      REQUIRE(std::abs(m.v.eval_jet(mid, 1).d1) <= 1e-12);
      REQUIRE(m.v.value(fam.flat_hi()) ==
              Catch::Approx(m.v.value(fam.flat_lo())).margin(1e-12));
    }
  }
}

TEST_CASE("easy estimate") {
  PSCBounds bounds;
  bounds.A = 0;
  bounds.k = 4;
  bounds.delta = 1.0;
  bounds.Bpp = 4.0;
  bounds.Bp = 2.0;

  const auto tor = build_torpedo(1.0, 0.05);
  const WarpSpec f = make_warp_spec(4, restrict_fn(tor.f, 0.0, 2.2));

  SECTION("torpedo plus identity reparametrization reduces to sigma(f) >= B'") {
    SmoothFn h = fn_identity(-0.1, 2.2);
    const auto rep = easy_estimate_check(f, h, bounds, 2.0, 2.0);
    REQUIRE(rep.pass);
  }
  SECTION("hypothesis (1) holds for every r on a torpedo with B'' <= (k-1)(k-2)/delta^2") {
    for (real r : {0.5, 1.0, 2.0}) {
      SmoothFn h = fn_identity(-0.1, 2.2);
      const auto rep = easy_estimate_check(f, h, bounds, r, std::min(r, 2.0));
      for (size_t i = 0; i < rep.values.size(); ++i)
        if (rep.sample_points[i][0] == 1) REQUIRE(rep.values[i] >= 0);
    }
  }
  SECTION("a slope spike violating hypothesis (2) is reported, conclusion withheld") {
    PiecewiseFn w({-0.1, 0.05, 0.1, 2.2}, {Piece::zero(), Piece::constant(30.0), Piece::zero()});
    SmoothFn h_bad = integrate_twice(mollify(w, 0.02), 0.0, 0.0, 0.2);
    const auto rep = easy_estimate_check(f, h_bad, bounds, 2.0, 1.2);
    REQUIRE_FALSE(rep.pass);
    bool has_conclusion = false;
    for (const auto& pt : rep.sample_points) has_conclusion |= pt[0] == 4;
    REQUIRE_FALSE(has_conclusion);
  }
  SECTION("adversarial grid search: hypothesis-2 failure with sigma below B' exists") {
    // slope dips from 1 to 0.05 and then recovers sharply where f is still
    // small; the recovery burst violates hypothesis (2) and drags sigma down
    bool found = false;
    for (real recover : {0.5, 0.8, 0.92}) {
      const real drop = 0.95, w1 = 0.05, w2 = 0.05;
      PiecewiseFn w({-0.1, 0.05, 0.05 + w1, 0.15, 0.15 + w2, 2.6},
                    {Piece::zero(), Piece::constant(-drop / w1), Piece::zero(),
                     Piece::constant(recover / w2), Piece::zero()});
      SmoothFn h = integrate_twice(mollify(w, 0.02), 0.0, 0.0, 1.0);
      const real s_hi = 1.5;
      if (h.value(s_hi) > 2.2) continue;
      SmoothFn comp = compose_fn(f.f, restrict_fn(h, 0.0, s_hi));
      WarpSpec wc = make_warp_spec(4, SmoothFn(std::make_shared<RestrictNode>(comp, 0.0, s_hi)));
      real mn = std::numeric_limits<real>::infinity();
      for (real t : linspace(0.0, s_hi, 400)) mn = std::min(mn, sigma_warp(wc, t));
      const auto rep = easy_estimate_check(f, restrict_fn(h, 0.0, s_hi), bounds, 2.0, s_hi);
      if (!rep.pass && mn < bounds.Bp) found = true;
    }
    REQUIRE(found);
  }
}

TEST_CASE("collar interpolation") {
  PSCBounds bounds;
  bounds.A = 0;
  bounds.k = 3;
  bounds.delta = 1.0;
  bounds.Bpp = 1.5;
  bounds.Bp = 1.0;

  SECTION("constant endpoints give the cylinder value") {
    const auto col = collar_interp(0.6, 0.6, 0.5, 2.0, 4.0, bounds);
    for (real t : linspace(2.0, col.R_inf, 30)) {
      const Jet j = col.a_pq.eval_jet(t, 2);
      REQUIRE(j.v == Catch::Approx(0.6).margin(1e-12));
      REQUIRE(sigma_formula(j, 3) == Catch::Approx(2.0 / 0.36).epsilon(1e-10));
    }
  }
  SECTION("some finite R_inf suffices and the report passes") {
    const auto col = collar_interp(0.5, 1.0, 0.5, 2.0, 2.5, bounds);
    REQUIRE(col.report.pass);
    REQUIRE(col.a_pq.eval_jet(2.0, 0).v == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(col.a_pq.eval_jet(col.R_inf, 0).v == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("no room to interpolate") {
    REQUIRE_THROWS_AS(collar_interp(0.5, 1.0, 0.5, 2.0, 2.0, bounds), infeasibility_error);
  }
}

namespace {

struct FixtureCase {
  DeformFixture fx;
  FlattenResult fl;
};

FixtureCase flatten_case(const std::string& name) {
  FixtureCase out;
  out.fx = make_fixture(name, 4, 1.0, 7);
  out.fl = flatten_homotopy(out.fx.family, out.fx.x_grid, out.fx.bounds, out.fx.R, out.fx.r_flat);
  return out;
}

}  // namespace

TEST_CASE("flatten homotopy on the torpedo fixture") {
  const auto tc = flatten_case("torpedo");
  const auto& fl = tc.fl;

  SECTION("selected constants satisfy the chain") {
    REQUIRE(fl.S > 0);
    REQUIRE(fl.S <= fl.bounds.delta + 1e-12);
    REQUIRE(fl.bounds.Bpp * fl.S * fl.S <= 6.0 + 1e-9);
    REQUIRE(fl.q == Catch::Approx(fl.S * fl.p / 10));
    REQUIRE(fl.alpha < 0.8 * fl.S);
    REQUIRE(fl.eta_damp > 0);
    REQUIRE(fl.eta_damp < 1);
  }
  SECTION("lambda = 0 is the input family") {
    for (size_t xi = 0; xi < fl.x_grid.size(); ++xi) {
      const WarpSpec w = fl.at(0.0, xi);
      for (real t : linspace(0.0, fl.R, 40))
        REQUIRE(w.f.eval_jet(t, 0).v ==
                Catch::Approx(fl.input[xi].f.eval_jet(t, 0).v).margin(1e-12));
    }
  }
  SECTION("terminal slices: flat near R, concave, between 0 and delta") {
    for (size_t xi = 0; xi < fl.x_grid.size(); ++xi) {
      const WarpSpec w = fl.at(1.0, xi);
      REQUIRE(w.r_bar == Catch::Approx(fl.R));
      const real tau = fl.tau_of(fl.x_grid[xi]);
      for (real t : linspace(tau + fl.clamp_eps, fl.R, 25))
        REQUIRE(std::abs(w.f.eval_jet(t, 1).d1) <= 1e-9);
      for (real t : linspace(0.0, fl.R, 120)) {
        const Jet j = w.f.eval_jet(t, 2);
        REQUIRE(j.d2 <= 1e-9);
        REQUIRE(j.v >= -1e-12);
        REQUIRE(j.v <= fl.bounds.delta + 1e-9);
      }
    }
  }
  SECTION("x = 1 slice is unchanged on [0, R] at every lambda") {
    const size_t xi = fl.x_grid.size() - 1;
    for (real lam : linspace(0.0, 1.0, 7)) {
      const WarpSpec w = fl.at(lam, xi);
      for (real t : linspace(0.0, std::min(w.r_bar, fl.R), 40))
        REQUIRE(w.f.eval_jet(t, 0).v ==
                Catch::Approx(fl.input[xi].f.eval_jet(t, 0).v).margin(1e-9));
    }
  }
  SECTION("sigma stays above B' on a coarse verification grid") {
    const auto rep = verify_flatten(fl, 7, 60);
    REQUIRE(rep.pass);
    REQUIRE(rep.margin >= 0);
  }
}

TEST_CASE("flatten homotopy on the blend fixture") {
  const auto tc = flatten_case("blend");
  const auto rep = verify_flatten(tc.fl, 7, 60);
  REQUIRE(rep.pass);
  for (size_t xi = 0; xi < tc.fl.x_grid.size(); ++xi) {
    const WarpSpec w = tc.fl.at(1.0, xi);
    const real tau = tc.fl.tau_of(tc.fl.x_grid[xi]);
    for (real t : linspace(tau + tc.fl.clamp_eps, tc.fl.R, 15))
      REQUIRE(std::abs(w.f.eval_jet(t, 1).d1) <= 1e-9);
  }
}

TEST_CASE("torpedo matching endgame") {
  const auto tc = flatten_case("blend");
  std::vector<WarpSpec> flattened;
  for (size_t xi = 0; xi < tc.fl.x_grid.size(); ++xi) flattened.push_back(tc.fl.at(1.0, xi));

  PSCBounds mb = tc.fx.bounds;
  real measured = std::numeric_limits<real>::infinity();
  for (const auto& w : flattened)
    for (real t : linspace(0.0, tc.fx.R, 200)) measured = std::min(measured, sigma_warp(w, t));
  mb.Bpp = 0.9 * measured;
  mb.Bp = 0.5 * mb.Bpp;
  mb.validate();

  const MatchResult mr =
      torpedo_match_homotopy(flattened, tc.fl.x_grid, mb, tc.fx.R, tc.fx.cap_eps);

  SECTION("theta = 1 on the outer half") {
    for (size_t xi = 0; xi < mr.x_grid.size(); ++xi)
      if (mr.x_grid[xi] >= 0.5) REQUIRE(mr.theta[xi] == 1.0);
    REQUIRE(mr.A_cc > 0);
  }
  SECTION("terminal slice equals the delta-torpedo on [0, R]") {
    const auto tor = build_torpedo(mb.delta, mr.cap_eps);
    for (size_t xi = 0; xi < mr.x_grid.size(); ++xi) {
      const SmoothFn w = mr.disc_at(1.0, xi);
      for (real t : linspace(0.0, mr.R, 60))
        REQUIRE(w.eval_jet(t, 0).v == Catch::Approx(tor.f.eval_jet(t, 0).v).margin(1e-9));
    }
  }
  SECTION("lambda = 0 is the flattened input") {
    for (size_t xi = 0; xi < mr.x_grid.size(); ++xi) {
      const SmoothFn w = mr.disc_at(0.0, xi);
      for (real t : linspace(0.0, mr.R, 40))
        REQUIRE(w.eval_jet(t, 0).v ==
                Catch::Approx(flattened[xi].f.eval_jet(t, 0).v).margin(1e-10));
    }
  }
  SECTION("collar endpoints interpolate the deformed and original values") {
    for (real lam : {0.3, 0.8}) {
      for (size_t xi : {size_t(0), mr.x_grid.size() - 1}) {
        const SmoothFn col = mr.collar_at(lam, xi);
        REQUIRE(col.eval_jet(mr.R, 0).v ==
                Catch::Approx(mr.disc_at(lam, xi).eval_jet(mr.R, 0).v).margin(1e-10));
        REQUIRE(col.eval_jet(mr.R_inf, 0).v == Catch::Approx(mr.delta_x[xi]).margin(1e-10));
      }
    }
  }
  SECTION("grid verification: B'' on the disc, B' on the collar") {
    const auto rep = verify_match(mr, 7, 60);
    REQUIRE(rep.pass);
  }
}

TEST_CASE("convex combinations of concave psc warpings stay positive") {
  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const real d1 = rng.uniform(0.5, 1.5), d2 = rng.uniform(0.5, 1.5);
    const auto t1 = build_torpedo(d1, rng.uniform(0.03, 0.1));
    const auto t2 = build_torpedo(d2, rng.uniform(0.03, 0.1));
    const real upto = std::min(t1.f.hi(), t2.f.hi());
    SmoothFn mid = convex_combine(restrict_fn(t1.f, 0.0, upto), restrict_fn(t2.f, 0.0, upto), 0.5);
    WarpSpec w = make_warp_spec(4, mid);
    const Jet j0 = mid.eval_jet(0.0, 3);
    REQUIRE(j0.d3 < 0);
    for (real t : linspace(0.0, upto, 60)) REQUIRE(sigma_warp(w, t) > 0);
  }
}
