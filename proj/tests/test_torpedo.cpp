#include <catch2/catch_amalgamated.hpp>

#include "gllab/torpedo.hpp"

using namespace gllab;

TEST_CASE("cap profile") {
  SECTION("identity below pi/2 - eps, constant pi/2 above pi/2 + eps") {
    const real eps = 0.05;
    SmoothFn u = build_cap_profile(eps);
    REQUIRE(u.value(0.0) == 0.0);
    REQUIRE(u.eval_jet(0.0, 1).d1 == 1.0);
    REQUIRE(u.value(M_PI) == Catch::Approx(M_PI / 2).margin(1e-12));
    for (real t : linspace(0.0, M_PI / 2 - eps, 30))
      REQUIRE(u.value(t) == Catch::Approx(t).margin(1e-12));
    for (real t : linspace(M_PI / 2 + eps, M_PI, 30))
      REQUIRE(u.value(t) == Catch::Approx(M_PI / 2).margin(1e-12));
  }
  SECTION("concavity: max u'' over a grid is nonpositive") {
    SmoothFn u = build_cap_profile(0.08);
    real worst = -std::numeric_limits<real>::infinity();
    for (real t : linspace(0.01, M_PI, 800)) worst = std::max(worst, u.eval_jet(t, 2).d2);
    REQUIRE(worst <= 1e-10);
  }
  SECTION("parameter range") {
    REQUIRE_THROWS_AS(build_cap_profile(0.0), parameter_error);
    REQUIRE_THROWS_AS(build_cap_profile(1.0), parameter_error);
  }
}

TEST_CASE("build_torpedo") {
  SECTION("unit radius: equals sin below the transition") {
    const auto tor = build_torpedo(1.0, 0.05);
    for (real t : linspace(0.0, M_PI / 2 - 0.06, 25))
      REQUIRE(tor.f.value(t) == Catch::Approx(std::sin(t)).margin(1e-12));
  }
  SECTION("constant tail at the radius, flat") {
    const auto tor = build_torpedo(2.0, 0.05);
    const Jet j = tor.f.eval_jet(tor.R, 1);
    REQUIRE(j.v == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(std::abs(j.d1) <= 1e-12);
    REQUIRE(tor.R == Catch::Approx(2.0 * (M_PI / 2 + 0.05)));
  }
  SECTION("curvature floor at delta = 2, k = 3") {
    const auto tor = build_torpedo(2.0, 0.05);
    WarpSpec w = make_warp_spec(3, tor.f);
    real worst = std::numeric_limits<real>::infinity();
    for (real t : linspace(0.0, tor.f.hi(), 600)) worst = std::min(worst, sigma_warp(w, t));
    REQUIRE(worst >= 0.5 - 1e-9);  // (k-1)(k-2)/delta^2
  }
  SECTION("spherical region curvature is the round value k(k-1)/delta^2") {
    const auto tor = build_torpedo(0.5, 0.05);
    WarpSpec w = make_warp_spec(5, tor.f);
    for (real t : linspace(0.01, 0.5 * (M_PI / 2 - 0.06), 25))
      REQUIRE(sigma_warp(w, t) == Catch::Approx(20.0 / 0.25).margin(1e-8));
  }
  SECTION("R scales linearly in delta") {
    const auto t1 = build_torpedo(1.0, 0.07);
    const auto t2 = build_torpedo(2.0, 0.07);
    const auto th = build_torpedo(0.5, 0.07);
    REQUIRE(t2.R == Catch::Approx(2.0 * t1.R).margin(1e-12));
    REQUIRE(th.R == Catch::Approx(0.5 * t1.R).margin(1e-12));
  }
}

TEST_CASE("validate_torpedo") {
  SECTION("built torpedoes pass for all small dimensions") {
    for (real delta : {0.5, 1.0, 2.0}) {
      for (real eps : {0.02, 0.05, 0.1}) {
        const auto tor = build_torpedo(delta, eps);
        for (int k : {3, 4, 5, 6, 7}) {
          const auto rep = validate_torpedo(tor.f, delta, k);
          INFO("delta=" << delta << " eps=" << eps << " k=" << k
                        << " margin=" << rep.margin);
          REQUIRE(rep.pass);
        }
      }
    }
  }
  SECTION("identity fails: no constant tail") {
    const auto rep = validate_torpedo(fn_identity(0.0, 2.0), 1.0, 3);
    REQUIRE_FALSE(rep.pass);
    REQUIRE(rep.values[2] < 0);  // condition (3)
  }
  SECTION("sin on [0, pi] fails: slope goes negative past pi/2") {
    const auto rep = validate_torpedo(fn_sin(0.0, M_PI), 1.0, 3);
    REQUIRE_FALSE(rep.pass);
    REQUIRE(rep.values[0] < 0);  // condition (1)
  }
}
