#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "bicons/errors.hpp"
#include "bicons/profile.hpp"

using namespace bicons;

namespace {

const AmbientSpace kSphere = AmbientSpace::sphere_product();
const AmbientSpace kHyp = AmbientSpace::hyperbolic_product();

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

Tolerances fixed_step(double h) {
  Tolerances tol;
  tol.max_step = h;
  tol.initial_step = h;
  tol.landing_step = h;
  return tol;
}

}  // namespace

TEST_CASE("generic rhs oracle values") {
  const ProfileDerivative d = generic_rhs({0.0, 0.8, 1.2, 0.1}, kSphere);
  CHECK(d.theta == doctest::Approx(0.63604805121659850510).epsilon(1e-14));
  CHECK(d.a == doctest::Approx(-1.7503488617948355384).epsilon(1e-14));
  CHECK(d.f == doctest::Approx(0.093235447901816174272).epsilon(1e-13));
  CHECK(d.icos == std::cos(0.8));
  CHECK(d.isin == std::sin(0.8));
}

TEST_CASE("generic rhs singular denominator carries the value") {
  const double theta = 0.5;
  const double f = 1.2 * std::cos(theta) / 3.0;
  try {
    generic_rhs({0.0, theta, 1.2, f}, kSphere);
    FAIL("expected SingularDenominator");
  } catch (const SingularDenominator& e) {
    CHECK(std::abs(e.value()) <= 1e-15);
  }
}

TEST_CASE("a' is negative for sin > 0, a > 0, c = +1") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> th(0.05, 3.09), a(0.01, 5.0), f(0.01, 2.0);
  for (int k = 0; k < 200; ++k) {
    ProfileState s{0.0, th(rng), a(rng), f(rng)};
    if (std::abs(s.a * std::cos(s.theta) - 3 * s.f) < 1e-3) continue;
    CHECK(generic_rhs(s, kSphere).a < 0.0);
  }
}

TEST_CASE("special rhs") {
  const SpecialDerivative d = special_rhs({0.0, M_PI / 4, 0.25, 1});
  CHECK(d.theta == doctest::Approx(0.35355339059327376220).epsilon(1e-15));
  CHECK(d.g == doctest::Approx(-0.61871843353822908385).epsilon(1e-14));
  CHECK_THROWS_AS(special_rhs({0.0, 0.3, 1.0 / 3.0, 1}), SingularDenominator);
  CHECK(special_rhs({0.0, 0.3, 0.5, 1}).theta == 0.0);
  CHECK_THROWS_AS(special_rhs({0.0, 0.3, -1.0 / 3.0, -1}), SingularDenominator);
}

TEST_CASE("integrate default sphere curve") {
  const ProfileCurve curve = integrate({0.0, 0.8, 1.2, 0.1}, 0.2, kSphere);
  REQUIRE(curve.size() > 5);
  CHECK(curve.stop_reason == StopReason::reached_u_max);
  CHECK(curve.samples.back().u == 0.2);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    CHECK(curve.samples[i].f > 0.0);
    if (i > 0) {
      CHECK(curve.samples[i].u > curve.samples[i - 1].u);
      CHECK(curve.samples[i].f > curve.samples[i - 1].f);
    }
  }
}

TEST_CASE("default sphere curve runs into the singular set") {
  const ProfileCurve curve = integrate({0.0, 0.8, 1.2, 0.1}, 1.0, kSphere);
  CHECK(curve.stop_reason == StopReason::singular_denominator);
  CHECK(curve.samples.back().u == doctest::Approx(0.2318).epsilon(1e-3));
}

TEST_CASE("integrate preconditions") {
  CHECK_THROWS_AS(integrate({0.0, 0.8, 1.2, 0.0}, 1.0, kSphere), PreconditionError);
  CHECK_THROWS_AS(integrate({0.0, 0.8, 1.2, -0.1}, 1.0, kSphere), PreconditionError);
  // f'(u0) < 0
  CHECK_THROWS_AS(integrate({0.0, 0.8, 2.0, 0.1}, 1.0, kHyp), PreconditionError);
  CHECK_THROWS_AS(integrate({0.0, 0.0, 1.2, 0.1}, 1.0, kSphere), PreconditionError);
  CHECK_THROWS_AS(integrate(SpecialState{0.0, 0.6, 0.25, 2}, 1.0), PreconditionError);
}

TEST_CASE("sin_vanish stop") {
  const ProfileCurve curve = integrate({0.0, 3.1413, -1.0, 0.4}, 5.0, kSphere);
  CHECK(curve.stop_reason == StopReason::sin_vanish);
}

TEST_CASE("landing grid puts samples on every node") {
  Tolerances tol;
  tol.landing_step = 0.2 / 64;
  const ProfileCurve curve = integrate({0.0, 0.8, 1.2, 0.1}, 0.2, kSphere, tol);
  std::size_t hits = 0;
  for (const auto& s : curve.samples) {
    const double k = s.u / tol.landing_step;
    if (std::abs(k - std::round(k)) < 1e-9) ++hits;
  }
  CHECK(hits == 65);
}

TEST_CASE("local error and invariant properties along generic curves") {
  struct Case {
    AmbientSpace space;
    ProfileState init;
    double u_max;
  };
  const Case cases[] = {{kSphere, {0.0, 0.8, 1.2, 0.1}, 0.2},
                        {kHyp, {0.0, 0.8, 2.0, 0.6}, 1.0},
                        {kHyp, {0.0, 0.8, 0.5, 0.2}, 1.0}};
  for (const auto& cs : cases) {
    const ProfileCurve curve = integrate(cs.init, cs.u_max, cs.space, fixed_step(1e-3));
    CHECK(curve.stop_reason == StopReason::reached_u_max);
    const double c = cs.space.c();
    double worst_a = 0.0, worst_trace = 0.0;
    const auto& s = curve.samples;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      const double h = s[i + 1].u - s[i - 1].u;
      const double da = (s[i + 1].a_or_g - s[i - 1].a_or_g) / h;
      const double dth = (s[i + 1].theta - s[i - 1].theta) / h;
      worst_a = std::max(worst_a, std::abs(da + (s[i].a_or_g * s[i].a_or_g + c) * std::sin(s[i].theta)));
      worst_trace = std::max(worst_trace, std::abs(-dth + s[i].a_or_g * std::cos(s[i].theta) - 2 * s[i].f));
      CHECK(s[i + 1].f > s[i].f);
    }
    CHECK(worst_a <= 1e-5);
    CHECK(worst_trace <= 1e-5);
  }
}

TEST_CASE("backward sweep joins the forward curve") {
  const ProfileState init{0.0, 0.8, 2.0, 0.6};
  const ProfileCurve back = integrate_backward(init, -0.05, kHyp);
  REQUIRE(back.size() > 2);
  CHECK(back.stop_reason == StopReason::reached_u_max);
  CHECK(back.samples.front().u == -0.05);
  CHECK(back.samples.back().u == 0.0);
  CHECK(back.samples.back().theta == init.theta);
  for (std::size_t i = 1; i < back.size(); ++i) CHECK(back.samples[i].u > back.samples[i - 1].u);
}

TEST_CASE("ode residual converges at second order") {
  SUBCASE("sphere") {
    const ProfileCurve c1 = integrate({0.0, 0.8, 1.2, 0.1}, 0.2, kSphere, fixed_step(2e-3));
    const ProfileCurve c2 = integrate({0.0, 0.8, 1.2, 0.1}, 0.2, kSphere, fixed_step(1e-3));
    const double r1 = max_of(ode_residual(c1)), r2 = max_of(ode_residual(c2));
    CHECK(r2 <= 1e-3);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.2));
  }
  SUBCASE("hyperbolic a^2 > 1") {
    const ProfileCurve c1 = integrate({0.0, 0.8, 2.0, 0.6}, 1.0, kHyp, fixed_step(5e-3));
    const ProfileCurve c2 = integrate({0.0, 0.8, 2.0, 0.6}, 1.0, kHyp, fixed_step(2.5e-3));
    const double r1 = max_of(ode_residual(c1)), r2 = max_of(ode_residual(c2));
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.2));
  }
  SUBCASE("special branch") {
    const SpecialState init{0.0, 0.6, 0.25, 1};
    const ProfileCurve c1 = integrate(init, 1.0, fixed_step(5e-3));
    const ProfileCurve c2 = integrate(init, 1.0, fixed_step(2.5e-3));
    const double r1 = max_of(ode_residual(c1)), r2 = max_of(ode_residual(c2));
    CHECK(r2 <= 1e-4);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.2));
  }
}

TEST_CASE("ode residual detects a frozen a") {
  ProfileCurve curve = integrate({0.0, 0.8, 1.2, 0.1}, 0.2, kSphere, fixed_step(1e-3));
  for (auto& s : curve.samples) s.a_or_g = 1.2;
  CHECK(max_of(ode_residual(curve)) > 1e-2);
  curve.samples.resize(4);
  CHECK_THROWS_AS(ode_residual(curve), PreconditionError);
}

TEST_CASE("first integral closed form") {
  CHECK(first_integral(M_PI / 4, 0.5, 1) == doctest::Approx(-1.60061478726694713642).epsilon(1e-14));
  CHECK_THROWS_AS(first_integral(0.3, 0.0, 1), DomainError);
  CHECK_THROWS_AS(first_integral(M_PI / 2, 0.3, 1), DomainError);
}

TEST_CASE("branch invariant is conserved along special curves") {
  for (int sign : {1, -1}) {
    const ProfileCurve curve = integrate(SpecialState{0.0, 0.6, 0.25, sign}, 2.0);
    REQUIRE(curve.size() > 10);
    const double e0 = branch_invariant(curve.samples[0].theta, curve.samples[0].a_or_g, sign);
    double drift = 0.0;
    for (const auto& s : curve.samples) drift = std::max(drift, std::abs(branch_invariant(s.theta, s.a_or_g, sign) - e0));
    CHECK(drift <= 1e-8);
  }
}

TEST_CASE("solve_g") {
  const double g = solve_g(M_PI / 4, -1.6006, 1, {0.1, 0.9});
  CHECK(std::abs(g - 0.5) < 5e-3);
  CHECK(std::abs(first_integral(M_PI / 4, g, 1) + 1.6006) <= 1e-10);
  CHECK_THROWS_AS(solve_g(M_PI / 4, 100.0, 1, {0.1, 0.9}), BracketingError);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> th(-1.4, 1.4), gd(0.05, 3.0);
  for (int k = 0; k < 100; ++k) {
    const double theta = th(rng), g_star = gd(rng);
    for (int sign : {1, -1}) {
      // the closed form is stationary at g = 1/3 and g = 1/2 for sign +1
      if (sign == 1 && (std::abs(g_star - 1.0 / 3.0) < 0.01 || std::abs(g_star - 0.5) < 0.01)) continue;
      const double e = first_integral(theta, g_star, sign);
      const double root = solve_g(theta, e, sign, {g_star - 1e-3, g_star + 1e-3});
      CHECK(std::abs(root - g_star) <= 1e-8);
    }
  }
}

TEST_CASE("resample reproduces samples and interpolates smoothly") {
  const ProfileCurve curve = integrate({0.0, 0.8, 1.2, 0.1}, 0.2, kSphere);
  std::vector<double> u;
  for (const auto& s : curve.samples) u.push_back(s.u);
  const auto same = resample(curve, u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(same[i].theta == curve.samples[i].theta);
    CHECK(same[i].icos == curve.samples[i].icos);
  }
  Tolerances fine;
  fine.landing_step = 0.2 / 50;
  const ProfileCurve ref = integrate({0.0, 0.8, 1.2, 0.1}, 0.2, kSphere, fine);
  std::vector<double> grid;
  for (int k = 0; k <= 50; ++k) grid.push_back(k * fine.landing_step);
  const auto mid = resample(curve, grid);
  const auto exact = resample(ref, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(mid[i].theta - exact[i].theta) <= 5e-8);
    CHECK(std::abs(mid[i].f - exact[i].f) <= 5e-8);
  }
  CHECK_THROWS_AS(resample(curve, {0.3}), PreconditionError);
}
