#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bicons/diffgeo.hpp"
#include "bicons/errors.hpp"

using namespace bicons;

namespace {

SurfacePatch sphere_patch(int n, double u_max = kDefaultUMax) {
  Tolerances tol;
  tol.landing_step = u_max / (n - 1);
  const ProfileCurve curve = integrate(ProfileState{0.0, 0.8, 1.2, 0.1}, u_max, AmbientSpace(1), tol);
  return synthesize(curve, canonical_frame(CaseTag::sphere()), {-u_max / 2, u_max / 2}, n, n);
}

// S^2 x {0}, polar angle u, azimuth v.
SurfacePatch slice(int n) {
  return sample_map(1, uniform_grid(0.6, 1.0, n), uniform_grid(-0.2, 0.2, n), [](double u, double v) {
    return Vec4(std::sin(u) * std::cos(v), std::sin(u) * std::sin(v), std::cos(u), 0.0);
  });
}

// Vertical cylinder over a circle of geodesic radius r in S^2; height u.
SurfacePatch cylinder(int n, double r) {
  return sample_map(1, uniform_grid(-0.2, 0.2, n), uniform_grid(-0.2, 0.2, n), [r](double u, double v) {
    return Vec4(std::sin(r) * std::cos(v), std::sin(r) * std::sin(v), std::cos(r), u);
  });
}

double interior_spread(const Eigen::ArrayXXd& a, int m) {
  const Eigen::ArrayXXd b = a.block(m, m, a.rows() - 2 * m, a.cols() - 2 * m);
  return b.maxCoeff() - b.minCoeff();
}

}  // namespace

TEST_CASE("totally geodesic slice") {
  const SurfacePatch p = slice(41);
  const SurfaceGeometry geo(p);
  const double h = grid_scale(p);
  const InteriorField res = bicons_residual(p);
  CHECK(res.margin == 2);
  CHECK(res.max_abs() <= 1e-9);
  for (int i = 3; i < 38; i += 7)
    for (int j = 3; j < 38; j += 7) {
      const PointGeometry g = geo.point(i, j);
      CHECK(std::abs(g.f) <= 1e-9);
      CHECK(g.K == doctest::Approx(1.0).epsilon(h * h));
    }
}

TEST_CASE("CMC cylinder has constant f and vanishing residual") {
  const double r = 0.7;
  const SurfacePatch p = cylinder(41, r);
  const SurfaceGeometry geo(p);
  const double h = grid_scale(p);
  CHECK(interior_spread(geo.f(), 1) <= 1e-10);
  CHECK(std::abs(geo.point(20, 20).f) == doctest::Approx(0.5 / std::tan(r)).epsilon(h * h));
  CHECK(std::abs(geo.point(20, 20).K) <= 1e-6);
  CHECK(bicons_residual(p).max_abs() <= 1e-8);
}

TEST_CASE("geometry preconditions") {
  const SurfacePatch small = slice(4);
  CHECK_THROWS_AS(SurfaceGeometry{small}, PreconditionError);
  const SurfaceGeometry geo(slice(9));
  CHECK_THROWS_AS(geo.point(1, 4), PreconditionError);
  CHECK_THROWS_AS(geo.point(4, 8), PreconditionError);
  // Constant in v: rank-one differential.
  const SurfacePatch flat = sample_map(1, uniform_grid(0.5, 1.0, 9), uniform_grid(0.0, 0.1, 9), [](double u, double) {
    return Vec4(std::sin(u), 0.0, std::cos(u), 0.0);
  });
  CHECK_THROWS_AS(SurfaceGeometry{flat}, DomainError);
}

TEST_CASE("generated sphere patch passes every check at order two") {
  const SurfacePatch coarse = sphere_patch(64), fine = sphere_patch(128);
  VerificationReport r = verify_patch(coarse, {2});
  r.attach_convergence(verify_patch(fine, {2}));
  for (const auto& c : r.checks) {
    CAPTURE(c.name);
    CHECK(c.pass);
    CHECK(c.n_u == 64);
  }
  for (const char* name : {"bicons_residual", "first_form_E", "first_form_G", "x1_theta", "lambda2_transport",
                           "lambda2_eq_a_cos", "a_transport", "f_recovery", "theta_recovery", "gauss_equation"}) {
    CAPTURE(name);
    REQUIRE(r.at(name).convergence_ratio);
    CHECK(*r.at(name).convergence_ratio >= 3.2);
    CHECK(*r.at(name).convergence_ratio <= 4.8);
  }
  CHECK(r.at("dK_du_min").min_residual.value() > 1e-3);
  CHECK_THROWS_AS(r.at("no_such_check"), std::out_of_range);
}

TEST_CASE("node geometry agrees with the source curve") {
  const SurfacePatch p = sphere_patch(64);
  const SurfaceGeometry geo(p);
  const double h = grid_scale(p);
  for (const int i : {5, 31, 58}) {
    const ProfileSample& s = p.profile[std::size_t(i)];
    const PointGeometry g = geo.point(i, 32);
    CHECK(g.f == doctest::Approx(s.f).epsilon(5 * h * h / s.f));
    CHECK(g.lambda2 == doctest::Approx(s.a_or_g * std::cos(s.theta)).epsilon(1e-4));
    CHECK(g.f == doctest::Approx(0.5 * (g.lambda1 + g.lambda2)).epsilon(1e-12));
    CHECK(std::abs(g.off_diag) <= 1e-5 * std::max(std::abs(g.lambda1), std::abs(g.lambda2)));
  }
}

TEST_CASE("thread count does not change the report") {
  const SurfacePatch p = sphere_patch(32);
  const VerificationReport a = verify_patch(p, {1}), b = verify_patch(p, {3});
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t k = 0; k < a.checks.size(); ++k) CHECK(a.checks[k].max_residual == b.checks[k].max_residual);
}

TEST_CASE("jittered nodes trip the transport identity") {
  SurfacePatch p = sphere_patch(64);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-1e-3, 1e-3);
  for (Vec4& x : p.points) x += Vec4(d(rng), d(rng), d(rng), d(rng));
  const VerificationReport r = verify_patch(p);
  CHECK(r.at("lambda2_transport").max_residual > 1e-2);
  CHECK_FALSE(r.all_pass());
}

TEST_CASE("planarity rank test") {
  std::vector<Vec4> line, circle, helix;
  for (int k = 0; k < 20; ++k) {
    const double t = 0.1 * k;
    line.emplace_back(1 + t, 2 - t, 3 * t, 0.5);
    circle.emplace_back(std::cos(t), std::sin(t), 0.3, 0.1);
    helix.emplace_back(std::cos(t), std::sin(t), 0.0, t);
  }
  CHECK(planarity(line) <= 1e-15);
  CHECK(planarity(circle) <= 1e-14);
  CHECK(planarity(helix) > 1e-2);
}

TEST_CASE("riccati candidates") {
  CHECK(riccati_candidate(1, 1.0, 1.0, RiccatiFamily::published) == doctest::Approx(1.5));
  CHECK(riccati_candidate(-1, 2.0, 1.0, RiccatiFamily::published) == doctest::Approx(1.5));
  CHECK(riccati_candidate(1, 1.0, 1.0, RiccatiFamily::general) == doctest::Approx(1.0));
  // c = -1, c0 = 0.5: 0.5 a^4 + a^2 - 0.5 vanishes at a^2 = sqrt(2) - 1.
  CHECK_THROWS_AS(riccati_candidate(-1, 0.5, std::sqrt(std::sqrt(2.0) - 1.0), RiccatiFamily::published), DomainError);
  CHECK_THROWS_AS(riccati_nonexistence(-1, 1.0, {0.5, 1.5}, 3), DomainError);
  CHECK_THROWS_AS(riccati_nonexistence(1, 1.0, {0.5, 1.5}, 1), PreconditionError);
}

TEST_CASE("riccati sweep: general family solves the constant-K equation but not the biconservative one") {
  for (const int c : {1, -1})
    for (const double c0 : {0.5, 1.0, 2.0}) {
      CAPTURE(c);
      CAPTURE(c0);
      const auto range = default_a_range(c);
      const VerificationReport g = riccati_nonexistence(c, c0, range, 200, RiccatiFamily::general);
      CHECK(g.at("constant_K_equation[general]").max_residual <= 1e-8);
      CHECK(g.at("bicons_equation[general]").min_residual.value() > 1e-3);
      // The printed closed forms are not solutions of the constant-K equation.
      const VerificationReport p = riccati_nonexistence(c, c0, range, 200, RiccatiFamily::published);
      CHECK(p.at("constant_K_equation[published]").max_residual > 1e-2);
    }
}

TEST_CASE("report bookkeeping") {
  VerificationReport r;
  r.checks.push_back(upper_check("a", 1e-3, 1e-2, 8, 8));
  r.checks.push_back(lower_check("b", 0.5, 2.0, 1e-3, 8, 8));
  CHECK(r.all_pass());
  VerificationReport fine;
  fine.checks.push_back(upper_check("a", 2.5e-4, 1e-2, 16, 16));
  r.attach_convergence(fine);
  CHECK(*r.at("a").convergence_ratio == doctest::Approx(4.0));
  CHECK_FALSE(r.at("b").convergence_ratio);
  r.append(VerificationReport{{upper_check("c", 1.0, 0.5, 8, 8)}});
  CHECK_FALSE(r.all_pass());
  CHECK(r.find("c") != nullptr);
  CHECK(r.find("d") == nullptr);
}
