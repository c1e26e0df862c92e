#include "bicons/diffgeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bicons/errors.hpp"
#include "bicons/profile.hpp"
#include "parallel.hpp"

namespace bicons {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Below this a residual is rounding noise and has no meaningful convergence ratio.
constexpr double kNoiseFloor = 1e-11;

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

constexpr double kRounding = 1000.0 * std::numeric_limits<double>::epsilon();

struct Scaled {
  const char* name;
  double C;
  int k;
};
constexpr Scaled kScaled[] = {
    {"first_form_E", 2.5, 1},     {"first_form_F", 2.5, 1},       {"first_form_G", 2.5, 1},
    {"bicons_residual", 50.0, 3}, {"x1_theta", 20.0, 3},          {"x2_theta", 20.0, 3},
    {"lambda2_transport", 50.0, 3}, {"x2_lambda", 50.0, 3},       {"lambda2_eq_a_cos", 5.0, 2},
    {"a_transport", 10.0, 3},     {"f_recovery", 5.0, 2},         {"theta_recovery", 2.5, 2},
    {"gauss_equation", 10.0, 3},
};

const Scaled& scaled(const std::string& name) {
  for (const auto& s : kScaled)
    if (name == s.name) return s;
  throw std::logic_error("no tolerance constant for " + name);
}

// Generalized cross product: a vector Euclidean-orthogonal to the three rows.
Vec4 null_vector(const Vec4& a, const Vec4& b, const Vec4& c) {
  Eigen::Matrix<double, 3, 4> m;
  m.row(0) = a.transpose();
  m.row(1) = b.transpose();
  m.row(2) = c.transpose();
  Vec4 out;
  for (int k = 0; k < 4; ++k) {
    Eigen::Matrix3d minor;
    int col = 0;
    for (int l = 0; l < 4; ++l)
      if (l != k) minor.col(col++) = m.col(l);
    out(k) = ((k % 2) ? -1.0 : 1.0) * minor.determinant();
  }
  return out;
}

double max_finite(const Eigen::ArrayXXd& a) {
  double m = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double x = a.data()[k];
    if (std::isnan(x)) continue;
    m = std::max(m, x);
    any = true;
  }
  return any ? m : kNaN;
}

Eigen::ArrayXXd nan_array(int n_u, int n_v) { return Eigen::ArrayXXd::Constant(n_u, n_v, kNaN); }

}  // namespace

// Per-node data shared between the construction passes.
struct NodeFrame {
  Vec4 pu, pv, eta;
  Mat2 I, II, A;
  Vec2 x1 = Vec2::Zero(), x2 = Vec2::Zero();  // orthonormal frame, coordinates in (d/du, d/dv)
  bool valid = false;
};

namespace {

// Directional derivative of a node field along the coordinate vector w.
double directional(const Eigen::ArrayXXd& h, int i, int j, const Vec2& w, double hu, double hv) {
  const double du = (h(i + 1, j) - h(i - 1, j)) / (2.0 * hu);
  const double dv = (h(i, j + 1) - h(i, j - 1)) / (2.0 * hv);
  return w(0) * du + w(1) * dv;
}

}  // namespace

SurfaceGeometry::SurfaceGeometry(const SurfacePatch& patch, Parallelism par) : patch_(patch) {
  const int nu = patch.n_u(), nv = patch.n_v();
  if (nu < 5 || nv < 5) throw PreconditionError("SurfaceGeometry: need at least 5 nodes per direction");
  if (patch.points.size() != std::size_t(nu) * std::size_t(nv))
    throw PreconditionError("SurfaceGeometry: point count does not match the grid");
  const double hu = patch.h_u(), hv = patch.h_v();
  const AmbientSpace space = patch.space();
  const Vec4 metric(1.0, 1.0, double(space.c()), 1.0);

  std::vector<NodeFrame> nodes(std::size_t(nu) * std::size_t(nv));
  auto node = [&](int i, int j) -> NodeFrame& { return nodes[std::size_t(i) * std::size_t(nv) + std::size_t(j)]; };
  const auto& P = [&](int i, int j) -> const Vec4& { return patch.at(i, j); };

  f_ = E_ = F_ = G_ = sin_ = nan_array(nu, nv);
  lambda1_ = lambda2_ = off_ = theta_ = grad_norm_ = bicons_ = K_gauss_ = K_intr_ = nan_array(nu, nv);
  x1u_ = x1v_ = x2u_ = x2v_ = nan_array(nu, nv);

  // Pass 1: derivatives of Phi, normal, shape operator.
  std::vector<std::string> failures(static_cast<std::size_t>(nu));
  detail::parallel_for(nu - 2, par.threads, [&](int k) {
    const int i = k + 1;
    for (int j = 1; j + 1 < nv; ++j) {
      NodeFrame& n = node(i, j);
      n.pu = (P(i + 1, j) - P(i - 1, j)) / (2.0 * hu);
      n.pv = (P(i, j + 1) - P(i, j - 1)) / (2.0 * hv);
      const Vec4 puu = (P(i + 1, j) - 2.0 * P(i, j) + P(i - 1, j)) / (hu * hu);
      const Vec4 pvv = (P(i, j + 1) - 2.0 * P(i, j) + P(i, j - 1)) / (hv * hv);
      const Vec4 puv = (P(i + 1, j + 1) - P(i + 1, j - 1) - P(i - 1, j + 1) + P(i - 1, j - 1)) / (4.0 * hu * hv);
      n.I << inner(space, n.pu, n.pu), inner(space, n.pu, n.pv), inner(space, n.pu, n.pv), inner(space, n.pv, n.pv);
      if (!(n.I.determinant() >= 1e-12)) {
        std::ostringstream msg;
        msg << "degenerate metric at node (" << i << ", " << j << "), det I = " << n.I.determinant();
        failures[std::size_t(i)] = msg.str();
        return;
      }
      Vec4 position = P(i, j);
      position(3) = 0.0;
      Vec4 eta = null_vector(metric.cwiseProduct(n.pu), metric.cwiseProduct(n.pv), metric.cwiseProduct(position));
      const double norm2 = inner(space, eta, eta);
      if (!(norm2 > 0.0)) {
        failures[std::size_t(i)] = "normal is not spacelike at node (" + std::to_string(i) + ", " + std::to_string(j) + ")";
        return;
      }
      eta /= std::sqrt(norm2);
      n.II << inner(space, puu, eta), inner(space, puv, eta), inner(space, puv, eta), inner(space, pvv, eta);
      // Orientation: <xi, eta> > 0; for (numerically) horizontal normals, f >= 0.
      bool flip = eta(3) < 0.0;
      if (std::abs(eta(3)) <= 1e-10) flip = (n.I.inverse() * n.II).trace() < 0.0;
      if (flip) {
        eta = -eta;
        n.II = -n.II;
      }
      n.eta = eta;
      n.A = n.I.inverse() * n.II;
      n.valid = true;
      E_(i, j) = n.I(0, 0);
      F_(i, j) = n.I(0, 1);
      G_(i, j) = n.I(1, 1);
      f_(i, j) = 0.5 * n.A.trace();
      sin_(i, j) = eta(3);
    }
  });
  for (const auto& msg : failures)
    if (!msg.empty()) throw DomainError("SurfaceGeometry: " + msg);

  // Pass 2: gradient of f, adapted frame, principal data, biconservative residual.
  detail::parallel_for(nu - 4, par.threads, [&](int k) {
    const int i = k + 2;
    for (int j = 2; j + 2 < nv; ++j) {
      NodeFrame& n = node(i, j);
      const Vec2 df((f_(i + 1, j) - f_(i - 1, j)) / (2.0 * hu), (f_(i, j + 1) - f_(i, j - 1)) / (2.0 * hv));
      const Mat2 Iinv = n.I.inverse();
      const Vec2 grad = Iinv * df;
      const double gnorm = std::sqrt(std::max(0.0, df.dot(grad)));
      grad_norm_(i, j) = gnorm;
      // Without a usable gradient the u-direction stands in for X1.
      n.x1 = gnorm > 1e-9 ? Vec2(grad / gnorm) : Vec2(1.0 / std::sqrt(n.I(0, 0)), 0.0);
      const Vec2 Ix1 = n.I * n.x1;
      Vec2 w(-Ix1(1), Ix1(0));
      w /= std::sqrt(w.dot(n.I * w));
      n.x2 = w;
      lambda1_(i, j) = n.x1.dot(n.II * n.x1);
      lambda2_(i, j) = n.x2.dot(n.II * n.x2);
      off_(i, j) = n.x1.dot(n.II * n.x2);
      const Vec4 X1 = n.x1(0) * n.pu + n.x1(1) * n.pv;
      theta_(i, j) = std::atan2(n.eta(3), X1(3));
      const double s = std::sin(theta_(i, j));
      K_gauss_(i, j) = lambda1_(i, j) * lambda2_(i, j) + space.c() * s * s;

      const double f = f_(i, j);
      const Vec4 grad_amb = grad(0) * n.pu + grad(1) * n.pv;
      const Vec2 Ag = n.A * grad;
      const Vec4 A_grad = Ag(0) * n.pu + Ag(1) * n.pv;
      const Vec4 e1 = n.pu / std::sqrt(n.I(0, 0));
      Vec4 e2 = n.pv - inner(space, n.pv, e1) * e1;
      e2 /= std::sqrt(inner(space, e2, e2));
      const Vec4 trace = tangential_curvature_trace(space, n.eta, e1, e2, 1e-8);
      const Vec4 r = A_grad + f * grad_amb + f * trace;
      bicons_(i, j) = std::sqrt(std::abs(inner(space, r, r)));
    }
  });

  // Pass 3: intrinsic curvature from E and G alone.
  for (int i = 3; i + 3 < nu; ++i)
    for (int j = 3; j + 3 < nv; ++j) {
      auto P_u = [&](int a, int b) {
        const double root = std::sqrt(E_(a, b) * G_(a, b));
        return (G_(a + 1, b) - G_(a - 1, b)) / (2.0 * hu) / root;
      };
      auto Q_v = [&](int a, int b) {
        const double root = std::sqrt(E_(a, b) * G_(a, b));
        return (E_(a, b + 1) - E_(a, b - 1)) / (2.0 * hv) / root;
      };
      const double root = std::sqrt(E_(i, j) * G_(i, j));
      const double dP = (P_u(i + 1, j) - P_u(i - 1, j)) / (2.0 * hu);
      const double dQ = (Q_v(i, j + 1) - Q_v(i, j - 1)) / (2.0 * hv);
      K_intr_(i, j) = -(dP + dQ) / (2.0 * root);
    }

  for (int i = 2; i + 2 < nu; ++i)
    for (int j = 2; j + 2 < nv; ++j) {
      const NodeFrame& n = node(i, j);
      x1u_(i, j) = n.x1(0);
      x1v_(i, j) = n.x1(1);
      x2u_(i, j) = n.x2(0);
      x2v_(i, j) = n.x2(1);
    }
}

}  // namespace bicons

namespace bicons {

double SurfaceGeometry::x1_derivative(const Eigen::ArrayXXd& field, int i, int j) const {
  return directional(field, i, j, Vec2(x1u_(i, j), x1v_(i, j)), patch_.h_u(), patch_.h_v());
}

double SurfaceGeometry::x2_derivative(const Eigen::ArrayXXd& field, int i, int j) const {
  return directional(field, i, j, Vec2(x2u_(i, j), x2v_(i, j)), patch_.h_u(), patch_.h_v());
}

PointGeometry SurfaceGeometry::point(int i, int j) const {
  if (i < 2 || j < 2 || i + 2 >= n_u() || j + 2 >= n_v())
    throw PreconditionError("point_geometry: node (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") is too close to the border");
  return {f_(i, j), grad_norm_(i, j), lambda1_(i, j), lambda2_(i, j), off_(i, j), theta_(i, j), K_intr_(i, j)};
}

PointGeometry point_geometry(const SurfacePatch& patch, int i, int j) { return SurfaceGeometry(patch).point(i, j); }

double InteriorField::max_abs() const { return values.size() ? values.abs().maxCoeff() : 0.0; }

InteriorField bicons_residual(const SurfacePatch& patch, Parallelism par) {
  const SurfaceGeometry geo(patch, par);
  InteriorField out;
  out.margin = 2;
  out.values = geo.bicons().block(2, 2, geo.n_u() - 4, geo.n_v() - 4);
  return out;
}

bool VerificationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

const CheckResult& VerificationReport::at(const std::string& name) const {
  if (const CheckResult* c = find(name)) return *c;
  throw std::out_of_range("no check named " + name);
}

void VerificationReport::append(const VerificationReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

void VerificationReport::attach_convergence(const VerificationReport& fine) {
  for (auto& c : checks) {
    const CheckResult* f = fine.find(c.name);
    if (!f || c.lower_bound()) continue;
    if (c.max_residual > kNoiseFloor && f->max_residual > kNoiseFloor)
      c.convergence_ratio = c.max_residual / f->max_residual;
  }
}

CheckResult upper_check(std::string name, double max_residual, double tolerance, int n_u, int n_v) {
  CheckResult c;
  c.name = std::move(name);
  c.max_residual = max_residual;
  c.tolerance = tolerance;
  c.n_u = n_u;
  c.n_v = n_v;
  c.pass = max_residual <= tolerance;
  return c;
}

CheckResult lower_check(std::string name, double min_value, double max_value, double tolerance, int n_u, int n_v) {
  CheckResult c;
  c.name = std::move(name);
  c.max_residual = max_value;
  c.min_residual = min_value;
  c.tolerance = tolerance;
  c.n_u = n_u;
  c.n_v = n_v;
  c.pass = min_value > tolerance;
  return c;
}

double scaled_tolerance(const std::string& name, double h) {
  const Scaled& s = scaled(name);
  return s.C * h * h + kRounding / std::pow(h, s.k);
}

double rounding_allowance(const std::string& name, double h) { return kRounding / std::pow(h, scaled(name).k); }

double grid_scale(const SurfacePatch& patch) { return std::max(patch.h_u(), patch.h_v()); }

namespace {

// Max of |field| over the nodes with the given margin.
double max_abs_interior(const Eigen::ArrayXXd& field, int margin) {
  const auto n_u = field.rows(), n_v = field.cols();
  return max_finite(field.block(margin, margin, n_u - 2 * margin, n_v - 2 * margin).abs());
}

void require_generated(const SurfacePatch& patch, const char* who) {
  if (!patch.tag || !patch.curve || patch.profile.size() != patch.u.size())
    throw PreconditionError(std::string(who) + ": needs a generated patch with its profile curve");
}

// +1 where f increases with u along the source curve, -1 where it decreases.
double orientation(const SurfacePatch& patch, int i) {
  const ProfileSample& p = patch.profile[std::size_t(i)];
  const ProfileCurve& curve = *patch.curve;
  double df;
  if (curve.kind == CurveKind::special) {
    const SpecialDerivative d = special_rhs({p.u, p.theta, p.a_or_g, curve.sign, p.icos, p.isin}, 0.0);
    df = d.g * std::cos(p.theta) - p.a_or_g * std::sin(p.theta) * d.theta;
  } else {
    df = generic_rhs({p.u, p.theta, p.a_or_g, p.f, p.icos, p.isin}, AmbientSpace(curve.c), 0.0).f;
  }
  return df >= 0.0 ? 1.0 : -1.0;
}

}  // namespace

VerificationReport metric_checks(const SurfaceGeometry& geo) {
  const SurfacePatch& patch = geo.patch();
  require_generated(patch, "metric_checks");
  const int nu = geo.n_u(), nv = geo.n_v();
  const double h = grid_scale(patch);
  double e = 0, f = 0, g = 0;
  for (int i = 1; i + 1 < nu; ++i) {
    const double beta2 = beta_squared(*patch.tag, patch.profile[std::size_t(i)]);
    for (int j = 1; j + 1 < nv; ++j) {
      e = std::max(e, std::abs(geo.E()(i, j) - 1.0));
      f = std::max(f, std::abs(geo.F()(i, j)));
      g = std::max(g, std::abs(geo.G()(i, j) - beta2));
    }
  }
  VerificationReport r;
  r.checks.push_back(upper_check("first_form_E", e, scaled_tolerance("first_form_E", h), nu, nv));
  r.checks.push_back(upper_check("first_form_F", f, scaled_tolerance("first_form_F", h), nu, nv));
  r.checks.push_back(upper_check("first_form_G", g, scaled_tolerance("first_form_G", h), nu, nv));
  return r;
}

VerificationReport lemma_checks(const SurfaceGeometry& geo) {
  const SurfacePatch& patch = geo.patch();
  require_generated(patch, "lemma_checks");
  const int nu = geo.n_u(), nv = geo.n_v();
  if (nu < 7 || nv < 7) throw PreconditionError("lemma_checks: need at least 7 nodes per direction");
  const double h = grid_scale(patch);
  const double c = patch.c;
  const ProfileCurve& curve = *patch.curve;

  const auto& th = geo.theta();
  const auto& l1 = geo.lambda1();
  const auto& l2 = geo.lambda2();
  Eigen::ArrayXXd a_rec = l2 / th.cos();

  double x1_theta = 0, x2_theta = 0, transport = 0, x2_lambda = 0, a_transport = 0;
  for (int i = 3; i + 3 < nu; ++i)
    for (int j = 3; j + 3 < nv; ++j) {
      const double t = th(i, j), s = std::sin(t), co = std::cos(t);
      x1_theta = std::max(x1_theta, std::abs(geo.x1_derivative(th, i, j) + l1(i, j)));
      x2_theta = std::max(x2_theta, std::abs(geo.x2_derivative(th, i, j)));
      transport = std::max(transport, std::abs(geo.x1_derivative(l2, i, j) +
                                               l2(i, j) * (l2(i, j) - l1(i, j)) * std::tan(t) + c * s * co));
      x2_lambda = std::max({x2_lambda, std::abs(geo.x2_derivative(l1, i, j)), std::abs(geo.x2_derivative(l2, i, j))});
      const double a = a_rec(i, j);
      a_transport = std::max(a_transport, std::abs(geo.x1_derivative(a_rec, i, j) + (a * a + c) * s));
    }

  double spread = 0, lambda2_err = 0, f_err = 0, theta_err = 0;
  for (int i = 2; i + 2 < nu; ++i) {
    const ProfileSample& p = patch.profile[std::size_t(i)];
    const double sigma = orientation(patch, i);
    // Reversing the direction of X1 maps (theta, a) to (pi - theta, -a).
    const double theta_ref = sigma > 0 ? p.theta : std::numbers::pi - p.theta;
    const double a_curve = curve.kind == CurveKind::special ? double(curve.sign) : p.a_or_g;
    const Eigen::ArrayXd row = th.row(i).segment(2, nv - 4).transpose();
    const double mean = row.mean();
    spread = std::max(spread, std::sqrt((row - mean).square().mean()));
    for (int j = 2; j + 2 < nv; ++j) {
      lambda2_err = std::max(lambda2_err, std::abs(l2(i, j) - a_curve * std::cos(p.theta)));
      f_err = std::max(f_err, std::abs(geo.f()(i, j) - p.f));
      theta_err = std::max(theta_err, std::abs(th(i, j) - theta_ref));
    }
  }

  double trace = 0, principal = 0;
  for (int i = 2; i + 2 < nu; ++i)
    for (int j = 2; j + 2 < nv; ++j) {
      trace = std::max(trace, std::abs(2.0 * geo.f()(i, j) - (l1(i, j) + l2(i, j))));
      const double scale = std::max({std::abs(l1(i, j)), std::abs(l2(i, j)), 1e-3});
      principal = std::max(principal, std::abs(geo.off_diag()(i, j)) / scale);
    }

  VerificationReport r;
  auto add = [&](const char* name, double value) { r.checks.push_back(upper_check(name, value, scaled_tolerance(name, h), nu, nv)); };
  add("x1_theta", x1_theta);
  add("x2_theta", x2_theta);
  r.checks.push_back(upper_check("theta_column_spread", spread, 1e-8, nu, nv));
  add("lambda2_transport", transport);
  add("x2_lambda", x2_lambda);
  add("lambda2_eq_a_cos", lambda2_err);
  add("a_transport", a_transport);
  add("f_recovery", f_err);
  add("theta_recovery", theta_err);
  r.checks.push_back(upper_check("trace_consistency", trace, 1e-10, nu, nv));
  r.checks.push_back(upper_check("principal_direction", principal, 1e-5, nu, nv));
  return r;
}

VerificationReport gauss_check(const SurfaceGeometry& geo) {
  const int nu = geo.n_u(), nv = geo.n_v();
  if (nu < 7 || nv < 7) throw PreconditionError("gauss_check: need at least 7 nodes per direction");
  const double h = grid_scale(geo.patch());
  const double hu = geo.patch().h_u();
  const auto& K = geo.K_gauss();
  double err = 0, dk_min = INFINITY, dk_max = 0;
  for (int i = 3; i + 3 < nu; ++i)
    for (int j = 3; j + 3 < nv; ++j) {
      err = std::max(err, std::abs(geo.K_intrinsic()(i, j) - K(i, j)));
      const double dk = std::abs((K(i + 1, j) - K(i - 1, j)) / (2.0 * hu));
      dk_min = std::min(dk_min, dk);
      dk_max = std::max(dk_max, dk);
    }
  VerificationReport r;
  r.checks.push_back(upper_check("gauss_equation", err, scaled_tolerance("gauss_equation", h), nu, nv));
  r.checks.push_back(lower_check("dK_du_min", dk_min, dk_max, 1e-3, nu, nv));
  return r;
}

double planarity(const std::vector<Vec4>& points) {
  if (points.size() < 4) throw PreconditionError("planarity: need at least 4 points");
  Eigen::MatrixXd d(Eigen::Index(points.size() - 1), 4);
  for (std::size_t k = 1; k < points.size(); ++k) d.row(Eigen::Index(k - 1)) = (points[k] - points[0]).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0.0;
  return s(2) / s(0);
}

double planarity_check(const SurfacePatch& patch, int j) {
  if (j < 0 || j >= patch.n_v()) throw PreconditionError("planarity_check: column out of range");
  std::vector<Vec4> pts;
  pts.reserve(patch.u.size());
  for (int i = 0; i < patch.n_u(); ++i) pts.push_back(patch.at(i, j));
  return planarity(pts);
}

double riccati_candidate(int c, double c0, double a, RiccatiFamily family) {
  (void)AmbientSpace(c);
  double den;
  double num;
  if (family == RiccatiFamily::general) {
    den = 2.0 * a * (a * a + c0);
    num = c0 * (a * a + c);
  } else if (c == 1) {
    den = c0 * std::pow(a, 4) + 1.0;
    num = a * (a * a + 1.0);
  } else {
    den = c0 * std::pow(a, 4) - 2.0 * a * a * (c0 - 1.0) + c0 - 1.0;
    num = a * a * a;
  }
  if (std::abs(den) < 1e-9) {
    std::ostringstream msg;
    msg << "riccati: candidate denominator vanishes at a = " << a;
    throw DomainError(msg.str());
  }
  return 0.5 * a + num / den;
}

std::pair<double, double> default_a_range(int c) { return {AmbientSpace(c).c() == 1 ? 0.5 : 1.1, 3.0}; }

VerificationReport riccati_nonexistence(int c, double c0, std::pair<double, double> a_range, int n,
                                        RiccatiFamily family) {
  if (n < 2) throw PreconditionError("riccati_nonexistence: need at least 2 samples");
  constexpr double kStep = 1e-5;
  double eq11 = 0, eq12_min = INFINITY, eq12_max = 0;
  for (const double a : uniform_grid(a_range.first, a_range.second, n)) {
    const double q = a * a + c;
    if (std::abs(q) < 1e-9) {
      std::ostringstream msg;
      msg << "riccati: a^2 + c vanishes at a = " << a;
      throw DomainError(msg.str());
    }
    const double g = riccati_candidate(c, c0, a, family);
    const double dg = (riccati_candidate(c, c0, a + kStep, family) - riccati_candidate(c, c0, a - kStep, family)) / (2.0 * kStep);
    const double r11 = 2.0 * a * q * dg - (8.0 * a * g * g - (10.0 * a * a + 6.0 * c) * g + 4.0 * a * q);
    const double r12 = q * (3.0 * g - a) * dg - (6.0 * g * g * g - 5.0 * a * g * g + q * g);
    eq11 = std::max(eq11, std::abs(r11));
    eq12_min = std::min(eq12_min, std::abs(r12));
    eq12_max = std::max(eq12_max, std::abs(r12));
  }
  const std::string tag = family == RiccatiFamily::published ? "[published]" : "[general]";
  VerificationReport r;
  r.checks.push_back(upper_check("constant_K_equation" + tag, eq11, 1e-8, n, 1));
  r.checks.push_back(lower_check("bicons_equation" + tag, eq12_min, eq12_max, 1e-3, n, 1));
  return r;
}

VerificationReport verify_patch(const SurfacePatch& patch, Parallelism par) {
  const SurfaceGeometry geo(patch, par);
  const int nu = geo.n_u(), nv = geo.n_v();
  VerificationReport r;

  double manifold = 0.0;
  bool sheet = false;
  for (const Vec4& p : patch.points) {
    const ManifoldResidual m = on_manifold_residual(patch.space(), p);
    manifold = std::max(manifold, m.residual);
    sheet = sheet || m.wrong_sheet;
  }
  CheckResult on = upper_check("on_manifold", manifold, 1e-8, nu, nv);
  on.pass = on.pass && !sheet;
  r.checks.push_back(on);

  const double h = grid_scale(patch);
  r.checks.push_back(upper_check("bicons_residual", max_abs_interior(geo.bicons(), 2),
                                 scaled_tolerance("bicons_residual", h), nu, nv));
  if (patch.tag && patch.curve && patch.profile.size() == patch.u.size()) {
    r.append(metric_checks(geo));
    r.append(lemma_checks(geo));
    r.append(gauss_check(geo));
  }
  return r;
}

}  // namespace bicons
