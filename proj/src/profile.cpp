#include "bicons/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bicons/errors.hpp"

namespace bicons {

namespace {

constexpr std::array<std::pair<StopReason, std::string_view>, 6> kStopNames{{
    {StopReason::reached_u_max, "reached_u_max"},
    {StopReason::singular_denominator, "singular_denominator"},
    {StopReason::sin_vanish, "sin_vanish"},
    {StopReason::cos_vanish, "cos_vanish"},
    {StopReason::f_nonpositive, "f_nonpositive"},
    {StopReason::step_underflow, "step_underflow"},
}};

using GenericVector = Eigen::Matrix<double, 5, 1>;
using SpecialVector = Eigen::Matrix<double, 4, 1>;

GenericVector pack(const ProfileState& s) { return {s.theta, s.a, s.f, s.icos, s.isin}; }
ProfileState unpack(const GenericVector& y, double u) { return {u, y(0), y(1), y(2), y(3), y(4)}; }

SpecialVector pack(const SpecialState& s) { return {s.theta, s.g, s.icos, s.isin}; }
SpecialState unpack(const SpecialVector& y, double u, int sign) { return {u, y(0), y(1), sign, y(2), y(3)}; }

std::string describe(StopReason reason) {
  switch (reason) {
    case StopReason::f_nonpositive:
      return "f must be positive";
    case StopReason::sin_vanish:
      return "sin(theta) must be nonzero";
    case StopReason::cos_vanish:
      return "cos(theta) must be nonzero";
    case StopReason::singular_denominator:
      return "ODE denominator vanishes";
    default:
      return std::string(to_string(reason));
  }
}

template <int N, typename Rhs>
Eigen::Matrix<double, N, 1> rk4_step(const Eigen::Matrix<double, N, 1>& y, double h, Rhs&& rhs) {
  const Eigen::Matrix<double, N, 1> k1 = rhs(y);
  const Eigen::Matrix<double, N, 1> k2 = rhs((y + 0.5 * h * k1).eval());
  const Eigen::Matrix<double, N, 1> k3 = rhs((y + 0.5 * h * k2).eval());
  const Eigen::Matrix<double, N, 1> k4 = rhs((y + h * k3).eval());
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct RunResult {
  std::vector<double> u;
  std::vector<double> steps;
  StopReason stop = StopReason::reached_u_max;
};

// Step-doubling RK4. `dir` is +1 or -1; states are appended to `ys`.
template <int N, typename Rhs, typename Check>
RunResult run(const Eigen::Matrix<double, N, 1>& y0, double u0, double u_end, int dir, const Tolerances& tol,
              std::vector<Eigen::Matrix<double, N, 1>>& ys, Rhs&& rhs, Check&& check) {
  using Vec = Eigen::Matrix<double, N, 1>;
  RunResult out;
  out.u.push_back(u0);
  ys.push_back(y0);
  if (!(dir * (u_end - u0) > 0.0)) return out;

  const double landing = tol.landing_step;
  long next_node = 1;
  auto node_target = [&]() {
    if (landing <= 0.0) return u_end;
    const double node = u0 + dir * double(next_node) * landing;
    if (dir * (u_end - node) < 1e-9 * landing) return u_end;
    return node;
  };

  double u = u0;
  Vec y = y0;
  double h = std::min(tol.initial_step, tol.max_step);
  while (true) {
    if (u == u_end) {
      out.stop = StopReason::reached_u_max;
      return out;
    }
    if (out.steps.size() >= tol.max_steps) {
      out.stop = StopReason::step_underflow;
      return out;
    }
    const double target = node_target();
    const double remaining = dir * (target - u);
    double h_try = std::min({h, tol.max_step, remaining});
    // Never leave a sliver behind: stretch the step by up to 0.1% instead.
    if (remaining - h_try < 1e-3 * h_try) h_try = remaining;
    const bool lands = h_try == remaining;

    Vec full, half2;
    try {
      full = rk4_step<N>(y, dir * h_try, rhs);
      const Vec half1 = rk4_step<N>(y, dir * 0.5 * h_try, rhs);
      half2 = rk4_step<N>(half1, dir * 0.5 * h_try, rhs);
    } catch (const SingularDenominator&) {
      h = 0.25 * h_try;
      if (h < tol.min_step) {
        out.stop = StopReason::singular_denominator;
        return out;
      }
      continue;
    }

    const Vec err = (half2 - full) / 15.0;
    double ratio = 0.0;
    for (int i = 0; i < N; ++i) {
      const double scale = tol.abs + tol.rel * std::max(std::abs(y(i)), std::abs(half2(i)));
      ratio = std::max(ratio, std::abs(err(i)) / scale);
    }
    if (!std::isfinite(ratio)) ratio = 1e10;

    if (ratio > 1.0) {
      h = h_try * std::max(0.1, 0.9 * std::pow(ratio, -0.2));
      if (h < tol.min_step) {
        out.stop = StopReason::step_underflow;
        return out;
      }
      continue;
    }

    const Vec y_new = half2 + err;
    const double u_new = lands ? target : u + dir * h_try;
    if (const auto reason = check(y_new, u_new)) {
      out.stop = *reason;
      return out;
    }
    y = y_new;
    u = u_new;
    ys.push_back(y);
    out.u.push_back(u);
    out.steps.push_back(h_try);
    if (lands && target != u_end) ++next_node;

    const double grow = ratio > 0.0 ? std::min(4.0, 0.9 * std::pow(ratio, -0.2)) : 4.0;
    const double proposal = h_try * grow;
    // A step shortened only to land on a node says nothing about the controller's step.
    h = (h_try < h) ? std::max(h, proposal) : proposal;
    h = std::min(h, tol.max_step);
  }
}

double generic_fprime(const ProfileState& s, int c) {
  const double den = s.a * std::cos(s.theta) - 3.0 * s.f;
  return c * s.f * std::sin(s.theta) * std::cos(s.theta) / den;
}

void validate_initial(const ProfileState& s, const AmbientSpace& space, const Tolerances& tol) {
  if (const auto reason = check_state(s, tol))
    throw PreconditionError("integrate: invalid initial state: " + describe(*reason));
  if (!(generic_fprime(s, space.c()) > 0.0))
    throw PreconditionError("integrate: f'(u0) must be positive (|grad f| = f' > 0)");
}

void validate_initial(const SpecialState& s, const Tolerances& tol) {
  if (s.sign != 1 && s.sign != -1) throw PreconditionError("integrate: sign must be 1 or -1");
  if (const auto reason = check_state(s, tol))
    throw PreconditionError("integrate: invalid initial state: " + describe(*reason));
}

ProfileCurve generic_curve(const RunResult& r, const std::vector<GenericVector>& ys, int c, const Tolerances& tol) {
  ProfileCurve curve;
  curve.kind = CurveKind::generic;
  curve.c = c;
  curve.tolerances = tol;
  curve.stop_reason = r.stop;
  curve.steps = r.steps;
  curve.samples.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const auto& y = ys[i];
    curve.samples.push_back({r.u[i], y(0), y(1), y(2), y(3), y(4)});
  }
  return curve;
}

ProfileCurve special_curve(const RunResult& r, const std::vector<SpecialVector>& ys, int sign, const Tolerances& tol) {
  ProfileCurve curve;
  curve.kind = CurveKind::special;
  curve.c = -1;
  curve.sign = sign;
  curve.tolerances = tol;
  curve.stop_reason = r.stop;
  curve.steps = r.steps;
  curve.samples.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const auto& y = ys[i];
    curve.samples.push_back({r.u[i], y(0), y(1), y(1) * std::cos(y(0)), y(2), y(3)});
  }
  return curve;
}

template <typename Vec>
void reverse_run(RunResult& r, std::vector<Vec>& ys) {
  std::reverse(r.u.begin(), r.u.end());
  std::reverse(r.steps.begin(), r.steps.end());
  std::reverse(ys.begin(), ys.end());
}

ProfileCurve integrate_generic(const ProfileState& initial, double u_end, int dir, const AmbientSpace& space,
                               const Tolerances& tol) {
  validate_initial(initial, space, tol);
  std::vector<GenericVector> ys;
  auto rhs = [&](const GenericVector& y) {
    const ProfileDerivative d = generic_rhs(unpack(y, 0.0), space, tol.denominator_stop);
    return GenericVector(d.theta, d.a, d.f, d.icos, d.isin);
  };
  auto check = [&](const GenericVector& y, double u) { return check_state(unpack(y, u), tol); };
  RunResult r = run<5>(pack(initial), initial.u, u_end, dir, tol, ys, rhs, check);
  if (dir < 0) reverse_run(r, ys);
  return generic_curve(r, ys, space.c(), tol);
}

ProfileCurve integrate_special(const SpecialState& initial, double u_end, int dir, const Tolerances& tol) {
  validate_initial(initial, tol);
  const int sign = initial.sign;
  std::vector<SpecialVector> ys;
  auto rhs = [&](const SpecialVector& y) {
    const SpecialDerivative d = special_rhs(unpack(y, 0.0, sign), tol.denominator_stop);
    return SpecialVector(d.theta, d.g, d.icos, d.isin);
  };
  auto check = [&](const SpecialVector& y, double u) { return check_state(unpack(y, u, sign), tol); };
  RunResult r = run<4>(pack(initial), initial.u, u_end, dir, tol, ys, rhs, check);
  if (dir < 0) reverse_run(r, ys);
  return special_curve(r, ys, sign, tol);
}

// 3-point derivative on a nonuniform grid, at the middle point.
double derivative3(double um, double u0, double up, double ym, double y0, double yp) {
  const double h1 = u0 - um;
  const double h2 = up - u0;
  return -h2 / (h1 * (h1 + h2)) * ym + (h2 - h1) / (h1 * h2) * y0 + h1 / (h2 * (h1 + h2)) * yp;
}

std::vector<double> differentiate(const std::vector<double>& u, const std::vector<double>& y) {
  std::vector<double> d(u.size(), 0.0);
  for (std::size_t i = 1; i + 1 < u.size(); ++i)
    d[i] = derivative3(u[i - 1], u[i], u[i + 1], y[i - 1], y[i], y[i + 1]);
  return d;
}

const double kSqrt23 = std::sqrt(23.0);
// cos(pi/2) evaluates to 6e-17, not 0.
constexpr double kCosFloor = 1e-15;

double closed_form_dg(double g, int s) {
  const double q = 6.0 * g * g - 5.0 * s * g + 2.0;
  const double t = 12.0 * g - 5.0;
  return 1.0 / g + (12.0 * g - 5.0 * s) / (2.0 * q) - s * 60.0 / (23.0 + t * t);
}

double branch_dg(double g, int s) { return 38.0 / (25.0 * g) + 72.0 / (25.0 * (6.0 * g - 5.0 * s)) - 2.0 * s / (5.0 * g * g); }

}  // namespace

std::string_view to_string(StopReason reason) {
  for (const auto& [r, name] : kStopNames)
    if (r == reason) return name;
  return "unknown";
}

StopReason parse_stop_reason(std::string_view name) {
  for (const auto& [r, n] : kStopNames)
    if (n == name) return r;
  throw PreconditionError("unknown stop reason: " + std::string(name));
}

double SpecialState::f() const { return g * std::cos(theta); }

double ProfileCurve::a(std::size_t i) const { return kind == CurveKind::special ? double(sign) : samples.at(i).a_or_g; }

std::string ProfileCurve::tag() const {
  if (kind == CurveKind::special) return sign > 0 ? "special+1" : "special-1";
  return c > 0 ? "generic+1" : "generic-1";
}

ProfileDerivative generic_rhs(const ProfileState& s, const AmbientSpace& space, double denominator_tolerance) {
  const double sn = std::sin(s.theta);
  const double cs = std::cos(s.theta);
  const double den = s.a * cs - 3.0 * s.f;
  if (!(std::abs(den) > denominator_tolerance)) throw SingularDenominator("a cos(theta) - 3f vanishes", den);
  const double c = space.c();
  return {s.a * cs - 2.0 * s.f, -(s.a * s.a + c) * sn, c * s.f * sn * cs / den, cs, sn};
}

SpecialDerivative special_rhs(const SpecialState& s, double denominator_tolerance) {
  if (s.sign != 1 && s.sign != -1) throw PreconditionError("special_rhs: sign must be 1 or -1");
  const double sg = s.sign;
  const double sn = std::sin(s.theta);
  const double cs = std::cos(s.theta);
  const double den = sg - 3.0 * s.g;
  // |s - 3g| = |1 - 3sg| for s = +-1.
  if (!(std::abs(den) > denominator_tolerance)) throw SingularDenominator("1 - 3sg vanishes", 1.0 - 3.0 * sg * s.g);
  return {(sg - 2.0 * s.g) * cs, s.g * s.g * (6.0 * s.g - 5.0 * sg) * sn / den, cs, sn};
}

std::optional<StopReason> check_state(const ProfileState& s, const Tolerances& tol) {
  if (!std::isfinite(s.theta) || !std::isfinite(s.a) || !std::isfinite(s.f)) return StopReason::singular_denominator;
  if (!(s.f > tol.f_stop)) return StopReason::f_nonpositive;
  if (!(std::abs(std::sin(s.theta)) > tol.sin_stop)) return StopReason::sin_vanish;
  if (!(std::abs(std::cos(s.theta)) > tol.cos_stop)) return StopReason::cos_vanish;
  if (!(std::abs(s.a * std::cos(s.theta) - 3.0 * s.f) > tol.denominator_stop)) return StopReason::singular_denominator;
  return std::nullopt;
}

std::optional<StopReason> check_state(const SpecialState& s, const Tolerances& tol) {
  if (!std::isfinite(s.theta) || !std::isfinite(s.g)) return StopReason::singular_denominator;
  if (!(s.f() > tol.f_stop)) return StopReason::f_nonpositive;
  if (!(std::abs(std::sin(s.theta)) > tol.sin_stop)) return StopReason::sin_vanish;
  if (!(std::abs(std::cos(s.theta)) > tol.cos_stop)) return StopReason::cos_vanish;
  if (!(std::abs(1.0 - 3.0 * s.sign * s.g) > tol.denominator_stop)) return StopReason::singular_denominator;
  return std::nullopt;
}

ProfileCurve integrate(const ProfileState& initial, double u_max, const AmbientSpace& space, const Tolerances& tol) {
  if (!(u_max > initial.u)) throw PreconditionError("integrate: u_max must exceed the initial u");
  return integrate_generic(initial, u_max, +1, space, tol);
}

ProfileCurve integrate(const SpecialState& initial, double u_max, const Tolerances& tol) {
  if (!(u_max > initial.u)) throw PreconditionError("integrate: u_max must exceed the initial u");
  return integrate_special(initial, u_max, +1, tol);
}

ProfileCurve integrate_backward(const ProfileState& initial, double u_min, const AmbientSpace& space,
                                const Tolerances& tol) {
  if (!(u_min < initial.u)) throw PreconditionError("integrate_backward: u_min must be below the initial u");
  return integrate_generic(initial, u_min, -1, space, tol);
}

ProfileCurve integrate_backward(const SpecialState& initial, double u_min, const Tolerances& tol) {
  if (!(u_min < initial.u)) throw PreconditionError("integrate_backward: u_min must be below the initial u");
  return integrate_special(initial, u_min, -1, tol);
}

std::vector<double> ode_residual(const ProfileCurve& curve) {
  const std::size_t n = curve.size();
  if (n < 5) throw PreconditionError("ode_residual: need at least 5 samples, got " + std::to_string(n));
  std::vector<double> u(n), theta(n), f(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = curve.samples[i].u;
    theta[i] = curve.samples[i].theta;
    f[i] = curve.samples[i].f;
  }
  const double c = curve.c;
  std::vector<double> out;
  out.reserve(n - 4);

  if (curve.kind == CurveKind::special) {
    // s cos = 3f + c (f / f') sin cos, multiplied through by f'.
    const double s = curve.sign;
    const std::vector<double> df = differentiate(u, f);
    for (std::size_t k = 2; k + 2 < n; ++k) {
      const double sn = std::sin(theta[k]);
      const double cs = std::cos(theta[k]);
      out.push_back(std::abs(df[k] * (s * cs - 3.0 * f[k]) - c * f[k] * sn * cs));
    }
    return out;
  }

  // w w' + (a^2 + c) Q' with w = theta' - a cos and Q = (theta'^2 - a^2 cos^2) / (a^2 + c).
  const std::vector<double> dtheta = differentiate(u, theta);
  std::vector<double> w(n, 0.0), q(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = curve.samples[i].a_or_g;
    const double ac = a * std::cos(theta[i]);
    w[i] = dtheta[i] - ac;
    q[i] = (dtheta[i] * dtheta[i] - ac * ac) / (a * a + c);
  }
  for (std::size_t k = 2; k + 2 < n; ++k) {
    const double dw = derivative3(u[k - 1], u[k], u[k + 1], w[k - 1], w[k], w[k + 1]);
    const double dq = derivative3(u[k - 1], u[k], u[k + 1], q[k - 1], q[k], q[k + 1]);
    const double a = curve.samples[k].a_or_g;
    out.push_back(std::abs(w[k] * dw + (a * a + c) * dq));
  }
  return out;
}

double first_integral(double theta, double g, int sign) {
  if (sign != 1 && sign != -1) throw PreconditionError("first_integral: sign must be 1 or -1");
  const double cs = std::cos(theta);
  if (std::abs(cs) <= kCosFloor) throw DomainError("first_integral: cos(theta) = 0");
  if (g == 0.0) throw DomainError("first_integral: g = 0");
  const double q = g * g * (6.0 * g * g - 5.0 * sign * g + 2.0);
  return std::log(cs * cs) + 0.5 * std::log(q) - sign * (5.0 * kSqrt23 / 23.0) * std::atan((12.0 * g - 5.0) / kSqrt23);
}

double branch_invariant(double theta, double g, int sign) {
  if (sign != 1 && sign != -1) throw PreconditionError("branch_invariant: sign must be 1 or -1");
  const double cs = std::cos(theta);
  if (std::abs(cs) <= kCosFloor) throw DomainError("branch_invariant: cos(theta) = 0");
  if (g == 0.0) throw DomainError("branch_invariant: g = 0");
  const double r = 6.0 * g - 5.0 * sign;
  if (r == 0.0) throw DomainError("branch_invariant: 6g - 5s = 0");
  return std::log(cs * cs) + 1.52 * std::log(std::abs(g)) + 0.48 * std::log(std::abs(r)) + 2.0 * sign / (5.0 * g);
}

double invariant_drift(const ProfileCurve& curve, SpecialIntegral which) {
  if (curve.kind != CurveKind::special) throw PreconditionError("invariant_drift: not a special-branch curve");
  if (curve.samples.empty()) throw PreconditionError("invariant_drift: empty curve");
  const auto F = [&](const ProfileSample& p) {
    return which == SpecialIntegral::closed_form ? first_integral(p.theta, p.a_or_g, curve.sign)
                                                 : branch_invariant(p.theta, p.a_or_g, curve.sign);
  };
  const double f0 = F(curve.samples.front());
  double drift = 0.0;
  for (const auto& p : curve.samples) drift = std::max(drift, std::abs(F(p) - f0));
  return drift;
}

double solve_g(double theta, double target, int sign, std::pair<double, double> bracket, SpecialIntegral which) {
  auto value = [&](double g) {
    return (which == SpecialIntegral::closed_form ? first_integral(theta, g, sign) : branch_invariant(theta, g, sign)) -
           target;
  };
  auto slope = [&](double g) { return which == SpecialIntegral::closed_form ? closed_form_dg(g, sign) : branch_dg(g, sign); };

  double lo = std::min(bracket.first, bracket.second);
  double hi = std::max(bracket.first, bracket.second);
  double f_lo = value(lo);
  double f_hi = value(hi);
  constexpr double kTol = 1e-10;
  if (std::abs(f_lo) <= kTol) return lo;
  if (std::abs(f_hi) <= kTol) return hi;
  if ((f_lo > 0) == (f_hi > 0)) {
    std::ostringstream msg;
    msg << "solve_g: no sign change on [" << lo << ", " << hi << "]";
    throw BracketingError(msg.str());
  }

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = value(x);
    if (std::abs(fx) <= kTol) return x;
    if ((fx > 0) == (f_lo > 0)) {
      lo = x;
      f_lo = fx;
    } else {
      hi = x;
    }
    const double dfx = slope(x);
    double next = (dfx != 0.0 && std::isfinite(dfx)) ? x - fx / dfx : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  const double fx = value(x);
  if (std::abs(fx) <= kTol) return x;
  throw ConvergenceError("solve_g: residual " + std::to_string(fx) + " after 200 iterations");
}

std::vector<ProfileSample> resample(const ProfileCurve& curve, const std::vector<double>& u) {
  const auto& s = curve.samples;
  if (s.empty()) throw PreconditionError("resample: empty curve");
  const AmbientSpace space(curve.c);
  const double slack = 1e-12 * std::max(1.0, std::abs(s.back().u));

  auto slopes = [&](const ProfileSample& p) -> std::array<double, 5> {
    if (curve.kind == CurveKind::special) {
      const SpecialDerivative d = special_rhs({p.u, p.theta, p.a_or_g, curve.sign, p.icos, p.isin}, 0.0);
      return {d.theta, d.g, 0.0, d.icos, d.isin};
    }
    const ProfileDerivative d = generic_rhs({p.u, p.theta, p.a_or_g, p.f, p.icos, p.isin}, space, 0.0);
    return {d.theta, d.a, d.f, d.icos, d.isin};
  };
  auto values = [](const ProfileSample& p) -> std::array<double, 5> { return {p.theta, p.a_or_g, p.f, p.icos, p.isin}; };

  std::vector<ProfileSample> out;
  out.reserve(u.size());
  for (const double x : u) {
    if (x < s.front().u - slack || x > s.back().u + slack)
      throw PreconditionError("resample: u = " + std::to_string(x) + " outside the sampled range");
    if (s.size() == 1) {
      out.push_back(s.front());
      out.back().u = x;
      continue;
    }
    auto it = std::upper_bound(s.begin(), s.end(), x, [](double v, const ProfileSample& p) { return v < p.u; });
    std::size_t k = std::size_t(std::clamp<std::ptrdiff_t>(it - s.begin() - 1, 0, std::ptrdiff_t(s.size()) - 2));
    const ProfileSample& p0 = s[k];
    const ProfileSample& p1 = s[k + 1];
    const double h = p1.u - p0.u;
    const double t = (x - p0.u) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    const auto y0 = values(p0), y1 = values(p1), d0 = slopes(p0), d1 = slopes(p1);
    std::array<double, 5> y{};
    for (int i = 0; i < 5; ++i) y[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
    ProfileSample p{x, y[0], y[1], y[2], y[3], y[4]};
    if (curve.kind == CurveKind::special) p.f = p.a_or_g * std::cos(p.theta);
    out.push_back(p);
  }
  return out;
}

}  // namespace bicons
