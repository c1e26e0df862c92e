#pragma once

// Profile curves: the ODE systems for (theta, a, f) along the integral curves of
// grad f / |grad f|, and the a = +-1 branch of H^2 x R written in (theta, g) with
// f = g cos(theta).

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bicons/ambient.hpp"

namespace bicons {

enum class StopReason { reached_u_max, singular_denominator, sin_vanish, cos_vanish, f_nonpositive, step_underflow };

std::string_view to_string(StopReason reason);
StopReason parse_stop_reason(std::string_view name);

struct ProfileState {
  double u = 0.0;
  double theta = 0.0;
  double a = 0.0;
  double f = 0.0;
  double icos = 0.0;
  double isin = 0.0;
};

struct ProfileDerivative {
  double theta, a, f, icos, isin;
};

struct SpecialState {
  double u = 0.0;
  double theta = 0.0;
  double g = 0.0;
  int sign = 1;
  double icos = 0.0;
  double isin = 0.0;

  double f() const;
};

struct SpecialDerivative {
  double theta, g, icos, isin;
};

struct Tolerances {
  double rel = 1e-10;
  double abs = 1e-12;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  double max_step = 2e-2;
  // When positive, steps are clipped so that every u0 + k * landing_step is a sample.
  double landing_step = 0.0;
  double sin_stop = 1e-4;
  double cos_stop = 1e-4;
  double f_stop = 1e-6;
  double denominator_stop = 1e-6;
  std::size_t max_steps = 2000000;
};

enum class CurveKind { generic, special };

/// One accepted sample. `a_or_g` holds a on the generic branch and g on the special one.
struct ProfileSample {
  double u, theta, a_or_g, f, icos, isin;
};

struct ProfileCurve {
  CurveKind kind = CurveKind::generic;
  int c = 1;
  int sign = 0;  // special branch only
  std::vector<ProfileSample> samples;
  std::vector<double> steps;
  StopReason stop_reason = StopReason::reached_u_max;
  Tolerances tolerances;

  std::size_t size() const { return samples.size(); }
  AmbientSpace space() const { return AmbientSpace(c); }
  /// The eigenvalue ratio a at sample i (the constant sign on the special branch).
  double a(std::size_t i) const;
  /// "generic+1", "generic-1", "special+1" or "special-1".
  std::string tag() const;
};

/// theta' = a cos - 2f, a' = -(a^2+c) sin, f' = c f sin cos / (a cos - 3f).
ProfileDerivative generic_rhs(const ProfileState& state, const AmbientSpace& space,
                              double denominator_tolerance = 1e-6);

/// theta' = (s - 2g) cos, g' = g^2 (6g - 5s) sin / (s - 3g).
SpecialDerivative special_rhs(const SpecialState& state, double denominator_tolerance = 1e-6);

/// First reason the state is outside the validity region, if any.
std::optional<StopReason> check_state(const ProfileState& state, const Tolerances& tol);
std::optional<StopReason> check_state(const SpecialState& state, const Tolerances& tol);

/// Adaptive RK4 with step doubling from state.u up to u_max.
///
/// Throws PreconditionError when the initial state is invalid, or (generic branch) when
/// f'(u0) <= 0. A stop event ends the curve at the last valid sample.
ProfileCurve integrate(const ProfileState& initial, double u_max, const AmbientSpace& space,
                       const Tolerances& tol = {});
ProfileCurve integrate(const SpecialState& initial, double u_max, const Tolerances& tol = {});

/// Same systems integrated towards decreasing u, down to u_min. Samples are returned in
/// increasing u and end at the initial state, so the result concatenates with a
/// forward curve started from the same state.
ProfileCurve integrate_backward(const ProfileState& initial, double u_min, const AmbientSpace& space,
                                const Tolerances& tol = {});
ProfileCurve integrate_backward(const SpecialState& initial, double u_min, const Tolerances& tol = {});

/// Second-order biconservative equation evaluated on the samples, with the outer
/// derivatives taken by 3-point differences. Entry k belongs to sample k + 2; the two
/// samples at each end are dropped. Needs at least 5 samples.
std::vector<double> ode_residual(const ProfileCurve& curve);

/// ln cos^2 + ln sqrt(g^2 (6g^2 - 5sg + 2)) - s (5 sqrt23 / 23) atan((12g - 5) / sqrt23).
double first_integral(double theta, double g, int sign);

/// Conserved quantity of special_rhs:
/// ln cos^2 + (38/25) ln|g| + (12/25) ln|6g - 5s| + 2s / (5g).
double branch_invariant(double theta, double g, int sign);

enum class SpecialIntegral { closed_form, branch };

/// max |F(sample) - F(first sample)| along a special-branch curve.
double invariant_drift(const ProfileCurve& curve, SpecialIntegral which);

/// Root of F(theta, g) = target in g on the bracket, F being first_integral or
/// branch_invariant. Bisection with Newton refinement; |F - target| <= 1e-10.
double solve_g(double theta, double target, int sign, std::pair<double, double> bracket,
               SpecialIntegral which = SpecialIntegral::closed_form);

/// Piecewise cubic Hermite interpolation of the ODE state at the given u values, using
/// the right-hand side at the bracketing samples as slopes. `u` must lie in the sampled range.
std::vector<ProfileSample> resample(const ProfileCurve& curve, const std::vector<double>& u);

}  // namespace bicons
