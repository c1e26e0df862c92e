#pragma once

// Ambient algebra for M^2(c) x R viewed inside R^4 (c = +1) or L^3 x R (c = -1).
//
// Points and tangent vectors are plain Eigen 4-vectors (x1, x2, x3, x4) where x4 is
// the coordinate of the R factor. The only metric datum is the sign c: for c = -1 the
// x3 term of every inner product is negated.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "bicons/errors.hpp"

namespace bicons {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;

using Vec3 = Vector3<double>;
using Vec4 = Vector4<double>;

class AmbientSpace {
 public:
  explicit AmbientSpace(int c) : c_(c) {
    if (c != 1 && c != -1) throw std::invalid_argument("c must be 1 or -1");
  }

  static AmbientSpace sphere_product() { return AmbientSpace(1); }
  static AmbientSpace hyperbolic_product() { return AmbientSpace(-1); }

  int c() const { return c_; }
  bool lorentzian() const { return c_ == -1; }

  friend bool operator==(const AmbientSpace&, const AmbientSpace&) = default;

 private:
  int c_;
};

/// Unit vector tangent to the R factor.
template <typename Scalar = double>
Vector4<Scalar> vertical() {
  return Vector4<Scalar>(0, 0, 0, 1);
}

/// Induced 4-metric: sum x_i y_i with the x3 term multiplied by c.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar inner(const AmbientSpace& space, const Eigen::MatrixBase<DerivedX>& x,
                                const Eigen::MatrixBase<DerivedY>& y) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedX, 4);
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedY, 4);
  using Scalar = typename DerivedX::Scalar;
  return x(0) * y(0) + x(1) * y(1) + Scalar(space.c()) * x(2) * y(2) + x(3) * y(3);
}

/// Lorentz-Minkowski product dx1^2 + dx2^2 - dx3^2 on the M^2(-1) factor.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar lorentz_inner(const Eigen::MatrixBase<DerivedX>& x,
                                        const Eigen::MatrixBase<DerivedY>& y) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedX, 3);
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedY, 3);
  return x(0) * y(0) + x(1) * y(1) - x(2) * y(2);
}

/// Lorentzian cross product. Orthogonal to both factors in lorentz_inner, and
/// <X*Y, X*Y> = -<X,X><Y,Y> + <X,Y>^2.
template <typename DerivedX, typename DerivedY>
Vector3<typename DerivedX::Scalar> lorentz_cross(const Eigen::MatrixBase<DerivedX>& x,
                                                 const Eigen::MatrixBase<DerivedY>& y) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedX, 3);
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(DerivedY, 3);
  return {x(1) * y(2) - x(2) * y(1), x(2) * y(0) - x(0) * y(2), x(1) * y(0) - x(0) * y(1)};
}

/// Curvature tensor of the product, R(X,Y)Z, with xi the fixed 4th axis.
///
/// The six terms are grouped by the vector they multiply so that R(X,Y)xi cancels
/// exactly in floating point.
template <typename DX, typename DY, typename DZ>
Vector4<typename DX::Scalar> curvature_apply(const AmbientSpace& space, const Eigen::MatrixBase<DX>& x,
                                             const Eigen::MatrixBase<DY>& y,
                                             const Eigen::MatrixBase<DZ>& z) {
  using Scalar = typename DX::Scalar;
  const Vector4<Scalar> xi = vertical<Scalar>();
  const Scalar yz = inner(space, y, z);
  const Scalar xz = inner(space, x, z);
  const Scalar x_xi = inner(space, x, xi);
  const Scalar y_xi = inner(space, y, xi);
  const Scalar z_xi = inner(space, z, xi);
  const Scalar cx = yz - y_xi * z_xi;
  const Scalar cy = xz - x_xi * z_xi;
  const Scalar cxi = xz * y_xi - yz * x_xi;
  return Scalar(space.c()) * (cx * x - cy * y + cxi * xi);
}

/// sum_i (R(e_i, eta) e_i)^T over an orthonormal tangent frame (e_1, e_2).
///
/// Throws PreconditionError when the frame is not orthonormal, or eta is not a unit
/// vector orthogonal to it, to within `tolerance`.
template <typename Scalar>
Vector4<Scalar> tangential_curvature_trace(const AmbientSpace& space, const Vector4<Scalar>& eta,
                                           const Vector4<Scalar>& e1, const Vector4<Scalar>& e2,
                                           Scalar tolerance = Scalar(1e-9)) {
  using std::abs;
  const Scalar frame_residual =
      std::max({abs(inner(space, e1, e1) - 1), abs(inner(space, e2, e2) - 1), abs(inner(space, e1, e2))});
  if (frame_residual > tolerance)
    throw PreconditionError("tangential_curvature_trace: frame not orthonormal (residual " +
                            std::to_string(double(frame_residual)) + ")");
  const Scalar normal_residual =
      std::max({abs(inner(space, eta, eta) - 1), abs(inner(space, eta, e1)), abs(inner(space, eta, e2))});
  if (normal_residual > tolerance)
    throw PreconditionError("tangential_curvature_trace: eta not a unit normal (residual " +
                            std::to_string(double(normal_residual)) + ")");

  const Vector4<Scalar> trace = curvature_apply(space, e1, eta, e1) + curvature_apply(space, e2, eta, e2);
  return inner(space, trace, e1) * e1 + inner(space, trace, e2) * e2;
}

struct ManifoldResidual {
  double residual;
  /// c = -1 only: the point lies on the x3 <= 0 sheet, which is not part of the model.
  bool wrong_sheet;

  bool within(double tolerance) const { return !wrong_sheet && residual <= tolerance; }
};

/// |x1^2 + x2^2 + c x3^2 - c| for a point of M^2(c) x R.
template <typename Derived>
ManifoldResidual on_manifold_residual(const AmbientSpace& space, const Eigen::MatrixBase<Derived>& p) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 4);
  const double c = space.c();
  const double value = std::abs(double(p(0) * p(0) + p(1) * p(1)) + c * double(p(2) * p(2)) - c);
  return {value, space.lorentzian() && !(double(p(2)) > 0.0)};
}

}  // namespace bicons
