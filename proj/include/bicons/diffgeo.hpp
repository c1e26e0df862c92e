#pragma once

// Finite-difference geometry of a SurfacePatch, computed from node positions only, and
// the identity checks run against it.
//
// All derivatives are second-order central differences on the (u, v) grid. Quantities
// built from first derivatives of Phi live on nodes at distance >= 1 from the border,
// anything that also differentiates f or lambda at distance >= 2, and so on.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bicons/ambient.hpp"
#include "bicons/surface.hpp"

namespace bicons {

struct PointGeometry {
  double f = 0.0;
  double grad_f_norm = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double off_diag = 0.0;
  double theta_est = 0.0;
  double K = 0.0;  // intrinsic; NaN within three nodes of the border
};

/// Node-wise geometry of a whole patch.
class SurfaceGeometry {
 public:
  /// Throws PreconditionError if the patch has fewer than 5 nodes in either direction
  /// and DomainError if the metric degenerates (det I < 1e-12) at some node.
  explicit SurfaceGeometry(const SurfacePatch& patch, Parallelism par = {});

  const SurfacePatch& patch() const { return patch_; }
  int n_u() const { return patch_.n_u(); }
  int n_v() const { return patch_.n_v(); }

  /// Interior node at distance >= 2 from the border. Throws PreconditionError otherwise.
  PointGeometry point(int i, int j) const;

  // Margin 1.
  const Eigen::ArrayXXd& f() const { return f_; }
  const Eigen::ArrayXXd& E() const { return E_; }
  const Eigen::ArrayXXd& F() const { return F_; }
  const Eigen::ArrayXXd& G() const { return G_; }
  // Margin 2.
  const Eigen::ArrayXXd& lambda1() const { return lambda1_; }
  const Eigen::ArrayXXd& lambda2() const { return lambda2_; }
  const Eigen::ArrayXXd& off_diag() const { return off_; }
  const Eigen::ArrayXXd& theta() const { return theta_; }
  const Eigen::ArrayXXd& grad_f_norm() const { return grad_norm_; }
  const Eigen::ArrayXXd& bicons() const { return bicons_; }
  /// lambda1 lambda2 + c sin^2 theta.
  const Eigen::ArrayXXd& K_gauss() const { return K_gauss_; }
  // Margin 3.
  const Eigen::ArrayXXd& K_intrinsic() const { return K_intr_; }

  /// Derivative along X1 = grad f / |grad f| (or along X2) of a field known on the
  /// nodes with margin 2. Valid with margin 3.
  double x1_derivative(const Eigen::ArrayXXd& field, int i, int j) const;
  double x2_derivative(const Eigen::ArrayXXd& field, int i, int j) const;

 private:
  SurfacePatch patch_;
  Eigen::ArrayXXd f_, E_, F_, G_, sin_;
  Eigen::ArrayXXd lambda1_, lambda2_, off_, theta_, grad_norm_, bicons_, K_gauss_, K_intr_;
  Eigen::ArrayXXd x1u_, x1v_, x2u_, x2v_;
};

PointGeometry point_geometry(const SurfacePatch& patch, int i, int j);

/// Node values on the interior, as an (n_u - 2m) x (n_v - 2m) block.
struct InteriorField {
  int margin = 0;
  Eigen::ArrayXXd values;
  double max_abs() const;
};

/// Norm of A(grad f) + f grad f + f trace(R(., eta).)^T at every node with margin 2.
InteriorField bicons_residual(const SurfacePatch& patch, Parallelism par = {});

struct CheckResult {
  std::string name;
  double max_residual = 0.0;
  std::optional<double> min_residual;  // set for lower-bound checks
  int n_u = 0;
  int n_v = 0;
  double tolerance = 0.0;
  bool pass = false;
  std::optional<double> convergence_ratio;

  bool lower_bound() const { return min_residual.has_value(); }
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool all_pass() const;
  /// Throws std::out_of_range for an unknown name.
  const CheckResult& at(const std::string& name) const;
  const CheckResult* find(const std::string& name) const;
  void append(const VerificationReport& other);
  /// Adds max_residual(this) / max_residual(fine) to every check present in both whose
  /// residuals sit above the rounding floor.
  void attach_convergence(const VerificationReport& fine);
};

CheckResult upper_check(std::string name, double max_residual, double tolerance, int n_u, int n_v);
CheckResult lower_check(std::string name, double min_value, double max_value, double tolerance, int n_u, int n_v);

/// Grid scale used in the C h^2 tolerances: max(h_u, h_v).
double grid_scale(const SurfacePatch& patch);

/// Tolerance of a differenced check, C h^2 + 1000 eps / h^k with k the number of
/// differentiations behind it. Throws std::logic_error for a check without a constant.
double scaled_tolerance(const std::string& name, double h);
/// The 1000 eps / h^k part alone: residuals below it are rounding, not truncation.
double rounding_allowance(const std::string& name, double h);

/// First fundamental form against E = 1, F = 0, G = beta^2. Needs a generated patch.
VerificationReport metric_checks(const SurfaceGeometry& geo);

/// Identities along the profile: X1(theta) = -lambda1, X2(theta) = 0, the lambda2
/// transport equation, X2(lambda1) = X2(lambda2) = 0, lambda2 = a cos(theta),
/// X1(a) + (a^2 + c) sin(theta) = 0, and agreement of f, theta with the source curve.
VerificationReport lemma_checks(const SurfaceGeometry& geo);

/// |K_intrinsic - (lambda1 lambda2 + c sin^2 theta)| and min |dK/du| over the nodes
/// three or more steps from the border.
VerificationReport gauss_check(const SurfaceGeometry& geo);

/// Relative third singular value of {Phi(u_i, v_j) - Phi(u_0, v_j)}.
double planarity_check(const SurfacePatch& patch, int j);
double planarity(const std::vector<Vec4>& points);

enum class RiccatiFamily { published, general };

/// Candidate g(a) of the constant-curvature equation. `published` uses the closed forms
/// as printed, `general` uses g = a/2 + c0 (a^2 + c) / (2a (a^2 + c0)).
double riccati_candidate(int c, double c0, double a, RiccatiFamily family);

/// Entries: the constant-curvature equation residual of the candidate (upper bound),
/// and the biconservative equation residual (lower bound, min over samples).
VerificationReport riccati_nonexistence(int c, double c0, std::pair<double, double> a_range, int n,
                                        RiccatiFamily family = RiccatiFamily::published);

/// Sweep window for the non-existence check: [0.5, 3] for c = 1 and [1.1, 3] for c = -1,
/// clear of a^2 + c = 0, the candidate poles, and the 1/a growth near a = 0.
std::pair<double, double> default_a_range(int c);

/// Every check that applies to the patch (all of the above for generated patches).
VerificationReport verify_patch(const SurfacePatch& patch, Parallelism par = {});

}  // namespace bicons
