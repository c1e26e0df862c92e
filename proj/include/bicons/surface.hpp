#pragma once

// Explicit parametrizations Phi(u, v) over a profile curve, and patch export.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bicons/ambient.hpp"
#include "bicons/profile.hpp"

namespace bicons {

struct CaseTag {
  enum class Kind { sphere, hyp_special, hyp_agt1, hyp_alt1 };
  Kind kind = Kind::sphere;
  int sign = 0;  // hyp_special only

  static CaseTag sphere() { return {Kind::sphere, 0}; }
  static CaseTag hyp_special(int s);
  static CaseTag hyp_agt1() { return {Kind::hyp_agt1, 0}; }
  static CaseTag hyp_alt1() { return {Kind::hyp_alt1, 0}; }

  int required_c() const { return kind == Kind::sphere ? 1 : -1; }
  bool periodic() const { return kind == Kind::sphere || kind == Kind::hyp_agt1; }
  /// "sphere", "hyp_special+1", "hyp_special-1", "hyp_agt1" or "hyp_alt1".
  std::string name() const;
  static CaseTag parse(std::string_view name);

  friend bool operator==(const CaseTag&, const CaseTag&) = default;
};

/// Constant vectors of the parametrization. `c0` is only used by hyp_special; `cross`
/// caches C1 x C2 (sphere) or C1 (x) C2 (Lorentzian).
struct FrameVectors {
  CaseTag tag;
  Vec3 c0 = Vec3::Zero();
  Vec3 c1 = Vec3::Zero();
  Vec3 c2 = Vec3::Zero();
  Vec3 cross = Vec3::Zero();
};

FrameVectors make_frame(CaseTag tag, const Vec3& c1, const Vec3& c2, const Vec3& c0 = Vec3::Zero());
FrameVectors canonical_frame(CaseTag tag);

/// Max deviation from the Gram relations the case requires.
double frame_gram_residual(const FrameVectors& frame);

/// Rotates (C1, C2) by delta in their plane. Shifting v by delta on sphere and hyp_agt1
/// patches is the same as rotating the frame.
FrameVectors rotate_frame(const FrameVectors& frame, double delta);

/// Phi at one profile sample and one v. `sample.a_or_g` is a for generic cases.
Vec4 evaluate(const FrameVectors& frame, const ProfileSample& sample, double v);

/// Squared length of Phi_v for unit-speed u: 1/(a^2+1), 1/|a^2-1| or e^{2 s Isin}.
double beta_squared(CaseTag tag, const ProfileSample& sample);

struct Parallelism {
  int threads = 1;
};

struct SurfacePatch {
  std::optional<CaseTag> tag;  // empty for patches built from an analytic map
  int c = 1;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<Vec4> points;              // row-major, index i * n_v() + j
  std::vector<ProfileSample> profile;    // state at each u node (generated patches only)
  std::optional<ProfileCurve> curve;

  int n_u() const { return int(u.size()); }
  int n_v() const { return int(v.size()); }
  double h_u() const { return n_u() > 1 ? (u.back() - u.front()) / (n_u() - 1) : 0.0; }
  double h_v() const { return n_v() > 1 ? (v.back() - v.front()) / (n_v() - 1) : 0.0; }
  AmbientSpace space() const { return AmbientSpace(c); }
  const Vec4& at(int i, int j) const { return points[std::size_t(i) * v.size() + std::size_t(j)]; }
  Vec4& at(int i, int j) { return points[std::size_t(i) * v.size() + std::size_t(j)]; }
};

std::vector<double> uniform_grid(double lo, double hi, int n);

/// Demonstration domain: u in [0, 0.15], v window as long as the u interval, 64 x 64
/// nodes. Keeps h_u = h_v and the C h^2 tolerances meaningful at that resolution.
inline constexpr double kDefaultUMax = 0.15;
inline constexpr int kDefaultNodes = 64;
std::pair<double, double> default_v_range(CaseTag tag);

/// Same surface on a finer grid: re-integrates the embedded curve with nodes landing on
/// the new u grid (falls back to interpolating the stored curve if the re-run stops
/// short) and resynthesizes with the canonical frame. Needs a generated patch.
SurfacePatch refine(const SurfacePatch& patch, int n_u, int n_v, Parallelism par = {});

/// Samples the parametrization on n_u uniform u-nodes spanning the curve and n_v uniform
/// v-nodes. Throws PreconditionError on a case mismatch and SynthesisError when a node
/// leaves the product manifold by more than 1e-8.
SurfacePatch synthesize(const ProfileCurve& curve, const FrameVectors& frame, std::pair<double, double> v_range,
                        int n_v, int n_u, Parallelism par = {});

/// Patch of an analytic map, used for known examples.
SurfacePatch sample_map(int c, const std::vector<double>& u, const std::vector<double>& v,
                        const std::function<Vec4(double, double)>& map);

/// Throws SynthesisError naming the worst node if any node is off the manifold.
void check_on_manifold(const SurfacePatch& patch, double tolerance = 1e-8);

enum class ExportFormat { csv, json, obj };

ExportFormat parse_export_format(std::string_view name);

void export_patch(const SurfacePatch& patch, ExportFormat format, const std::filesystem::path& path,
                  double kappa = 0.2);

}  // namespace bicons
