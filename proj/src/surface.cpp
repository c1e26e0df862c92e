#include "bicons/surface.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>

#include "bicons/errors.hpp"
#include "bicons/io.hpp"
#include "parallel.hpp"

namespace bicons {

namespace {

Vec4 lift(const Vec3& m, double x4) { return {m(0), m(1), m(2), x4}; }

void require_case(const ProfileCurve& curve, CaseTag tag) {
  const bool special = curve.kind == CurveKind::special;
  if (curve.c != tag.required_c())
    throw PreconditionError("synthesize: case " + tag.name() + " needs c = " + std::to_string(tag.required_c()));
  if (special != (tag.kind == CaseTag::Kind::hyp_special) || (special && curve.sign != tag.sign))
    throw PreconditionError("synthesize: curve " + curve.tag() + " does not match case " + tag.name());
  if (tag.kind == CaseTag::Kind::hyp_agt1 || tag.kind == CaseTag::Kind::hyp_alt1) {
    const bool above = tag.kind == CaseTag::Kind::hyp_agt1;
    for (const auto& s : curve.samples) {
      const double a2 = s.a_or_g * s.a_or_g;
      if (above ? !(a2 > 1.0) : !(a2 < 1.0)) {
        std::ostringstream msg;
        msg << "synthesize: a = " << s.a_or_g << " at u = " << s.u << " violates a^2 " << (above ? "> 1" : "< 1");
        throw PreconditionError(msg.str());
      }
    }
  }
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::system_error(errno, std::generic_category(), "write failed for " + path.string());
}

}  // namespace

CaseTag CaseTag::hyp_special(int s) {
  if (s != 1 && s != -1) throw PreconditionError("hyp_special: sign must be 1 or -1");
  return {Kind::hyp_special, s};
}

std::string CaseTag::name() const {
  switch (kind) {
    case Kind::sphere:
      return "sphere";
    case Kind::hyp_special:
      return sign > 0 ? "hyp_special+1" : "hyp_special-1";
    case Kind::hyp_agt1:
      return "hyp_agt1";
    case Kind::hyp_alt1:
      return "hyp_alt1";
  }
  return "unknown";
}

CaseTag CaseTag::parse(std::string_view name) {
  if (name == "sphere") return sphere();
  if (name == "hyp_special+1" || name == "hyp_special") return hyp_special(1);
  if (name == "hyp_special-1") return hyp_special(-1);
  if (name == "hyp_agt1") return hyp_agt1();
  if (name == "hyp_alt1") return hyp_alt1();
  throw UsageError("unknown case: " + std::string(name));
}

FrameVectors make_frame(CaseTag tag, const Vec3& c1, const Vec3& c2, const Vec3& c0) {
  FrameVectors f;
  f.tag = tag;
  f.c0 = c0;
  f.c1 = c1;
  f.c2 = c2;
  f.cross = tag.kind == CaseTag::Kind::sphere ? Vec3(c1.cross(c2)) : lorentz_cross(c1, c2);
  return f;
}

FrameVectors canonical_frame(CaseTag tag) {
  switch (tag.kind) {
    case CaseTag::Kind::sphere:
      return make_frame(tag, Vec3(1, 0, 0), Vec3(0, 1, 0));
    case CaseTag::Kind::hyp_agt1:
      return make_frame(tag, Vec3(0, 1, 0), Vec3(1, 0, 0));
    case CaseTag::Kind::hyp_alt1:
      return make_frame(tag, Vec3(0.5, 0, 0.5), Vec3(-0.5, 0, 0.5));
    case CaseTag::Kind::hyp_special:
      return make_frame(tag, Vec3(0, 1, 0), Vec3(-0.5, 0, 0.5), Vec3(0.5, 0, 0.5));
  }
  throw PreconditionError("canonical_frame: unknown case");
}

double frame_gram_residual(const FrameVectors& f) {
  double r = 0.0;
  auto want = [&r](double actual, double required) { r = std::max(r, std::abs(actual - required)); };
  const auto L = [](const Vec3& x, const Vec3& y) { return lorentz_inner(x, y); };
  switch (f.tag.kind) {
    case CaseTag::Kind::sphere:
      want(f.c1.dot(f.c1), 1.0);
      want(f.c2.dot(f.c2), 1.0);
      want(f.c1.dot(f.c2), 0.0);
      break;
    case CaseTag::Kind::hyp_agt1: {
      const Vec3 x = lorentz_cross(f.c1, f.c2);
      want(L(f.c1, f.c1), 1.0);
      want(L(f.c2, f.c2), 1.0);
      want(L(f.c1, f.c2), 0.0);
      want(L(x, x), -1.0);
      break;
    }
    case CaseTag::Kind::hyp_alt1: {
      const Vec3 x = lorentz_cross(f.c1, f.c2);
      want(L(f.c1, f.c1), 0.0);
      want(L(f.c2, f.c2), 0.0);
      want(L(f.c1, f.c2), -0.5);
      want(L(x, x), 0.25);
      break;
    }
    case CaseTag::Kind::hyp_special:
      want(L(f.c0, f.c0), 0.0);
      want(L(f.c2, f.c2), 0.0);
      want(L(f.c1, f.c1), 1.0);
      want(L(f.c0, f.c1), 0.0);
      want(L(f.c1, f.c2), 0.0);
      want(L(f.c0, f.c2), -0.5);
      break;
  }
  return r;
}

FrameVectors rotate_frame(const FrameVectors& f, double delta) {
  const double c = std::cos(delta), s = std::sin(delta);
  return make_frame(f.tag, c * f.c1 + s * f.c2, -s * f.c1 + c * f.c2, f.c0);
}

Vec4 evaluate(const FrameVectors& f, const ProfileSample& p, double v) {
  switch (f.tag.kind) {
    case CaseTag::Kind::sphere: {
      const double a = p.a_or_g;
      return lift((std::cos(v) * f.c1 + std::sin(v) * f.c2 + a * f.cross) / std::sqrt(a * a + 1.0), p.icos);
    }
    case CaseTag::Kind::hyp_agt1: {
      const double a = p.a_or_g;
      return lift((std::cos(v) * f.c1 + std::sin(v) * f.c2 + a * f.cross) / std::sqrt(a * a - 1.0), p.icos);
    }
    case CaseTag::Kind::hyp_alt1: {
      const double a = p.a_or_g;
      return lift((std::exp(v) * f.c1 + std::exp(-v) * f.c2 + 2.0 * a * f.cross) / std::sqrt(1.0 - a * a), p.icos);
    }
    case CaseTag::Kind::hyp_special: {
      const double e = std::exp(f.tag.sign * p.isin);
      return lift(e * (f.c0 + v * f.c1 + v * v * f.c2) + f.c2 / e, p.icos);
    }
  }
  throw PreconditionError("evaluate: unknown case");
}

double beta_squared(CaseTag tag, const ProfileSample& p) {
  const double a2 = p.a_or_g * p.a_or_g;
  switch (tag.kind) {
    case CaseTag::Kind::sphere:
      return 1.0 / (a2 + 1.0);
    case CaseTag::Kind::hyp_agt1:
    case CaseTag::Kind::hyp_alt1:
      return 1.0 / std::abs(a2 - 1.0);
    case CaseTag::Kind::hyp_special:
      return std::exp(2.0 * tag.sign * p.isin);
  }
  return 0.0;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 1) throw PreconditionError("uniform_grid: need at least one node");
  std::vector<double> g(std::size_t(n), lo);
  if (n == 1) return g;
  const double h = (hi - lo) / (n - 1);
  for (int k = 0; k < n; ++k) g[std::size_t(k)] = lo + k * h;
  g.back() = hi;
  return g;
}

std::pair<double, double> default_v_range(CaseTag) { return {-0.5 * kDefaultUMax, 0.5 * kDefaultUMax}; }

SurfacePatch synthesize(const ProfileCurve& curve, const FrameVectors& frame, std::pair<double, double> v_range,
                        int n_v, int n_u, Parallelism par) {
  if (curve.samples.empty()) throw PreconditionError("synthesize: empty curve");
  if (n_u < 1 || n_v < 1) throw PreconditionError("synthesize: n_u and n_v must be positive");
  if (n_u > 1 && curve.size() < 2) throw PreconditionError("synthesize: curve has a single sample");
  require_case(curve, frame.tag);

  SurfacePatch patch;
  patch.tag = frame.tag;
  patch.c = curve.c;
  patch.u = uniform_grid(curve.samples.front().u, curve.samples.back().u, n_u);
  patch.v = uniform_grid(v_range.first, v_range.second, n_v);
  patch.profile = resample(curve, patch.u);
  patch.curve = curve;
  patch.points.resize(std::size_t(n_u) * std::size_t(n_v));
  detail::parallel_for(n_u, par.threads, [&](int i) {
    for (int j = 0; j < n_v; ++j) patch.at(i, j) = evaluate(frame, patch.profile[std::size_t(i)], patch.v[std::size_t(j)]);
  });
  check_on_manifold(patch);
  return patch;
}

SurfacePatch refine(const SurfacePatch& patch, int n_u, int n_v, Parallelism par) {
  if (!patch.curve || !patch.tag) throw PreconditionError("refine: patch has no embedded curve");
  if (n_u < 2 || n_v < 2) throw PreconditionError("refine: need at least two nodes per direction");
  const ProfileCurve& src = *patch.curve;
  const ProfileSample& s0 = src.samples.front();
  const double lo = patch.u.front(), hi = patch.u.back();
  Tolerances tol = src.tolerances;
  tol.landing_step = (hi - lo) / (n_u - 1);

  ProfileCurve curve;
  if (src.kind == CurveKind::special)
    curve = integrate(SpecialState{s0.u, s0.theta, s0.a_or_g, src.sign, s0.icos, s0.isin}, hi, tol);
  else
    curve = integrate(ProfileState{s0.u, s0.theta, s0.a_or_g, s0.f, s0.icos, s0.isin}, hi, src.space(), tol);
  if (curve.samples.back().u < hi - 1e-12) curve = src;

  SurfacePatch fine = synthesize(curve, canonical_frame(*patch.tag), {patch.v.front(), patch.v.back()}, n_v, n_u, par);
  if (fine.u.front() != lo || fine.u.back() != hi) {
    // Stored curve extends past the patch: resample on the patch interval only.
    fine.u = uniform_grid(lo, hi, n_u);
    fine.profile = resample(curve, fine.u);
    const FrameVectors frame = canonical_frame(*patch.tag);
    detail::parallel_for(n_u, par.threads, [&](int i) {
      for (int j = 0; j < n_v; ++j) fine.at(i, j) = evaluate(frame, fine.profile[std::size_t(i)], fine.v[std::size_t(j)]);
    });
    check_on_manifold(fine);
  }
  return fine;
}

SurfacePatch sample_map(int c, const std::vector<double>& u, const std::vector<double>& v,
                        const std::function<Vec4(double, double)>& map) {
  SurfacePatch patch;
  patch.c = AmbientSpace(c).c();
  patch.u = u;
  patch.v = v;
  patch.points.reserve(u.size() * v.size());
  for (const double x : u)
    for (const double y : v) patch.points.push_back(map(x, y));
  return patch;
}

void check_on_manifold(const SurfacePatch& patch, double tolerance) {
  const AmbientSpace space = patch.space();
  double worst = -1.0;
  int wi = -1, wj = -1;
  bool sheet = false;
  for (int i = 0; i < patch.n_u(); ++i)
    for (int j = 0; j < patch.n_v(); ++j) {
      const ManifoldResidual r = on_manifold_residual(space, patch.at(i, j));
      const double score = r.wrong_sheet ? INFINITY : (std::isfinite(r.residual) ? r.residual : INFINITY);
      if (score > worst) {
        worst = score;
        wi = i;
        wj = j;
        sheet = r.wrong_sheet;
      }
    }
  if (worst > tolerance) {
    std::ostringstream msg;
    msg << "synthesize: node (" << wi << ", " << wj << ") off the manifold";
    if (sheet) msg << " (x3 <= 0)";
    else msg << " (residual " << worst << ")";
    throw SynthesisError(msg.str());
  }
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::csv;
  if (name == "json") return ExportFormat::json;
  if (name == "obj") return ExportFormat::obj;
  throw UsageError("unknown export format: " + std::string(name));
}

void export_patch(const SurfacePatch& patch, ExportFormat format, const std::filesystem::path& path, double kappa) {
  std::ofstream out = open_out(path);
  switch (format) {
    case ExportFormat::csv:
      out << "i,j,u,v,x1,x2,x3,x4\n";
      for (int i = 0; i < patch.n_u(); ++i)
        for (int j = 0; j < patch.n_v(); ++j) {
          const Vec4& p = patch.at(i, j);
          out << i << ',' << j << ',' << fmt17(patch.u[i]) << ',' << fmt17(patch.v[j]) << ',' << fmt17(p(0)) << ','
              << fmt17(p(1)) << ',' << fmt17(p(2)) << ',' << fmt17(p(3)) << '\n';
        }
      break;
    case ExportFormat::json:
      out << dump(to_json(patch));
      break;
    case ExportFormat::obj: {
      out << "# bicons patch\n";
      out << "# case " << (patch.tag ? patch.tag->name() : std::string("custom")) << "\n";
      out << "# c " << patch.c << "\n";
      if (patch.c == 1)
        out << "# kappa " << fmt17(kappa) << " (vertex = (1 + kappa x4) (x1, x2, x3))\n";
      else
        out << "# vertex = (x1, x2, x4)\n";
      for (const Vec4& p : patch.points) {
        Vec3 q;
        if (patch.c == 1)
          q = (1.0 + kappa * p(3)) * p.head<3>();
        else
          q = Vec3(p(0), p(1), p(3));
        out << "v " << fmt17(q(0)) << ' ' << fmt17(q(1)) << ' ' << fmt17(q(2)) << '\n';
      }
      const int nv = patch.n_v();
      for (int i = 0; i + 1 < patch.n_u(); ++i)
        for (int j = 0; j + 1 < nv; ++j) {
          const int a = i * nv + j + 1;
          out << "f " << a << ' ' << a + nv << ' ' << a + nv + 1 << ' ' << a + 1 << '\n';
        }
      break;
    }
  }
  finish(out, path);
}

}  // namespace bicons
