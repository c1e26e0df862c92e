#include "bicons/io.hpp"

#include <cerrno>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "bicons/errors.hpp"

namespace bicons {

namespace {

double number(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

std::pair<CurveKind, int> parse_curve_tag(const std::string& tag, int& c) {
  if (tag == "generic+1") return {CurveKind::generic, (c = 1, 0)};
  if (tag == "generic-1") return {CurveKind::generic, (c = -1, 0)};
  if (tag == "special+1") return {CurveKind::special, (c = -1, 1)};
  if (tag == "special-1") return {CurveKind::special, (c = -1, -1)};
  throw PreconditionError("unknown curve case: " + tag);
}

}  // namespace

Json to_json(const Tolerances& t) {
  return Json{{"rel", t.rel},
              {"abs", t.abs},
              {"initial_step", t.initial_step},
              {"min_step", t.min_step},
              {"max_step", t.max_step},
              {"landing_step", t.landing_step},
              {"sin_stop", t.sin_stop},
              {"cos_stop", t.cos_stop},
              {"f_stop", t.f_stop},
              {"denominator_stop", t.denominator_stop},
              {"max_steps", t.max_steps}};
}

Tolerances tolerances_from_json(const Json& j) {
  Tolerances t;
  t.rel = j.at("rel").get<double>();
  t.abs = j.at("abs").get<double>();
  t.initial_step = j.at("initial_step").get<double>();
  t.min_step = j.at("min_step").get<double>();
  t.max_step = j.at("max_step").get<double>();
  t.landing_step = j.at("landing_step").get<double>();
  t.sin_stop = j.at("sin_stop").get<double>();
  t.cos_stop = j.at("cos_stop").get<double>();
  t.f_stop = j.at("f_stop").get<double>();
  t.denominator_stop = j.at("denominator_stop").get<double>();
  t.max_steps = j.at("max_steps").get<std::size_t>();
  return t;
}

Json to_json(const ProfileCurve& curve) {
  Json samples = Json::array();
  for (const auto& s : curve.samples)
    samples.push_back(Json{{"u", s.u}, {"theta", s.theta}, {"a_or_g", s.a_or_g}, {"f", s.f}, {"Icos", s.icos}, {"Isin", s.isin}});
  return Json{{"case", curve.tag()},
              {"c", curve.c},
              {"samples", std::move(samples)},
              {"stop_reason", std::string(to_string(curve.stop_reason))},
              {"tolerances", to_json(curve.tolerances)}};
}

ProfileCurve curve_from_json(const Json& j) {
  ProfileCurve curve;
  int c = 1;
  const auto [kind, sign] = parse_curve_tag(j.at("case").get<std::string>(), c);
  curve.kind = kind;
  curve.sign = sign;
  curve.c = j.at("c").get<int>();
  if (curve.c != c) throw PreconditionError("curve case and c disagree");
  for (const auto& s : j.at("samples"))
    curve.samples.push_back({s.at("u").get<double>(), s.at("theta").get<double>(), s.at("a_or_g").get<double>(),
                             s.at("f").get<double>(), s.at("Icos").get<double>(), s.at("Isin").get<double>()});
  for (std::size_t i = 1; i < curve.samples.size(); ++i) curve.steps.push_back(curve.samples[i].u - curve.samples[i - 1].u);
  curve.stop_reason = parse_stop_reason(j.at("stop_reason").get<std::string>());
  curve.tolerances = tolerances_from_json(j.at("tolerances"));
  return curve;
}

Json to_json(const SurfacePatch& patch) {
  Json points = Json::array();
  for (int i = 0; i < patch.n_u(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < patch.n_v(); ++j) {
      const Vec4& p = patch.at(i, j);
      row.push_back(Json::array({p(0), p(1), p(2), p(3)}));
    }
    points.push_back(std::move(row));
  }
  return Json{{"case", patch.tag ? patch.tag->name() : std::string("custom")},
              {"c", patch.c},
              {"u", patch.u},
              {"v", patch.v},
              {"points", std::move(points)},
              {"curve", patch.curve ? to_json(*patch.curve) : Json()}};
}

SurfacePatch patch_from_json(const Json& j) {
  SurfacePatch patch;
  const std::string name = j.at("case").get<std::string>();
  if (name != "custom") patch.tag = CaseTag::parse(name);
  patch.c = AmbientSpace(j.at("c").get<int>()).c();
  if (patch.tag && patch.tag->required_c() != patch.c) throw PreconditionError("case " + name + " is incompatible with c");
  patch.u = j.at("u").get<std::vector<double>>();
  patch.v = j.at("v").get<std::vector<double>>();
  const Json& points = j.at("points");
  if (points.size() != patch.u.size()) throw PreconditionError("points: expected one row per u value");
  for (const auto& row : points) {
    if (row.size() != patch.v.size()) throw PreconditionError("points: expected one entry per v value");
    for (const auto& p : row) {
      if (p.size() != 4) throw PreconditionError("points: expected 4 coordinates");
      patch.points.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>(), p[3].get<double>());
    }
  }
  if (j.contains("curve") && !j.at("curve").is_null()) {
    patch.curve = curve_from_json(j.at("curve"));
    patch.profile = resample(*patch.curve, patch.u);
  }
  return patch;
}

Json to_json(const VerificationReport& report) {
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json e;
    e["name"] = c.name;
    e["max_residual"] = c.max_residual;
    if (c.min_residual) e["min_residual"] = *c.min_residual;
    e["grid"] = Json::array({c.n_u, c.n_v});
    e["tolerance"] = c.tolerance;
    e["pass"] = c.pass;
    if (c.convergence_ratio) e["convergence_ratio"] = *c.convergence_ratio;
    checks.push_back(std::move(e));
  }
  return Json{{"checks", std::move(checks)}};
}

VerificationReport report_from_json(const Json& j) {
  VerificationReport r;
  for (const auto& e : j.at("checks")) {
    CheckResult c;
    c.name = e.at("name").get<std::string>();
    c.max_residual = number(e.at("max_residual"));
    if (e.contains("min_residual")) c.min_residual = number(e.at("min_residual"));
    c.n_u = e.at("grid").at(0).get<int>();
    c.n_v = e.at("grid").at(1).get<int>();
    c.tolerance = e.at("tolerance").get<double>();
    c.pass = e.at("pass").get<bool>();
    if (e.contains("convergence_ratio")) c.convergence_ratio = number(e.at("convergence_ratio"));
    r.checks.push_back(std::move(c));
  }
  return r;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Json::parse(buffer.str());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  out << text;
  out.flush();
  if (!out) throw std::system_error(errno, std::generic_category(), "write failed for " + path.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace bicons
