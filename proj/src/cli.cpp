#include "bicons/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <system_error>

#include <CLI11.hpp>

#include "bicons/diffgeo.hpp"
#include "bicons/errors.hpp"
#include "bicons/io.hpp"
#include "bicons/profile.hpp"
#include "bicons/surface.hpp"

namespace bicons::cli {

namespace {

// Flags that take no value; `key = true` in a config file turns them on.
const std::set<std::string> kSwitches = {"planarity", "no-refine"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

bool given(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Splices config entries in after the subcommand name unless the flag is already on the
// command line, so explicit flags win.
std::vector<std::string> with_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw UsageError("--config needs a path");
      path = args[k + 1];
      args.erase(args.begin() + long(k), args.begin() + long(k) + 2);
      break;
    }
    if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
      args.erase(args.begin() + long(k));
      break;
    }
  }
  if (!path) return args;
  std::vector<std::string> extra;
  for (const auto& [key, value] : read_config(*path)) {
    if (given(args, key)) continue;
    if (kSwitches.count(key)) {
      if (value == "true" || value == "1") extra.push_back("--" + key);
      else if (value != "false" && value != "0") throw UsageError("config: " + key + " expects true or false");
      continue;
    }
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  const auto at = args.empty() ? args.end() : args.begin() + 1;
  args.insert(at, extra.begin(), extra.end());
  return args;
}

int check_c(int c) {
  if (c != 1 && c != -1) throw UsageError("c must be 1 or -1");
  return c;
}

Parallelism threads(int n) {
  if (n < 1) throw UsageError("--threads must be at least 1");
  return {n};
}

void print_report(const VerificationReport& r, std::ostream& out) {
  for (const auto& c : r.checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << "  "
        << (c.lower_bound() ? "min " + fmt(*c.min_residual) + " > " : fmt(c.max_residual) + " <= ") << fmt(c.tolerance);
    if (c.convergence_ratio) out << "  ratio " << fmt(*c.convergence_ratio);
    out << "\n";
  }
  const auto failed = std::count_if(r.checks.begin(), r.checks.end(), [](const CheckResult& c) { return !c.pass; });
  if (failed == 0) out << "all " << r.checks.size() << " checks pass\n";
  else out << failed << " of " << r.checks.size() << " checks failed\n";
}

struct GenerateOptions {
  int c = 1;
  std::string case_name;
  std::optional<double> theta0, a0, f0, g0;
  double u0 = 0.0;
  double umax = kDefaultUMax;
  std::optional<double> vmin, vmax;
  int nu = kDefaultNodes;
  int nv = kDefaultNodes;
  double rtol = Tolerances{}.rel;
  double atol = Tolerances{}.abs;
  double max_step = Tolerances{}.max_step;
  std::string out;
  std::string format = "json";
  double kappa = 0.2;
  int threads = 1;
};

void add_generate_flags(CLI::App* sub, GenerateOptions& o) {
  sub->add_option("--c", o.c, "Curvature of the factor surface, 1 or -1");
  sub->add_option("--case", o.case_name, "sphere, hyp_agt1, hyp_alt1, hyp_special+1 or hyp_special-1");
  sub->add_option("--theta0", o.theta0, "Initial angle");
  sub->add_option("--a0", o.a0, "Initial a (generic cases)");
  sub->add_option("--f0", o.f0, "Initial mean curvature (generic cases)");
  sub->add_option("--g0", o.g0, "Initial g = f / cos(theta) (hyp_special)");
  sub->add_option("--u0", o.u0, "Initial arclength");
  sub->add_option("--umax", o.umax, "End of the u interval");
  sub->add_option("--vmin", o.vmin, "Start of the v window");
  sub->add_option("--vmax", o.vmax, "End of the v window");
  sub->add_option("--nu", o.nu, "Nodes along u");
  sub->add_option("--nv", o.nv, "Nodes along v");
  sub->add_option("--rtol", o.rtol, "Relative ODE tolerance");
  sub->add_option("--atol", o.atol, "Absolute ODE tolerance");
  sub->add_option("--max-step", o.max_step, "Largest ODE step");
  sub->add_option("--format", o.format, "json, csv or obj");
  sub->add_option("--kappa", o.kappa, "Projection scale of the x4 axis in OBJ output");
  sub->add_option("--threads", o.threads, "Worker threads for grid evaluation");
}

CaseTag resolve_case(GenerateOptions& o, bool c_given) {
  CaseTag tag;
  if (o.case_name.empty()) {
    check_c(o.c);
    tag = o.c == 1 ? CaseTag::sphere() : CaseTag::hyp_agt1();
  } else {
    tag = CaseTag::parse(o.case_name);
    if (!c_given) o.c = tag.required_c();
    check_c(o.c);
    if (tag.required_c() != o.c) throw UsageError("case " + tag.name() + " requires c = " + std::to_string(tag.required_c()));
  }
  return tag;
}

// Integrates and synthesizes. Node count along u fixes the landing grid so the patch
// nodes are integrator nodes.
SurfacePatch build_patch(const GenerateOptions& o, CaseTag tag) {
  if (o.nu < 2 || o.nv < 2) throw UsageError("--nu and --nv must be at least 2");
  if (!(o.umax > o.u0)) throw UsageError("--umax must exceed --u0");
  Tolerances tol;
  tol.rel = o.rtol;
  tol.abs = o.atol;
  tol.max_step = o.max_step;
  tol.landing_step = (o.umax - o.u0) / (o.nu - 1);

  ProfileCurve curve;
  if (tag.kind == CaseTag::Kind::hyp_special) {
    if (o.a0 || o.f0) throw UsageError("hyp_special takes --theta0 and --g0");
    curve = integrate(SpecialState{o.u0, o.theta0.value_or(0.6), o.g0.value_or(0.25), tag.sign}, o.umax, tol);
  } else {
    if (o.g0) throw UsageError("--g0 applies to hyp_special only");
    double a = 1.2, f = 0.1;
    if (tag.kind == CaseTag::Kind::hyp_agt1) a = 2.0, f = 0.6;
    if (tag.kind == CaseTag::Kind::hyp_alt1) a = 0.5, f = 0.2;
    curve = integrate(ProfileState{o.u0, o.theta0.value_or(0.8), o.a0.value_or(a), o.f0.value_or(f)}, o.umax,
                      AmbientSpace(o.c), tol);
  }
  const auto [v_lo, v_hi] = default_v_range(tag);
  return synthesize(curve, canonical_frame(tag), {o.vmin.value_or(v_lo), o.vmax.value_or(v_hi)}, o.nv, o.nu,
                    threads(o.threads));
}

void write_patch(const SurfacePatch& patch, const GenerateOptions& o) {
  const ExportFormat format = parse_export_format(o.format);
  if (format == ExportFormat::json) write_text_file(o.out, dump(to_json(patch)));
  else export_patch(patch, format, o.out, o.kappa);
}

std::string describe(const SurfacePatch& patch) {
  std::string s = std::to_string(patch.n_u()) + " x " + std::to_string(patch.n_v()) + ", case " + patch.tag->name();
  s += ", u in [" + fmt(patch.u.front()) + ", " + fmt(patch.u.back()) + "]";
  s += ", integration " + std::string(to_string(patch.curve->stop_reason));
  return s;
}

int do_generate(GenerateOptions& o, bool c_given, std::ostream& out) {
  const CaseTag tag = resolve_case(o, c_given);
  const SurfacePatch patch = build_patch(o, tag);
  write_patch(patch, o);
  out << "wrote " << o.out << " (" << describe(patch) << ")\n";
  return kOk;
}

CheckResult planarity_entry(const SurfacePatch& patch) {
  double worst = 0.0;
  for (int j = 0; j < patch.n_v(); ++j) worst = std::max(worst, planarity_check(patch, j));
  return upper_check("planarity", worst, 1e-8, patch.n_u(), patch.n_v());
}

VerificationReport full_report(const SurfacePatch& patch, bool refine_grid, bool planarity, Parallelism par) {
  VerificationReport report = verify_patch(patch, par);
  if (refine_grid && patch.curve && patch.tag) {
    const SurfacePatch fine = refine(patch, 2 * patch.n_u(), 2 * patch.n_v(), par);
    report.attach_convergence(verify_patch(fine, par));
  }
  if (planarity) report.checks.push_back(planarity_entry(patch));
  return report;
}

int finish_report(const VerificationReport& report, const std::string& path, std::ostream& out) {
  if (!path.empty()) write_text_file(path, dump(to_json(report)));
  print_report(report, out);
  return report.all_pass() ? kOk : kFailed;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw UsageError(path + ":" + std::to_string(number) + ": expected key = value");
    entries.emplace_back(key, value);
  }
  return entries;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Biconservative surfaces in S^2xR and H^2xR: generation and finite-difference verification", "bicons"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Integrate a profile curve and write the surface patch");
  add_generate_flags(generate, gen);
  generate->add_option("--out", gen.out, "Output file")->required();

  std::string in_path, report_path;
  bool no_refine = false, planarity = false;
  int verify_threads = 1;
  auto* verify = app.add_subcommand("verify", "Finite-difference checks of a JSON patch");
  verify->add_option("--in", in_path, "Patch written by generate")->required();
  verify->add_option("--report", report_path, "Report file (JSON)");
  verify->add_flag("--no-refine", no_refine, "Skip the refined grid used for convergence ratios");
  verify->add_flag("--planarity", planarity, "Also test that every u-curve spans a plane");
  verify->add_option("--threads", verify_threads, "Worker threads");

  GenerateOptions sp;
  sp.case_name = "hyp_special";
  int sign = 1;
  std::string sp_report;
  auto* special = app.add_subcommand("special", "Branch a = +-1 in H^2xR: integrate, drift report, synthesize");
  special->add_option("--sign", sign, "Branch sign s");
  special->add_option("--theta0", sp.theta0, "Initial angle");
  special->add_option("--g0", sp.g0, "Initial g");
  special->add_option("--u0", sp.u0, "Initial arclength");
  special->add_option("--umax", sp.umax, "End of the u interval");
  special->add_option("--vmin", sp.vmin, "Start of the v window");
  special->add_option("--vmax", sp.vmax, "End of the v window");
  special->add_option("--nu", sp.nu, "Nodes along u");
  special->add_option("--nv", sp.nv, "Nodes along v");
  special->add_option("--rtol", sp.rtol, "Relative ODE tolerance");
  special->add_option("--atol", sp.atol, "Absolute ODE tolerance");
  special->add_option("--out", sp.out, "Patch output file");
  special->add_option("--format", sp.format, "json, csv or obj");
  special->add_option("--report", sp_report, "Drift report file (JSON)");
  special->add_option("--threads", sp.threads, "Worker threads");

  int rc = 0;
  std::vector<double> c0s = {0.5, 1.0, 2.0};
  std::optional<double> amin, amax;
  int n_a = 200;
  std::string family_name = "published", ric_report;
  auto* riccati = app.add_subcommand("riccati", "Constant-curvature candidates against the biconservative equation");
  riccati->add_option("--c", rc, "Curvature of the factor surface")->required();
  riccati->add_option("--c0", c0s, "Integration constants")->expected(1, -1);
  riccati->add_option("--amin", amin, "Start of the a range");
  riccati->add_option("--amax", amax, "End of the a range");
  riccati->add_option("--n", n_a, "Samples in the a range");
  riccati->add_option("--family", family_name, "published or general");
  riccati->add_option("--report", ric_report, "Report file (JSON)");

  try {
    std::vector<std::string> args = with_config(raw_args);
    const bool c_given = given(args, "c");
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (*generate) return do_generate(gen, c_given, out);

    if (*verify) {
      const SurfacePatch patch = patch_from_json(read_json_file(in_path));
      const Parallelism par = threads(verify_threads);
      return finish_report(full_report(patch, !no_refine, planarity, par), report_path, out);
    }

    if (*special) {
      if (sign != 1 && sign != -1) throw UsageError("--sign must be 1 or -1");
      sp.case_name = CaseTag::hyp_special(sign).name();
      const CaseTag tag = resolve_case(sp, false);
      const SurfacePatch patch = build_patch(sp, tag);
      VerificationReport r;
      const int n = int(patch.curve->size());
      r.checks.push_back(upper_check("first_integral_drift", invariant_drift(*patch.curve, SpecialIntegral::closed_form), 1e-6, n, 1));
      r.checks.push_back(upper_check("branch_invariant_drift", invariant_drift(*patch.curve, SpecialIntegral::branch), 1e-6, n, 1));
      if (!sp.out.empty()) {
        write_patch(patch, sp);
        out << "wrote " << sp.out << " (" << describe(patch) << ")\n";
      }
      return finish_report(r, sp_report, out);
    }

    check_c(rc);
    RiccatiFamily family;
    if (family_name == "published") family = RiccatiFamily::published;
    else if (family_name == "general") family = RiccatiFamily::general;
    else throw UsageError("--family must be published or general");
    const auto [a_lo, a_hi] = default_a_range(rc);
    const std::pair<double, double> range{amin.value_or(a_lo), amax.value_or(a_hi)};
    VerificationReport r;
    for (const double c0 : c0s) {
      VerificationReport one = riccati_nonexistence(rc, c0, range, n_a, family);
      for (auto& c : one.checks) c.name += "(c0=" + fmt(c0) + ")";
      r.append(one);
    }
    return finish_report(r, ric_report, out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {  // PreconditionError, UsageError, bad c
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::system_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
}

}  // namespace bicons::cli
