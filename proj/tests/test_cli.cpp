#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bicons/cli.hpp"
#include "bicons/errors.hpp"
#include "bicons/io.hpp"

using namespace bicons;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const char* env = std::getenv("BICONS_TEST_TMP");
  fs::path dir = env ? fs::path(env) : fs::temp_directory_path() / "bicons_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("generate then verify the default sphere patch") {
  const auto patch = path("sphere.json"), report = path("sphere_report.json");
  const Result g = run({"generate", "--c", "1", "--case", "sphere", "--theta0", "0.8", "--a0", "1.2", "--f0", "0.1",
                        "--out", patch});
  REQUIRE(g.code == 0);
  CHECK(g.out.find("64 x 64") != std::string::npos);
  const Result v = run({"verify", "--in", patch, "--report", report});
  CHECK(v.code == 0);
  const VerificationReport r = report_from_json(read_json_file(report));
  CHECK(r.all_pass());
  CHECK(r.at("bicons_residual").convergence_ratio.value() > 3.2);
}

TEST_CASE("identical flags give identical files") {
  const std::vector<std::string> gen = {"generate", "--case", "hyp_alt1", "--nu", "24", "--nv", "20", "--threads", "3"};
  auto a = gen, b = gen;
  a.insert(a.end(), {"--out", path("det_a.json")});
  b.insert(b.end(), {"--out", path("det_b.json")});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(path("det_a.json")) == slurp(path("det_b.json")));
  REQUIRE(run({"verify", "--in", path("det_a.json"), "--report", path("det_ra.json")}).code == 0);
  REQUIRE(run({"verify", "--in", path("det_b.json"), "--report", path("det_rb.json"), "--threads", "2"}).code == 0);
  CHECK(slurp(path("det_ra.json")) == slurp(path("det_rb.json")));
}

TEST_CASE("usage errors exit 2 with one line") {
  Result r = run({"generate", "--c", "2", "--out", path("x.json")});
  CHECK(r.code == 2);
  CHECK(r.err == "error: c must be 1 or -1\n");
  CHECK(run({"generate", "--bogus", "--out", path("x.json")}).code == 2);
  CHECK(run({"generate", "--c", "1", "--case", "hyp_agt1", "--out", path("x.json")}).code == 2);
  CHECK(run({"generate", "--case", "hyp_special+1", "--a0", "1.5", "--out", path("x.json")}).code == 2);
  CHECK(run({"generate", "--format", "stl", "--out", path("x.stl")}).code == 2);
  CHECK(run({"generate"}).code == 2);
  CHECK(run({}).code == 2);
  r = run({"verify", "--in", path("does_not_exist.json")});
  CHECK(r.code == 2);
  CHECK(r.err.find("does_not_exist") != std::string::npos);
  CHECK(r.err.find('\n') == r.err.size() - 1);
  CHECK(run({"riccati", "--c", "3"}).code == 2);
}

TEST_CASE("config file with flag override") {
  const auto cfg = path("run.cfg");
  std::ofstream(cfg) << "# demo\ncase = hyp_agt1\nnu = 16   # coarse\nnv = 12\nout = " << path("cfg.json") << "\n";
  REQUIRE(run({"generate", "--config", cfg, "--nv", "10"}).code == 0);
  const SurfacePatch p = patch_from_json(read_json_file(path("cfg.json")));
  CHECK(p.n_u() == 16);
  CHECK(p.n_v() == 10);
  CHECK(p.c == -1);
  CHECK(p.tag->name() == "hyp_agt1");

  std::ofstream(cfg) << "nu\n";
  CHECK(run({"generate", "--config", cfg, "--out", path("x.json")}).code == 2);
  CHECK(run({"generate", "--config", path("missing.cfg")}).code == 2);
  std::ofstream(cfg) << "in = " << path("cfg.json") << "\nno-refine = true\n";
  CHECK(run({"verify", "--config", cfg}).code == 0);
}

TEST_CASE("verify fails on a corrupted patch") {
  REQUIRE(run({"generate", "--out", path("bad.json")}).code == 0);
  Json j = read_json_file(path("bad.json"));
  j["points"][30][30][0] = j["points"][30][30][0].get<double>() + 1e-4;
  write_text_file(path("bad.json"), dump(j));
  CHECK(run({"verify", "--in", path("bad.json"), "--no-refine"}).code == 1);
}

TEST_CASE("planarity is opt-in") {
  REQUIRE(run({"generate", "--out", path("plan.json")}).code == 0);
  CHECK(run({"verify", "--in", path("plan.json"), "--no-refine"}).code == 0);
  const Result r = run({"verify", "--in", path("plan.json"), "--no-refine", "--planarity"});
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL planarity") != std::string::npos);
}

TEST_CASE("special branch report") {
  const Result r = run({"special", "--sign", "-1", "--out", path("special.json"), "--report", path("special_report.json")});
  const VerificationReport rep = report_from_json(read_json_file(path("special_report.json")));
  CHECK(rep.at("branch_invariant_drift").pass);
  // The closed-form integral is not conserved by the branch equation.
  CHECK_FALSE(rep.at("first_integral_drift").pass);
  CHECK(r.code == 1);
  CHECK(run({"verify", "--in", path("special.json"), "--no-refine"}).code == 0);
  CHECK(run({"special", "--sign", "2"}).code == 2);
}

TEST_CASE("riccati sweep exit codes") {
  CHECK(run({"riccati", "--c", "1", "--family", "general"}).code == 0);
  CHECK(run({"riccati", "--c", "-1", "--family", "general", "--c0", "0.5", "2"}).code == 0);
  CHECK(run({"riccati", "--c", "1"}).code == 1);
  CHECK(run({"riccati", "--c", "1", "--family", "other"}).code == 2);
}

TEST_CASE("exports from generate") {
  REQUIRE(run({"generate", "--nu", "8", "--nv", "6", "--format", "csv", "--out", path("p.csv")}).code == 0);
  std::ifstream in(path("p.csv"));
  int lines = 0;
  for (std::string s; std::getline(in, s);) ++lines;
  CHECK(lines == 49);
  CHECK(run({"generate", "--nu", "8", "--nv", "6", "--format", "obj", "--out", path("p.obj")}).code == 0);
}

TEST_CASE("config parser") {
  const auto cfg = path("parse.cfg");
  std::ofstream(cfg) << "  a = 1 \n\n# x = 2\nb=two words # tail\n";
  const auto entries = cli::read_config(cfg);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0] == std::pair<std::string, std::string>{"a", "1"});
  CHECK(entries[1] == std::pair<std::string, std::string>{"b", "two words"});
  CHECK_THROWS_AS(cli::read_config(path("nope.cfg")), UsageError);
}
