#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "shearforge/io.hpp"

using namespace shearforge;
using nlohmann::json;

namespace {

Vec origin(int n) { return Vec(n, Scalar()); }
Vec pt(long a, long b) { return Vec{Scalar(a), Scalar(b)}; }

ProblemSpec quadratic_spec() {
  ProblemSpec spec;
  spec.n = 2;
  JetMap p(2, 2, origin(2), origin(2));
  p.comp(0) = TruncPoly<Scalar>::coordinate(2, 2, 0);
  p.comp(1) = TruncPoly<Scalar>::coordinate(2, 2, 1);
  p.comp(1).set({2, 0}, Scalar(1));
  spec.targets.push_back({p});
  spec.fix = {{pt(1, 0), 3}};
  spec.axis_points = {pt(2, 0)};
  spec.config.seed = 42;
  return spec;
}

std::string run_cli(const std::string& args, int expect_exit) {
  std::string cmd = std::string(SHEARFORGE_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe)) out += buf;
  int status = pclose(pipe);
  int code = WEXITSTATUS(status);
  CHECK(code == expect_exit);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scalar and polynomial JSON round-trips") {
  IoMode exact;
  Scalar a = Scalar::rational(Rational(-7, 3), Rational(2, 5));
  CHECK(scalar_from_json(to_json(a), exact) == a);

  IoMode fl;
  fl.exact = false;
  fl.precision_bits = 192;
  Scalar b = Scalar::floating(1.0 / 3.0, -2.25, 192);
  CHECK(scalar_from_json(to_json(b), fl) == b);

  XPoly p(std::vector<Scalar>{Scalar(1), Scalar::rational(1, 2), Scalar(-3)});
  CHECK(xpoly_from_json(to_json(p), exact) == p);
}

TEST_CASE("jet JSON round-trip preserves graded-lex coefficients") {
  ProblemSpec spec = quadratic_spec();
  IoMode exact;
  JetMap back = jet_from_json(to_json(spec.targets[0].jet), exact);
  CHECK(back == spec.targets[0].jet);
  // serialized exponents appear in graded-lex order
  json j = to_json(spec.targets[0].jet);
  CHECK(j.at("coeffs").size() == 3);
}

TEST_CASE("word JSON round-trip verifies identically") {
  ProblemSpec spec = quadratic_spec();
  Word w = interpolate_jet_at_point(spec);
  IoMode exact;
  Word back = word_from_json(to_json(w), exact);
  REQUIRE(back.factors.size() == w.factors.size());
  Report r1 = verify_word(w, spec, 1e-20);
  Report r2 = verify_word(back, spec, 1e-20);
  CHECK(r1.pass);
  CHECK(r2.pass);
  REQUIRE(r1.entries.size() == r2.entries.size());
  for (size_t i = 0; i < r1.entries.size(); ++i) {
    CHECK(r1.entries[i].residual == r2.entries[i].residual);
    CHECK(r1.entries[i].exact_zero == r2.entries[i].exact_zero);
  }
  // and byte-identical re-serialization
  CHECK(to_json(w).dump() == to_json(back).dump());
}

TEST_CASE("parametric word JSON round-trip") {
  ParamProblem spec;
  spec.n = 2;
  ParamJet p(2, 2, {XPoly(), XPoly()}, {XPoly(), XPoly()});
  p.comp(0) = TruncPoly<XPoly>::coordinate(2, 2, 0);
  p.comp(1) = TruncPoly<XPoly>::coordinate(2, 2, 1);
  p.comp(1).set({2, 0}, XPoly::variable());
  spec.targets.push_back({p});
  ParamWord w = interpolate_jet_at_point(spec);
  IoMode exact;
  ParamWord back = param_word_from_json(to_json(w), exact);
  CHECK(to_json(back).dump() == to_json(w).dump());
  std::vector<Scalar> grid{Scalar(1), Scalar(-2)};
  CHECK(verify_word(back, spec, 1e-18, grid).pass);
}

TEST_CASE("problem JSON round-trip") {
  ProblemSpec spec = quadratic_spec();
  LoadedProblem lp = problem_from_json(to_json(spec));
  CHECK(!lp.parametric);
  CHECK(lp.scalar_problem.n == 2);
  CHECK(lp.scalar_problem.fix.size() == 1);
  CHECK(lp.scalar_problem.axis_points.size() == 1);
  Word w = interpolate_jet_at_point(lp.scalar_problem);
  CHECK(verify_word(w, lp.scalar_problem, 1e-20).pass);
}

TEST_CASE("report JSON carries all certificate fields") {
  ProblemSpec spec = quadratic_spec();
  Word w = interpolate_jet_at_point(spec);
  Report rep = verify_word(w, spec, 1e-20);
  json j = to_json(rep);
  CHECK(j.at("schema") == "shearforge/report/v1");
  CHECK(j.at("pass").get<bool>());
  CHECK(j.at("entries").size() == rep.entries.size());
  CHECK(j.at("seed").get<std::uint64_t>() == 42);
}

TEST_CASE("transvection list JSON uses matrix indices and blocks") {
  Mat q(2);
  q(0, 0) = Scalar(0);
  q(0, 1) = Scalar(1);
  q(1, 0) = Scalar(-1);
  q(1, 1) = Scalar(0);
  auto ts = sln_to_transvections(q, 1e-20);
  json j = transvections_to_json(2, ts);
  CHECK(j.at("entries").size() == ts.size());
  CHECK(j.at("entries").at(0).at("row").get<int>() >= 1);
  CHECK(j.contains("blocks"));
}

TEST_CASE("cli: bundled example runs, verifies, and is deterministic") {
  std::string dir = std::string(SHEARFORGE_DATA_DIR);
  std::string out1 = "/tmp/sf_word1.json", out2 = "/tmp/sf_word2.json";
  run_cli("interp --in " + dir + "/example_quadratic.json --out " + out1, 0);
  run_cli("interp --in " + dir + "/example_quadratic.json --out " + out2, 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(!slurp(out1).empty());
  // standalone verification of the emitted certificate
  std::string vout = run_cli("verify --in " + out1 + " --problem " + dir +
                                 "/example_quadratic.json --out /tmp/sf_rep.json",
                             0);
  CHECK(vout.find("PASS") != std::string::npos);
}

TEST_CASE("cli: factor subcommand and error paths") {
  std::string dir = std::string(SHEARFORGE_DATA_DIR);
  std::string out = run_cli("factor --in " + dir + "/example_sl2_matrix.json", 0);
  CHECK(out.find("entries") != std::string::npos);

  // truncated JSON: exit 2
  std::ofstream bad("/tmp/sf_bad.json");
  bad << "{ \"schema\": \"shearforge/problem/v1\", ";
  bad.close();
  run_cli("interp --in /tmp/sf_bad.json", 2);
  // missing file: exit 2
  run_cli("interp --in /tmp/sf_nonexistent.json", 2);
}

TEST_CASE("cli: rejected certificates exit 1") {
  std::string dir = std::string(SHEARFORGE_DATA_DIR);
  std::string wpath = "/tmp/sf_word_break.json";
  run_cli("interp --in " + dir + "/example_quadratic.json --out " + wpath, 0);
  json w;
  {
    std::ifstream in(wpath);
    in >> w;
  }
  // bump one stored coefficient well past tolerance
  bool bumped = false;
  for (auto& f : w.at("factors")) {
    if (f.at("variant") == "shear" && !bumped) {
      auto& fn = f.at("fn");
      auto& target = fn.is_array() ? fn.at(0) : fn.at("poly").at(0);
      target.at("re") = "1000001/1000000";
      bumped = true;
    }
  }
  REQUIRE(bumped);
  {
    std::ofstream outf(wpath);
    outf << w.dump(2);
  }
  run_cli("verify --in " + wpath + " --problem " + dir + "/example_quadratic.json", 1);
}
