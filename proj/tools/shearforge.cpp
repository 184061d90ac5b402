// Command-line front end: problem ingestion, interpolation, certificate
// emission, and standalone verification of third-party certificates.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "shearforge/io.hpp"

using namespace shearforge;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open input file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

std::uint64_t env_u64(const char* name, std::uint64_t fallback) {
  const char* v = std::getenv(name);
  if (!v) return fallback;
  try {
    return std::stoull(v);
  } catch (...) {
    return fallback;
  }
}

struct CommonOpts {
  std::string mode;
  long precision_bits = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double tol = 0;
  bool volume = false;
  std::string param;
  std::string out;
  std::string report_path;
};

void apply_overrides(LoadedProblem& prob, const CommonOpts& opt) {
  if (!opt.mode.empty()) {
    prob.mode.exact = opt.mode == "exact";
  }
  long bits = opt.precision_bits > 0
                  ? opt.precision_bits
                  : static_cast<long>(env_u64("SHEARFORGE_PRECISION_BITS", 0));
  if (bits > 0) prob.mode.precision_bits = bits;
  if (!prob.mode.exact && prob.mode.precision_bits < 64)
    throw Error("float mode needs precision_bits >= 64");
  std::uint64_t seed = opt.seed_set ? opt.seed : env_u64("SHEARFORGE_SEED", 0);
  auto fix = [&](auto& spec) {
    spec.config.precision_bits = prob.mode.precision_bits;
    if (seed != 0) spec.config.seed = seed;
    if (opt.tol > 0) spec.config.tol = opt.tol;
    if (opt.volume) spec.volume = true;
  };
  fix(prob.scalar_problem);
  fix(prob.param_problem);
  if (opt.param == "poly1") prob.parametric = true;
}

double effective_tol(const LoadedProblem& prob, const CommonOpts& opt) {
  if (opt.tol > 0) return opt.tol;
  return default_tolerance(prob.mode.precision_bits);
}

int run_interp(const std::string& in_path, const CommonOpts& opt) {
  LoadedProblem prob = problem_from_json(read_json(in_path));
  apply_overrides(prob, opt);
  double tol = effective_tol(prob, opt);

  json word_json;
  Report rep;
  if (prob.parametric) {
    ParamWord w;
    if (prob.param_problem.targets.size() == 1) {
      w = interpolate_jet_at_point(prob.param_problem);
    } else {
      w = interpolate_finite_family(prob.param_problem, {}, Scalar()).word;
    }
    word_json = to_json(w);
    rep = verify_word(w, prob.param_problem, tol, prob.param_grid);
  } else {
    Word w;
    if (prob.scalar_problem.targets.size() == 1) {
      w = interpolate_jet_at_point(prob.scalar_problem);
    } else {
      w = interpolate_finite_family(prob.scalar_problem, {}, Scalar()).word;
    }
    word_json = to_json(w);
    rep = verify_word(w, prob.scalar_problem, tol);
  }
  word_json["mode"] = prob.mode.exact ? "exact" : "float";
  word_json["precision_bits"] = static_cast<long>(prob.mode.precision_bits);
  if (!opt.out.empty()) write_json(opt.out, word_json);
  std::string rpath = opt.report_path.empty()
                          ? (opt.out.empty() ? "" : opt.out + ".report.json")
                          : opt.report_path;
  if (!rpath.empty()) write_json(rpath, to_json(rep));
  if (opt.out.empty()) std::cout << word_json.dump(2) << "\n";
  std::cout << (rep.pass ? "PASS" : "FAIL") << " (" << rep.entries.size()
            << " requirements)\n";
  return rep.pass ? 0 : 1;
}

int run_verify(const std::string& word_path, const std::string& problem_path,
               const CommonOpts& opt) {
  json wj = read_json(word_path);
  LoadedProblem prob = problem_from_json(read_json(problem_path));
  apply_overrides(prob, opt);
  double tol = effective_tol(prob, opt);
  IoMode word_mode;
  word_mode.exact = wj.value("mode", prob.mode.exact ? "exact" : "float") == "exact";
  word_mode.precision_bits = wj.value("precision_bits", (long)prob.mode.precision_bits);

  Report rep;
  if (prob.parametric) {
    ParamWord w = param_word_from_json(wj, word_mode);
    rep = verify_word(w, prob.param_problem, tol, prob.param_grid);
  } else {
    Word w = word_from_json(wj, word_mode);
    rep = verify_word(w, prob.scalar_problem, tol);
  }
  if (!opt.out.empty()) write_json(opt.out, to_json(rep));
  for (const auto& e : rep.entries)
    std::cout << (e.pass ? "pass " : "FAIL ") << e.id << " residual=" << e.residual
              << " tol=" << e.tolerance << "\n";
  std::cout << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep.pass ? 0 : 1;
}

int run_factor(const std::string& in_path, const CommonOpts& opt) {
  LoadedMatrix m = matrix_from_json(read_json(in_path));
  double tol = opt.tol > 0 ? opt.tol : default_tolerance(m.mode.precision_bits);
  json out;
  if (m.parametric) {
    auto ts = sl2_polyring_to_transvections(m.poly_matrix, tol);
    out = transvections_to_json(m.poly_matrix.dim(), ts);
  } else {
    auto ts = sln_to_transvections(m.scalar_matrix, tol);
    out = transvections_to_json(m.scalar_matrix.dim(), ts);
  }
  if (!opt.out.empty())
    write_json(opt.out, out);
  else
    std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shearforge: shear/overshear words with prescribed jets, "
               "plus an independent certificate verifier"};
  app.require_subcommand(1);

  CommonOpts opt;
  std::string in_path, problem_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--mode", opt.mode, "exact or float")
        ->check(CLI::IsMember({"exact", "float"}));
    cmd->add_option("--precision-bits", opt.precision_bits,
                    "float mantissa bits (>= 64)");
    cmd->add_option("--seed", opt.seed, "sampling seed")
        ->each([&](const std::string&) { opt.seed_set = true; });
    cmd->add_option("--tol", opt.tol, "verification tolerance");
    cmd->add_option("--out", opt.out, "output path");
  };

  CLI::App* interp = app.add_subcommand("interp", "build a word for a problem");
  interp->add_option("--in", in_path, "problem JSON")->required();
  add_common(interp);
  interp->add_flag("--volume", opt.volume, "force the volume-preserving mode");
  interp->add_option("--param", opt.param, "parametric track (poly1)")
      ->check(CLI::IsMember({"poly1"}));
  interp->add_option("--report", opt.report_path, "report output path");

  CLI::App* verify = app.add_subcommand("verify", "verify a word certificate");
  verify->add_option("--in", in_path, "word JSON")->required();
  verify->add_option("--problem", problem_path, "problem JSON")->required();
  add_common(verify);

  CLI::App* factor = app.add_subcommand("factor", "factor SL matrices into transvections");
  factor->add_option("--in", in_path, "matrix JSON")->required();
  add_common(factor);

  CLI11_PARSE(app, argc, argv);

  try {
    if (interp->parsed()) return run_interp(in_path, opt);
    if (verify->parsed()) return run_verify(in_path, problem_path, opt);
    if (factor->parsed()) return run_factor(in_path, opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
