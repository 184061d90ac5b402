#pragma once

#include <string>
#include <vector>

#include "shearforge/engine.hpp"
#include "shearforge/gridscan.hpp"

namespace shearforge {

struct ReportEntry {
  std::string id;
  double residual = 0;     // magnitude of the worst violation
  bool exact_zero = true;  // residual is exactly zero (exact arithmetic)
  double tolerance = 0;    // 0 means the requirement is exactness
  bool pass = false;
};

// Verification certificate: one entry per requirement, plus the data needed
// to reproduce the run byte for byte.
struct Report {
  std::vector<ReportEntry> entries;
  std::string mode = "exact";
  long precision_bits = 0;
  std::uint64_t seed = 0;
  int grid_res = 0;
  bool pass = true;

  void add(std::string id, double residual, bool exact_zero, double tolerance,
           bool entry_pass) {
    entries.push_back({std::move(id), residual, exact_zero, tolerance, entry_pass});
    pass = pass && entry_pass;
  }
};

// Independent verification: recomputes every word jet through its own
// factor-Taylor path (never the builder's word_jet), evaluates every axis
// point under every factor, checks the volume conditions, and samples the
// approximation grid. Failures are recorded, not thrown.
Report verify_word(const Word& w, const ProblemSpec& spec, double tol);

// poly1 certificate: the word is specialized at every parameter grid value
// and verified nonparametrically; entries carry the grid index.
Report verify_word(const ParamWord& w, const ParamProblem& spec, double tol,
                   const std::vector<Scalar>& param_grid);

// Finite-difference cross-validation of word_jet near an anchor: central
// differences at steps h and h/2 with a Richardson error estimate.
Report crosscheck_numeric(const Word& w, const Vec& anchor, int order, const Scalar& h,
                          double tol);

// The verifier's own factor-jet construction (synthetic division and
// truncated-product routes); exposed for tests.
JetMap verifier_factor_jet(const Primitive<Scalar>& g, const Vec& anchor, int order);
JetMap verifier_word_jet(const Word& w, const Vec& anchor, int order);

}  // namespace shearforge
