#pragma once

#include <json.hpp>

#include "shearforge/lindecomp.hpp"
#include "shearforge/verify.hpp"

namespace shearforge {

// Parsing context: exact certificates carry rationals ("num/den" strings),
// float ones decimal strings read at the declared precision.
struct IoMode {
  bool exact = true;
  mpfr_prec_t precision_bits = kDefaultPrecision;
};

nlohmann::json to_json(const Scalar& s);
Scalar scalar_from_json(const nlohmann::json& j, const IoMode& mode);

nlohmann::json to_json(const XPoly& p);
XPoly xpoly_from_json(const nlohmann::json& j, const IoMode& mode);

nlohmann::json to_json(const JetMap& jet);
nlohmann::json to_json(const ParamJet& jet);
JetMap jet_from_json(const nlohmann::json& j, const IoMode& mode);
ParamJet param_jet_from_json(const nlohmann::json& j, const IoMode& mode);

nlohmann::json to_json(const Word& w);
nlohmann::json to_json(const ParamWord& w);
Word word_from_json(const nlohmann::json& j, const IoMode& mode);
ParamWord param_word_from_json(const nlohmann::json& j, const IoMode& mode);

nlohmann::json to_json(const ProblemSpec& spec);
nlohmann::json to_json(const ParamProblem& spec);

// Problems self-describe their arithmetic mode and parametric track.
struct LoadedProblem {
  bool parametric = false;
  ProblemSpec scalar_problem;
  ParamProblem param_problem;
  std::vector<Scalar> param_grid;
  IoMode mode;
};
LoadedProblem problem_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Report& rep);

nlohmann::json transvections_to_json(int n, const std::vector<Transvection<Scalar>>& ts);
nlohmann::json transvections_to_json(int n, const std::vector<Transvection<XPoly>>& ts);

// square matrices for the `factor` subcommand
struct LoadedMatrix {
  bool parametric = false;
  Mat scalar_matrix;
  PolyMat poly_matrix;
  IoMode mode;
};
LoadedMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json basis_to_json(const ShearBasis& basis);

}  // namespace shearforge
