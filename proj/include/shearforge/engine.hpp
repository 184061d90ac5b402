#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "shearforge/homog.hpp"
#include "shearforge/lindecomp.hpp"

namespace shearforge {

// Approximation side condition: |W(z) - z| <= eps on the product box K,
// checked on a grid (and over the parameter grid in poly1 mode).
struct ApproxSpec {
  std::vector<PlaneBox> box;  // one rectangle per complex coordinate
  Scalar eps;
  std::vector<Scalar> param_grid;  // poly1 verification grid T
};

struct EngineConfig {
  mpfr_prec_t precision_bits = kDefaultPrecision;
  std::uint64_t seed = 1;
  Scalar axis_margin = Scalar::rational(9, 10);
  int budget_rounds = 8;   // halvings of the eps sub-budgets
  int grid_res = 0;        // 0: derate with dimension automatically
  double tol = 0;          // 0: default_tolerance(precision_bits)
};

int default_grid_res(int n);

template <class R>
struct JetGoal {
  Jet<R> jet;  // anchored at the target point; order = m_j
};

// One-jet problem instance (Prop-style): target jet plus side conditions.
template <class R>
struct Problem {
  int n = 0;
  std::vector<JetGoal<R>> targets;
  std::vector<std::pair<Vec, int>> fix;  // identity to order N at these
  std::vector<Vec> axis_points;          // fixed exactly by every factor
  std::optional<ApproxSpec> approx;
  bool volume = false;
  EngineConfig config;
};

using ProblemSpec = Problem<Scalar>;
using ParamProblem = Problem<XPoly>;

// ---- point movers ----

// Word of at most two shears with word_eval(w, p) = q, identity to order N
// at the fix points, fixing the zero points exactly; volume-preserving.
Word move_point_word(const Vec& p, const Vec& q,
                     const std::vector<std::pair<Vec, int>>& fix,
                     const std::vector<Vec>& zeros, std::uint64_t seed = 1);

// Parametric mover: target q(x) = p + constant + sum x^t v_t; the span of
// the varying directions must be a proper subspace of C^n.
ParamWord move_point_word_param(const Vec& p, const std::vector<XPoly>& q,
                                const std::vector<std::pair<Vec, int>>& fix,
                                const std::vector<Vec>& zeros, std::uint64_t seed = 1);

// ---- single-point interpolation (no side conditions) ----

// Word whose jet at the anchor equals P through its order; the linear part
// is realized by one LinearMap factor, higher orders by monomial shear and
// overshear stages. Translation factors conjugate anchors away from 0.
template <class R>
AutoWord<R> interpolate_one_point(const Jet<R>& p, const EngineConfig& config = {});

// ---- the main constructions ----

// Prop-style single-target interpolation with all side conditions.
template <class R>
AutoWord<R> interpolate_jet_at_point(const Problem<R>& spec);

// Sequential multi-target interpolation; stage j reinterpolates target j
// conjugated by the accumulated word, is identity-to-order at previously
// handled values, exactly fixes later anchors, and is eps_j-close to the
// identity on a growing box chain K_j.
template <class R>
struct FamilyTrace {
  AutoWord<R> word;
  std::vector<std::vector<PlaneBox>> boxes;    // K_j actually used
  std::vector<AutoWord<R>> stages;             // psi_j
};

template <class R>
FamilyTrace<R> interpolate_finite_family(const Problem<R>& spec,
                                         const std::vector<Scalar>& eps_schedule,
                                         const Scalar& box_growth);

// Corollary-style: move p_j to alpha_j and realize prescribed jets there.
template <class R>
AutoWord<R> moving_points_with_jets(const std::vector<Vec>& points,
                                    const std::vector<std::vector<R>>& targets,
                                    const std::vector<Jet<R>>& jets,
                                    const EngineConfig& config = {});

// reversed word of factor inverses
template <class R>
AutoWord<R> inverse_word(const AutoWord<R>& w) {
  AutoWord<R> r;
  r.n = w.n;
  r.factors.reserve(w.factors.size());
  for (const auto& f : w.factors) r.factors.push_back(primitive_inverse(f));
  std::reverse(r.factors.begin(), r.factors.end());
  return r;
}

// corners of the product box (4^n points)
std::vector<Vec> box_corners(const std::vector<PlaneBox>& box);
// product grid with `res` points per real dimension
std::vector<Vec> box_grid(const std::vector<PlaneBox>& box, int res);

// max over the grid of |word(z) - z|^2 (specialized per grid x in poly1)
Scalar word_deviation2(const Word& w, const std::vector<Vec>& grid);
Scalar word_deviation2(const ParamWord& w, const std::vector<Vec>& grid,
                       const std::vector<Scalar>& param_grid);

}  // namespace shearforge
