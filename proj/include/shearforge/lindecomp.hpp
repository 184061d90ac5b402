#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "shearforge/interp_function.hpp"
#include "shearforge/primitive.hpp"
#include "shearforge/rng.hpp"

namespace shearforge {

// Elementary matrix I + amount * e_{row,col}, row != col (0-based indices).
template <class R>
struct Transvection {
  int row = 0, col = 0;
  R amount;
};

template <class R>
Matrix<R> transvection_matrix(int n, const Transvection<R>& t) {
  Matrix<R> m = Matrix<R>::identity(n);
  m(t.row, t.col) = m(t.row, t.col) + t.amount;
  return m;
}

// left-to-right product of the factors
template <class R>
Matrix<R> transvections_product(int n, const std::vector<Transvection<R>>& ts) {
  Matrix<R> m = Matrix<R>::identity(n);
  for (const auto& t : ts) m = m * transvection_matrix(n, t);
  return m;
}

// consecutive same-triangle runs (lower: row > col), for certificates
std::vector<std::pair<char, int>> transvection_blocks(
    const std::vector<Transvection<Scalar>>& ts);

// Gaussian elimination by row additions only; the returned list multiplies
// back to Q (entry-exact in exact mode). Requires det Q = 1 (float inputs
// within tol are renormalized by det^{-1/n} first). Length <= n^2 + 4n.
std::vector<Transvection<Scalar>> sln_to_transvections(const Mat& q, double tol);

// Euclidean reduction of an SL_2 matrix over the ring of parameter
// polynomials; zero-pivot patterns go through the 3-transvection swap gadget.
std::vector<Transvection<XPoly>> sl2_polyring_to_transvections(const PolyMat& m,
                                                               double tol);

// Basis of forms with its dual vector basis; lambda_i(vec_j) = delta_ij.
struct DualBasis {
  std::vector<LinForm> forms;
  std::vector<Vec> vectors;
};

// Generic exact dual basis: every form avoids the given points, is
// e1-dominant at the given margin, and (optionally) vectors[1] is
// Hermitian-orthogonal to `orth` (needed by determinant fixes away from 0).
DualBasis sample_dual_basis(int n, const std::vector<Vec>& avoid,
                            const Scalar& axis_margin, Rng& rng,
                            const std::optional<Vec>& orth = std::nullopt);

// A per-factor smallness budget over a region of C^n given by generating
// points (box corners); each factor maps it to the plane through its form.
struct RegionBudget {
  std::vector<Vec> corners;
  Scalar eps;
  Scalar weight_bound;             // real |beta| bound, required parametric
  std::vector<Scalar> param_grid;  // poly1 verification grid
};

// Shear whose linear part in the dual coordinates is I + amount*e_{row,col}:
// z + f(lambda_col(z)) vec_row with f = amount*zeta^r_lead + O(zeta^{r_lead+1}),
// vanishing to the stated orders at form-images of fix points, zero at
// form-images of zeros, small on the form-image of the region.
template <class R>
Primitive<R> transvection_to_shear(const Transvection<R>& t, const DualBasis& basis,
                                   const std::vector<std::pair<Vec, int>>& fix,
                                   const std::vector<Vec>& zeros,
                                   const std::optional<RegionBudget>& budget,
                                   int r_lead = 1);

// Determinant fix: (none, Q) when det Q = 1; otherwise an overshear S0 with
// exponent f, f(0) = log det Q, vanishing at form-images of fix points,
// zero at form-images of zeros, small on the region image; returns S0 and
// Q * (linear part of S0)^{-1}, which has determinant 1.
std::pair<std::optional<Primitive<Scalar>>, Mat> det_fix_overshear(
    const Mat& q, const DualBasis& basis, const std::vector<std::pair<Vec, int>>& fix,
    const std::vector<Vec>& zeros, const std::optional<RegionBudget>& budget,
    double tol);

// form-image of a region polygon (exact: the hull of vertex images)
Polygon form_image(const LinForm& form, const std::vector<Vec>& region_corners);

}  // namespace shearforge
