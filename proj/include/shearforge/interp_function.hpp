#pragma once

#include <optional>
#include <vector>

#include "shearforge/ring.hpp"
#include "shearforge/shearfn.hpp"
#include "shearforge/unipoly.hpp"

namespace shearforge {

// total order on real scalar values (imaginary parts ignored)
int real_cmp(const Scalar& a, const Scalar& b);
Scalar real_min(const Scalar& a, const Scalar& b);
Scalar real_max(const Scalar& a, const Scalar& b);

// Axis-aligned rectangle in C (bounds are real scalars); convex by shape.
struct PlaneBox {
  Scalar re_lo, re_hi, im_lo, im_hi;

  void validate() const;
  std::vector<Scalar> corners() const;
  // row-major res x res lattice including the boundary
  std::vector<Scalar> grid(int res) const;
  bool contains_zero() const;
};

// Convex polygons in C, used for images of boxes under linear forms.
using Polygon = std::vector<Scalar>;

Polygon convex_hull(std::vector<Scalar> points);
// nearest point of the polygon's boundary to 0 (polygon must not contain 0)
Scalar polygon_nearest_to_zero(const Polygon& poly);
bool polygon_contains_zero(const Polygon& poly);
// deterministic sample of the polygon: vertices, edge subdivisions, interior
std::vector<Scalar> polygon_sample(const Polygon& poly, int res);

// Unit direction e^{i theta} and margin with Re(e^{-i theta} zeta) >= margin
// on K; margin is the distance from 0 to K.
std::pair<Scalar, Scalar> separating_direction(const PlaneBox& K);

struct InterpConstraints {
  std::vector<std::pair<Scalar, int>> vanish;  // (point, order), points != 0
  std::vector<Scalar> zeros;                   // exact zeros, points != 0
};

struct SmallnessTarget {
  Polygon region;       // convex, away from 0
  Scalar eps;           // real > 0
  Scalar weight_bound;  // real upper bound for |beta| (set by parametric callers)
  int grid_res = 65;
  std::vector<Scalar> check_points;  // overrides the default polygon sample
  std::vector<Scalar> param_grid;    // parametric verification grid
};

// Lemma-style one-variable function anchored at zeta0:
//   f(zeta0 + eta) = beta eta^r + O(eta^{r+1}),
//   vanishing of the stated order at each vanish point, exact zeros,
//   |f| <= eps on the sampled region when a smallness target is given
//   (region given in the unshifted plane; it must not reach zeta0).
// Construction: f = scale (zeta-zeta0)^r h(zeta) u(zeta)^M with h the product
// of the constraint factors, u a linear separator contracting on the region,
// and scale normalizing the leading coefficient; everything stays factored
// (see ShearFn), so roots are hit bitwise even in float mode. s is halved
// and M recomputed on grid-check failure.
template <class R>
ShearFn<R> build_interp_core(const R& beta, int r, const Scalar& zeta0,
                             const InterpConstraints& cons,
                             const std::optional<SmallnessTarget>& small);

// Spec-facing wrapper: rectangle region, 65x65-plus-corners verification grid.
UniPoly<Scalar> build_interp_function(const Scalar& beta, int r,
                                      const std::vector<std::pair<Scalar, int>>& vanish,
                                      const std::vector<Scalar>& zeros,
                                      const std::optional<PlaneBox>& K,
                                      const std::optional<Scalar>& eps);

// |f| maximum squared over a point set (real scalar)
template <class R>
Scalar grid_max_abs2(const UniPoly<R>& f, const std::vector<Scalar>& pts,
                     const std::vector<Scalar>& param_grid);

}  // namespace shearforge
