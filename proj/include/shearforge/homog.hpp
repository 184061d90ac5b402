#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shearforge/jet.hpp"
#include "shearforge/rng.hpp"

namespace shearforge {

// dim of scalar homogeneous polynomials of degree r in n variables
long homog_dim(int n, int r);

// Homogeneous polynomial vector field of degree r on C^n. Component i holds
// dense coefficients over the degree-r monomials in graded-lex order.
template <class R>
struct HomogField {
  int n = 0, r = 0;
  std::vector<std::vector<R>> comps;

  static HomogField zero(int n, int r) {
    HomogField f;
    f.n = n;
    f.r = r;
    f.comps.assign(n, std::vector<R>(homog_dim(n, r), R()));
    return f;
  }
  bool is_zero() const {
    for (const auto& c : comps)
      for (const auto& x : c)
        if (!x.is_zero()) return false;
    return true;
  }
};

// degree-r slice of a jet's components as a homogeneous field
template <class R>
HomogField<R> slice_field(const Jet<R>& j, int r) {
  if (r < 1 || r > j.order()) throw DimensionError("slice degree out of range");
  HomogField<R> f = HomogField<R>::zero(j.dim(), r);
  const auto& tab = j.comp(0).table();
  int lo = tab.degree_begin(r), hi = tab.degree_end(r);
  for (int i = 0; i < j.dim(); ++i)
    for (int rank = lo; rank < hi; ++rank) f.comps[i][rank - lo] = j.comp(i).at(rank);
  return f;
}

// divergence sum_i dF_i/dz_i, a degree-(r-1) homogeneous scalar polynomial
template <class R>
std::vector<R> divergence(const HomogField<R>& f);

// Generic generators for degree-r fields:
//   A-type  z -> (lambda z)^r v        with lambda(v) = 0   (divergence-free)
//   B-type  z -> (mu z)^{r-1} <z,w> w / |w|^2  with mu(w) = 0
// A-count = n*homog_dim(n,r) - homog_dim(n,r-1), B-count = homog_dim(n,r-1).
struct ShearBasis {
  int n = 0, r = 0;
  std::uint64_t seed = 0;
  Scalar axis_margin;
  std::vector<std::pair<LinForm, Vec>> a_gens;
  std::vector<std::pair<LinForm, Vec>> b_gens;
  Mat matrix;  // columns: A generators then B generators, rows (comp, monomial)
  std::vector<Vec> avoid;

  int total() const { return static_cast<int>(a_gens.size() + b_gens.size()); }
};

// b_orth: require the B-type directions w_j to be Hermitian-orthogonal to
// this point (translation-conjugated overshears need it); n >= 3 only.
ShearBasis sample_shear_basis(int n, int r, const std::vector<Vec>& avoid,
                              const Scalar& axis_margin, std::uint64_t seed,
                              const std::optional<Vec>& b_orth = std::nullopt);

// coefficient vector of (form z)^r over the degree-r monomials
std::vector<Scalar> form_power_coeffs(const LinForm& form, int r);

// the field of one generator with unit coefficient
HomogField<Scalar> a_generator_field(int n, int r, const LinForm& lambda, const Vec& v);
HomogField<Scalar> b_generator_field(int n, int r, const LinForm& mu, const Vec& w);

template <class R>
struct HomogDecomposition {
  std::vector<R> a_coeffs;
  std::vector<R> b_coeffs;
};

// Solve F = sum c_j A_j + sum d_j B_j; unique (square invertible system).
// Fraction-free elimination when everything is exact, partial-pivot float
// elimination with a condition-estimate guard otherwise.
template <class R>
HomogDecomposition<R> decompose_homog(const HomogField<R>& f, const ShearBasis& basis);

// Same, sharing one elimination across many fields of the same shape.
template <class R>
std::vector<HomogDecomposition<R>> decompose_homog_batch(
    const std::vector<HomogField<R>>& fs, const ShearBasis& basis);

template <class R>
HomogField<R> reconstruct_homog(const ShearBasis& basis, const std::vector<R>& a_coeffs,
                                const std::vector<R>& b_coeffs);

}  // namespace shearforge
