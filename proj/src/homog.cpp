#include "shearforge/homog.hpp"

#include "shearforge/interp_function.hpp"

#include <string>

namespace shearforge {

long homog_dim(int n, int r) {
  if (r < 0) return 0;
  // C(n+r-1, r)
  long num = 1, den = 1;
  for (int i = 1; i <= r; ++i) {
    num *= n - 1 + i;
    den *= i;
  }
  return num / den;
}

template <class R>
std::vector<R> divergence(const HomogField<R>& f) {
  const int n = f.n, r = f.r;
  std::vector<R> out(homog_dim(n, r - 1), R());
  if (r == 0) return out;
  auto tab = MonomialTable::get(n, r);
  auto tab_lo = MonomialTable::get(n, r - 1);
  int lo = tab->degree_begin(r);
  int out_lo = tab_lo->degree_begin(r - 1);
  for (int i = 0; i < n; ++i) {
    for (size_t m = 0; m < f.comps[i].size(); ++m) {
      const R& c = f.comps[i][m];
      if (c.is_zero()) continue;
      std::vector<int> e = tab->exponents(lo + static_cast<int>(m));
      if (e[i] == 0) continue;
      int mult = e[i];
      e[i] -= 1;
      int rank = tab_lo->rank_of(e);
      out[rank - out_lo] = out[rank - out_lo] + c * R(mult);
    }
  }
  return out;
}

std::vector<Scalar> form_power_coeffs(const LinForm& form, int r) {
  const int n = form.dim();
  auto tab = MonomialTable::get(n, r);
  int lo = tab->degree_begin(r), hi = tab->degree_end(r);
  std::vector<Scalar> out(hi - lo);
  for (int rank = lo; rank < hi; ++rank) {
    const auto& e = tab->exponents(rank);
    // multinomial r! / prod e_i!
    Scalar m(1);
    int used = 0;
    for (int i = 0; i < n; ++i) {
      for (int t = 1; t <= e[i]; ++t) {
        ++used;
        m = m * Scalar(used) / Scalar(t);
      }
    }
    Scalar c = m;
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < e[i]; ++t) c = c * form.coeffs[i];
    out[rank - lo] = c;
  }
  return out;
}

HomogField<Scalar> a_generator_field(int n, int r, const LinForm& lambda, const Vec& v) {
  HomogField<Scalar> f = HomogField<Scalar>::zero(n, r);
  std::vector<Scalar> p = form_power_coeffs(lambda, r);
  for (int i = 0; i < n; ++i) {
    if (v[i].is_zero()) continue;
    for (size_t m = 0; m < p.size(); ++m) f.comps[i][m] = p[m] * v[i];
  }
  return f;
}

HomogField<Scalar> b_generator_field(int n, int r, const LinForm& mu, const Vec& w) {
  HomogField<Scalar> f = HomogField<Scalar>::zero(n, r);
  auto tab = MonomialTable::get(n, r);
  auto tab_lo = MonomialTable::get(n, r - 1);
  int lo = tab->degree_begin(r);
  int lo_prev = tab_lo->degree_begin(r - 1);
  std::vector<Scalar> p = form_power_coeffs(mu, r - 1);
  Scalar q = norm2(w);
  // s(z) = (mu z)^{r-1} <z,w> / |w|^2
  std::vector<Scalar> s(homog_dim(n, r), Scalar());
  for (size_t m = 0; m < p.size(); ++m) {
    if (p[m].is_zero()) continue;
    std::vector<int> e = tab_lo->exponents(lo_prev + static_cast<int>(m));
    for (int j = 0; j < n; ++j) {
      if (w[j].is_zero()) continue;
      std::vector<int> e2 = e;
      e2[j] += 1;
      int rank = tab->rank_of(e2);
      s[rank - lo] = s[rank - lo] + p[m] * w[j].conj() / q;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (w[i].is_zero()) continue;
    for (size_t m = 0; m < s.size(); ++m) f.comps[i][m] = s[m] * w[i];
  }
  return f;
}

namespace {

Scalar small_gaussian(Rng& rng, long lo, long hi) {
  return Scalar::rational(Rational(rng.range(lo, hi)), Rational(rng.range(lo, hi)));
}

// e1-dominant nonzero form with exact Gaussian-integer coefficients
LinForm sample_form(Rng& rng, int n, const Scalar& margin2, const std::vector<Vec>& avoid,
                    int tries) {
  for (int t = 0; t < tries; ++t) {
    LinForm f;
    f.coeffs.resize(n);
    long s0 = rng.coin() ? 1 : -1;
    f.coeffs[0] =
        Scalar::rational(Rational(s0 * rng.range(4, 6)), Rational(rng.range(-6, 6)));
    for (int i = 1; i < n; ++i) f.coeffs[i] = small_gaussian(rng, -1, 1);
    Scalar head = f.coeffs[0].abs2();
    Scalar total;
    for (int i = 0; i < n; ++i) total += f.coeffs[i].abs2();
    if (real_cmp(head, margin2 * total) < 0) continue;
    bool ok = true;
    for (const auto& a : avoid)
      if (f(a).is_zero()) {
        ok = false;
        break;
      }
    if (ok) return f;
  }
  throw ConstraintError("form sampling failed: avoidance or axis-margin constraint");
}

Vec sample_kernel_vector(Rng& rng, const LinForm& f, int tries) {
  const int n = f.dim();
  for (int t = 0; t < tries; ++t) {
    Vec u(n), w(n);
    for (int i = 0; i < n; ++i) {
      u[i] = small_gaussian(rng, -3, 3);
      w[i] = small_gaussian(rng, -3, 3);
    }
    Vec v = vec_sub(vec_scale(u, f(w)), vec_scale(w, f(u)));
    if (!vec_is_zero(v)) return v;
  }
  throw ConstraintError("kernel vector sampling failed");
}

// kernel vector additionally Hermitian-orthogonal to `orth`; needs n >= 3
Vec sample_kernel_vector_orth(Rng& rng, const LinForm& f, const Vec& orth, int tries) {
  for (int t = 0; t < tries; ++t) {
    Vec k1 = sample_kernel_vector(rng, f, 10);
    Vec k2 = sample_kernel_vector(rng, f, 10);
    Vec w = vec_sub(vec_scale(k1, herm(k2, orth)), vec_scale(k2, herm(k1, orth)));
    if (!vec_is_zero(w)) return w;
  }
  throw ConstraintError(
      "orthogonal kernel vector sampling failed (dimension too small?)");
}

Mat basis_matrix(int n, int r, const std::vector<std::pair<LinForm, Vec>>& a_gens,
                 const std::vector<std::pair<LinForm, Vec>>& b_gens) {
  const long hd = homog_dim(n, r);
  const int dim = static_cast<int>(n * hd);
  Mat m(dim);
  int col = 0;
  auto put = [&](const HomogField<Scalar>& f) {
    for (int i = 0; i < n; ++i)
      for (long mm = 0; mm < hd; ++mm)
        m(static_cast<int>(i * hd + mm), col) = f.comps[i][mm];
    ++col;
  };
  for (const auto& [lam, v] : a_gens) put(a_generator_field(n, r, lam, v));
  for (const auto& [mu, w] : b_gens) put(b_generator_field(n, r, mu, w));
  return m;
}

bool invertible_exact(const Mat& m) {
  std::vector<std::vector<Scalar>> none;
  try {
    return !bareiss_solve(m, none).is_zero();
  } catch (const SingularError&) {
    return false;
  }
}

// cheap low-precision screen before paying for an exact elimination
bool plausibly_invertible(const Mat& m) {
  Mat f(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) f(i, j) = m(i, j).to_float(64);
  try {
    return condition_estimate(f) < 1e12;
  } catch (const SingularError&) {
    return false;
  }
}

}  // namespace

ShearBasis sample_shear_basis(int n, int r, const std::vector<Vec>& avoid,
                              const Scalar& axis_margin, std::uint64_t seed,
                              const std::optional<Vec>& b_orth) {
  if (n < 2) throw DimensionError("need dimension >= 2");
  if (r < 1) throw DimensionError("need degree >= 1");
  for (const auto& a : avoid)
    if (vec_is_zero(a)) throw ConstraintError("avoid points must be nonzero");
  const long hd = homog_dim(n, r);
  const long hd_prev = homog_dim(n, r - 1);
  const long a_count = n * hd - hd_prev;
  const long b_count = hd_prev;
  Scalar margin2 = axis_margin * axis_margin;

  Rng rng(seed ^ (static_cast<std::uint64_t>(n) << 32) ^
          (static_cast<std::uint64_t>(r) << 16));
  std::string failure = "basis rank condition";
  for (int round = 0; round < 64; ++round) {
    try {
      ShearBasis basis;
      basis.n = n;
      basis.r = r;
      basis.seed = seed;
      basis.axis_margin = axis_margin;
      basis.avoid = avoid;
      for (long j = 0; j < a_count; ++j) {
        LinForm lam = sample_form(rng, n, margin2, avoid, 200);
        Vec v = sample_kernel_vector(rng, lam, 50);
        basis.a_gens.push_back({std::move(lam), std::move(v)});
      }
      for (long j = 0; j < b_count; ++j) {
        LinForm mu = sample_form(rng, n, margin2, avoid, 200);
        Vec w = (b_orth && !vec_is_zero(*b_orth))
                    ? sample_kernel_vector_orth(rng, mu, *b_orth, 50)
                    : sample_kernel_vector(rng, mu, 50);
        basis.b_gens.push_back({std::move(mu), std::move(w)});
      }
      // B-type divergences (mu_j z)^{r-1} must be independent on their own,
      // so a divergence-free field forces d = 0 exactly
      if (b_count > 0) {
        Mat bd(static_cast<int>(b_count));
        for (long j = 0; j < b_count; ++j) {
          auto p = form_power_coeffs(basis.b_gens[j].first, r - 1);
          for (long mm = 0; mm < hd_prev; ++mm)
            bd(static_cast<int>(mm), static_cast<int>(j)) = p[mm];
        }
        if (!invertible_exact(bd)) {
          failure = "B-type divergence independence";
          continue;
        }
      }
      basis.matrix = basis_matrix(n, r, basis.a_gens, basis.b_gens);
      // the exact elimination inside decompose_homog certifies invertibility;
      // sampling itself only needs the cheap screen
      if (!plausibly_invertible(basis.matrix)) {
        failure = "full basis matrix invertibility (screen)";
        continue;
      }
      return basis;
    } catch (const ConstraintError& e) {
      failure = e.what();
      continue;
    }
  }
  throw ConstraintError("basis sampling failed after 64 rounds: " + failure);
}

namespace {

// One shared elimination for any number of scalar right-hand columns.
void solve_columns(const ShearBasis& basis, std::vector<std::vector<Scalar>>& cols) {
  bool exact = true;
  for (const auto& col : cols)
    for (const auto& s : col)
      if (!s.is_exact()) exact = false;
  if (exact) {
    bareiss_solve(basis.matrix, cols);
  } else {
    if (condition_estimate(basis.matrix) > 1e12)
      throw SingularError("basis matrix too ill-conditioned");
    gauss_solve(basis.matrix, cols);
  }
}

template <class R>
std::vector<R> field_rhs(const HomogField<R>& f) {
  const long hd = homog_dim(f.n, f.r);
  std::vector<R> rhs(static_cast<size_t>(f.n * hd), R());
  for (int i = 0; i < f.n; ++i)
    for (long m = 0; m < hd; ++m) rhs[static_cast<size_t>(i * hd + m)] = f.comps[i][m];
  return rhs;
}

template <class R>
HomogDecomposition<R> split_solution(const ShearBasis& basis, std::vector<R> sol) {
  HomogDecomposition<R> out;
  out.a_coeffs.assign(sol.begin(), sol.begin() + basis.a_gens.size());
  out.b_coeffs.assign(sol.begin() + basis.a_gens.size(), sol.end());
  return out;
}

}  // namespace

template <class R>
std::vector<HomogDecomposition<R>> decompose_homog_batch(
    const std::vector<HomogField<R>>& fs, const ShearBasis& basis) {
  const int dim = basis.matrix.dim();
  std::vector<std::vector<Scalar>> cols;
  std::vector<int> width;  // scalar columns per field (x-degrees)
  for (const auto& f : fs) {
    if (f.n != basis.n || f.r != basis.r)
      throw DimensionError("field/basis shape mismatch");
    std::vector<R> rhs = field_rhs(f);
    if constexpr (RingOps<R>::parametric) {
      int deg = 0;
      for (const auto& p : rhs) deg = std::max(deg, p.degree());
      if (deg < 0) deg = 0;
      width.push_back(deg + 1);
      for (int t = 0; t <= deg; ++t) {
        std::vector<Scalar> col(dim);
        for (int i = 0; i < dim; ++i) col[i] = rhs[i].coeff(t);
        cols.push_back(std::move(col));
      }
    } else {
      width.push_back(1);
      cols.push_back(std::move(rhs));
    }
  }
  solve_columns(basis, cols);
  std::vector<HomogDecomposition<R>> out;
  size_t at = 0;
  for (size_t fi = 0; fi < fs.size(); ++fi) {
    if constexpr (RingOps<R>::parametric) {
      int deg = width[fi] - 1;
      std::vector<R> sol(dim, R());
      for (int i = 0; i < dim; ++i) {
        std::vector<Scalar> c(deg + 1);
        for (int t = 0; t <= deg; ++t) c[t] = cols[at + t][i];
        sol[i] = XPoly(std::move(c));
      }
      at += width[fi];
      out.push_back(split_solution(basis, std::move(sol)));
    } else {
      out.push_back(split_solution(basis, std::move(cols[at])));
      ++at;
    }
  }
  return out;
}

template <class R>
HomogDecomposition<R> decompose_homog(const HomogField<R>& f, const ShearBasis& basis) {
  std::vector<HomogField<R>> one{f};
  return std::move(decompose_homog_batch(one, basis)[0]);
}

template <class R>
HomogField<R> reconstruct_homog(const ShearBasis& basis, const std::vector<R>& a_coeffs,
                                const std::vector<R>& b_coeffs) {
  HomogField<R> out = HomogField<R>::zero(basis.n, basis.r);
  auto add = [&](const HomogField<Scalar>& g, const R& c) {
    if (c.is_zero()) return;
    for (int i = 0; i < basis.n; ++i)
      for (size_t m = 0; m < out.comps[i].size(); ++m)
        out.comps[i][m] = out.comps[i][m] + RingOps<R>::mul_scalar(c, g.comps[i][m]);
  };
  for (size_t j = 0; j < basis.a_gens.size(); ++j)
    add(a_generator_field(basis.n, basis.r, basis.a_gens[j].first,
                          basis.a_gens[j].second),
        a_coeffs[j]);
  for (size_t j = 0; j < basis.b_gens.size(); ++j)
    add(b_generator_field(basis.n, basis.r, basis.b_gens[j].first,
                          basis.b_gens[j].second),
        b_coeffs[j]);
  return out;
}

template std::vector<Scalar> divergence<Scalar>(const HomogField<Scalar>&);
template std::vector<XPoly> divergence<XPoly>(const HomogField<XPoly>&);
template HomogDecomposition<Scalar> decompose_homog<Scalar>(const HomogField<Scalar>&,
                                                            const ShearBasis&);
template HomogDecomposition<XPoly> decompose_homog<XPoly>(const HomogField<XPoly>&,
                                                          const ShearBasis&);
template std::vector<HomogDecomposition<Scalar>> decompose_homog_batch<Scalar>(
    const std::vector<HomogField<Scalar>>&, const ShearBasis&);
template std::vector<HomogDecomposition<XPoly>> decompose_homog_batch<XPoly>(
    const std::vector<HomogField<XPoly>>&, const ShearBasis&);
template HomogField<Scalar> reconstruct_homog<Scalar>(const ShearBasis&,
                                                      const std::vector<Scalar>&,
                                                      const std::vector<Scalar>&);
template HomogField<XPoly> reconstruct_homog<XPoly>(const ShearBasis&,
                                                    const std::vector<XPoly>&,
                                                    const std::vector<XPoly>&);

}  // namespace shearforge
