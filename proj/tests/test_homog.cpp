#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shearforge/homog.hpp"
#include "shearforge/interp_function.hpp"
#include "support/naive_poly.hpp"

using namespace shearforge;

namespace {

const Scalar kMargin = Scalar::rational(9, 10);

HomogField<Scalar> random_field(Rng& rng, int n, int r) {
  HomogField<Scalar> f = HomogField<Scalar>::zero(n, r);
  for (auto& comp : f.comps)
    for (auto& c : comp)
      c = Scalar::rational(Rational(rng.range(-5, 5), rng.range(1, 3)),
                           Rational(rng.range(-5, 5), rng.range(1, 3)));
  return f;
}

bool fields_equal(const HomogField<Scalar>& a, const HomogField<Scalar>& b) {
  if (a.n != b.n || a.r != b.r) return false;
  for (int i = 0; i < a.n; ++i)
    for (size_t m = 0; m < a.comps[i].size(); ++m)
      if (!(a.comps[i][m] == b.comps[i][m])) return false;
  return true;
}

// independent multiply-out of (form z)^r via NaivePoly
oracle::NaivePoly naive_form_power(const LinForm& f, int r) {
  oracle::NaivePoly acc = oracle::NaivePoly::constant(f.dim(), Scalar(1));
  oracle::NaivePoly lin(f.dim());
  for (int i = 0; i < f.dim(); ++i)
    lin = lin + oracle::NaivePoly::var(f.dim(), i).scaled(f.coeffs[i]);
  for (int t = 0; t < r; ++t) acc = acc * lin;
  return acc;
}

}  // namespace

TEST_CASE("dimension law for generator counts") {
  for (int n = 2; n <= 4; ++n)
    for (int r = 1; r <= 6; ++r) {
      long total = n * homog_dim(n, r);
      long a = total - homog_dim(n, r - 1);
      long b = homog_dim(n, r - 1);
      CHECK(a + b == total);
      CHECK(b == homog_dim(n, r - 1));
    }
  // sampled bases realize the counts (kept to sizes that stay quick here)
  for (int n = 2; n <= 3; ++n)
    for (int r = 1; r <= 3; ++r) {
      ShearBasis basis = sample_shear_basis(n, r, {}, kMargin, 42);
      CHECK(basis.total() == n * homog_dim(n, r));
      CHECK(static_cast<long>(basis.b_gens.size()) == homog_dim(n, r - 1));
    }
}

TEST_CASE("n=2 r=2: six generators and an invertible 6x6 matrix") {
  ShearBasis basis = sample_shear_basis(2, 2, {}, kMargin, 7);
  CHECK(basis.total() == 6);
  CHECK(basis.matrix.dim() == 6);
  std::vector<std::vector<Scalar>> none;
  CHECK(!bareiss_solve(basis.matrix, none).is_zero());
}

TEST_CASE("form power expansion matches the brute-force oracle") {
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    int n = 2 + static_cast<int>(rng.below(3));
    int r = 1 + static_cast<int>(rng.below(4));
    LinForm f;
    for (int i = 0; i < n; ++i)
      f.coeffs.push_back(Scalar::rational(rng.range(-4, 4), rng.range(1, 2)));
    if (f.is_zero()) f.coeffs[0] = Scalar(1);
    auto coeffs = form_power_coeffs(f, r);
    auto naive = naive_form_power(f, r);
    auto tab = MonomialTable::get(n, r);
    int lo = tab->degree_begin(r);
    for (size_t m = 0; m < coeffs.size(); ++m)
      CHECK(coeffs[m] == naive.coeff(tab->exponents(lo + static_cast<int>(m))));
  }
}

TEST_CASE("generator invariants: lambda(v) = 0 and avoidance") {
  Vec avoid_pt{Scalar(1), Scalar()};
  ShearBasis basis = sample_shear_basis(2, 2, {avoid_pt}, kMargin, 99);
  for (const auto& [lam, v] : basis.a_gens) {
    CHECK(lam(v).is_zero());
    CHECK(!lam(avoid_pt).is_zero());
    // axis margin: |lam(e1)|^2 >= margin^2 ||lam||^2
    Scalar total;
    for (const auto& c : lam.coeffs) total += c.abs2();
    CHECK(real_cmp(lam.coeffs[0].abs2(), kMargin * kMargin * total) >= 0);
  }
  for (const auto& [mu, w] : basis.b_gens) {
    CHECK(mu(w).is_zero());
    CHECK(!mu(avoid_pt).is_zero());
  }
}

TEST_CASE("divergence: A-type vanish, B-type give (mu z)^{r-1}, additive") {
  ShearBasis basis = sample_shear_basis(3, 3, {}, kMargin, 5);
  for (const auto& [lam, v] : basis.a_gens) {
    auto div = divergence(a_generator_field(3, 3, lam, v));
    for (const auto& c : div) CHECK(c.is_zero());
  }
  for (const auto& [mu, w] : basis.b_gens) {
    auto div = divergence(b_generator_field(3, 3, mu, w));
    auto expect = form_power_coeffs(mu, 2);
    REQUIRE(div.size() == expect.size());
    for (size_t m = 0; m < div.size(); ++m) CHECK(div[m] == expect[m]);
  }
  // additivity
  Rng rng(8);
  HomogField<Scalar> f = random_field(rng, 3, 3), g = random_field(rng, 3, 3);
  HomogField<Scalar> sum = f;
  for (int i = 0; i < 3; ++i)
    for (size_t m = 0; m < sum.comps[i].size(); ++m)
      sum.comps[i][m] = f.comps[i][m] + g.comps[i][m];
  auto ds = divergence(sum);
  auto df = divergence(f);
  auto dg = divergence(g);
  for (size_t m = 0; m < ds.size(); ++m) CHECK(ds[m] == df[m] + dg[m]);
}

TEST_CASE("decompose: unit vector on the first A generator") {
  ShearBasis basis = sample_shear_basis(2, 2, {}, kMargin, 3);
  HomogField<Scalar> f =
      a_generator_field(2, 2, basis.a_gens[0].first, basis.a_gens[0].second);
  auto dec = decompose_homog(f, basis);
  CHECK(dec.a_coeffs[0] == Scalar(1));
  for (size_t j = 1; j < dec.a_coeffs.size(); ++j) CHECK(dec.a_coeffs[j].is_zero());
  for (const auto& d : dec.b_coeffs) CHECK(d.is_zero());
}

TEST_CASE("decompose then reconstruct is the identity (exact)") {
  Rng rng(12);
  for (int n = 2; n <= 3; ++n)
    for (int r = 1; r <= 3; ++r) {
      ShearBasis basis = sample_shear_basis(n, r, {}, kMargin, 1000 + n * 10 + r);
      for (int t = 0; t < 3; ++t) {
        HomogField<Scalar> f = random_field(rng, n, r);
        auto dec = decompose_homog(f, basis);
        HomogField<Scalar> back = reconstruct_homog(basis, dec.a_coeffs, dec.b_coeffs);
        CHECK(fields_equal(back, f));
      }
    }
}

TEST_CASE("same seed reproduces the basis; different seeds both reconstruct") {
  ShearBasis b1 = sample_shear_basis(2, 3, {}, kMargin, 555);
  ShearBasis b2 = sample_shear_basis(2, 3, {}, kMargin, 555);
  REQUIRE(b1.total() == b2.total());
  for (size_t j = 0; j < b1.a_gens.size(); ++j) {
    CHECK(vec_equal(b1.a_gens[j].first.coeffs, b2.a_gens[j].first.coeffs));
    CHECK(vec_equal(b1.a_gens[j].second, b2.a_gens[j].second));
  }
  ShearBasis b3 = sample_shear_basis(2, 3, {}, kMargin, 556);
  Rng rng(77);
  HomogField<Scalar> f = random_field(rng, 2, 3);
  auto d1 = decompose_homog(f, b1);
  auto d3 = decompose_homog(f, b3);
  CHECK(fields_equal(reconstruct_homog(b1, d1.a_coeffs, d1.b_coeffs),
                     reconstruct_homog(b3, d3.a_coeffs, d3.b_coeffs)));
}

TEST_CASE("divergence-free fields decompose with d = 0 exactly") {
  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    int n = 2 + static_cast<int>(rng.below(2));
    int r = 2 + static_cast<int>(rng.below(2));
    // random divergence-free field: combination of independent shear fields
    HomogField<Scalar> f = HomogField<Scalar>::zero(n, r);
    for (int s = 0; s < 4; ++s) {
      LinForm lam;
      for (int i = 0; i < n; ++i)
        lam.coeffs.push_back(Scalar::rational(rng.range(-3, 3), rng.range(1, 2)));
      if (lam.is_zero()) lam.coeffs[0] = Scalar(1);
      Vec u(n), w(n);
      for (int i = 0; i < n; ++i) {
        u[i] = Scalar::rational(rng.range(-2, 2), 1);
        w[i] = Scalar::rational(rng.range(-2, 2), 1);
      }
      Vec v = vec_sub(vec_scale(u, lam(w)), vec_scale(w, lam(u)));
      if (vec_is_zero(v)) continue;
      HomogField<Scalar> g = a_generator_field(n, r, lam, v);
      for (int i = 0; i < n; ++i)
        for (size_t m = 0; m < f.comps[i].size(); ++m)
          f.comps[i][m] = f.comps[i][m] + g.comps[i][m];
    }
    for (const auto& c : divergence(f)) CHECK(c.is_zero());
    ShearBasis basis = sample_shear_basis(n, r, {}, kMargin, 2000 + t);
    auto dec = decompose_homog(f, basis);
    for (const auto& d : dec.b_coeffs) CHECK(d.is_zero());
    CHECK(fields_equal(reconstruct_homog(basis, dec.a_coeffs, dec.b_coeffs), f));
  }
}

TEST_CASE("float-mode decomposition stays within tolerance") {
  ShearBasis basis = sample_shear_basis(2, 2, {}, kMargin, 4);
  Rng rng(19);
  HomogField<Scalar> f = HomogField<Scalar>::zero(2, 2);
  for (auto& comp : f.comps)
    for (auto& c : comp)
      c = Scalar::floating(rng.range(-40, 40) / 8.0, rng.range(-40, 40) / 8.0, 128);
  auto dec = decompose_homog(f, basis);
  HomogField<Scalar> back = reconstruct_homog(basis, dec.a_coeffs, dec.b_coeffs);
  for (int i = 0; i < 2; ++i)
    for (size_t m = 0; m < back.comps[i].size(); ++m)
      CHECK(back.comps[i][m].close_to(f.comps[i][m], default_tolerance(128)));
}

TEST_CASE("parametric right-hand sides solve per x-degree") {
  ShearBasis basis = sample_shear_basis(2, 2, {}, kMargin, 21);
  Rng rng(23);
  HomogField<XPoly> f = HomogField<XPoly>::zero(2, 2);
  for (auto& comp : f.comps)
    for (auto& c : comp) {
      std::vector<Scalar> cs;
      for (int d = 0; d <= 2; ++d) cs.push_back(Scalar::rational(rng.range(-3, 3), 1));
      c = XPoly(std::move(cs));
    }
  auto dec = decompose_homog(f, basis);
  HomogField<XPoly> back = reconstruct_homog(basis, dec.a_coeffs, dec.b_coeffs);
  for (int i = 0; i < 2; ++i)
    for (size_t m = 0; m < back.comps[i].size(); ++m)
      CHECK(back.comps[i][m] == f.comps[i][m]);
  // coefficients are polynomial in x of the right degree
  for (const auto& c : dec.a_coeffs) CHECK(c.degree() <= 2);
}
