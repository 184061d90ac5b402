#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shearforge/lindecomp.hpp"

using namespace shearforge;

namespace {

const Scalar kMargin = Scalar::rational(9, 10);

Mat mat2(long a, long b, long c, long d) {
  Mat m(2);
  m(0, 0) = Scalar(a);
  m(0, 1) = Scalar(b);
  m(1, 0) = Scalar(c);
  m(1, 1) = Scalar(d);
  return m;
}

Mat random_sl(Rng& rng, int n, int factors) {
  // products of random transvections are exactly in SL_n
  Mat m = Mat::identity(n);
  for (int t = 0; t < factors; ++t) {
    int i = static_cast<int>(rng.below(n));
    int j = static_cast<int>(rng.below(n));
    if (i == j) continue;
    Transvection<Scalar> tv{i, j,
                            Scalar::rational(Rational(rng.range(-3, 3), rng.range(1, 2)),
                                             Rational(rng.range(-2, 2)))};
    m = m * transvection_matrix(n, tv);
  }
  return m;
}

PolyMat random_sl2_poly(Rng& rng, int factors, int maxdeg) {
  PolyMat m = PolyMat::identity(2);
  for (int t = 0; t < factors; ++t) {
    bool upper = rng.coin();
    std::vector<Scalar> cs;
    int deg = static_cast<int>(rng.below(maxdeg + 1));
    for (int d = 0; d <= deg; ++d)
      cs.push_back(Scalar::rational(rng.range(-3, 3), rng.range(1, 2)));
    Transvection<XPoly> tv{upper ? 0 : 1, upper ? 1 : 0, XPoly(std::move(cs))};
    if (tv.amount.is_zero()) continue;
    m = m * transvection_matrix(2, tv);
  }
  return m;
}

bool polymat_equal(const PolyMat& a, const PolyMat& b) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (!(a(i, j) == b(i, j))) return false;
  return true;
}

}  // namespace

TEST_CASE("sln_to_transvections on the pinned examples") {
  CHECK(sln_to_transvections(Mat::identity(3), 1e-20).empty());

  auto ts = sln_to_transvections(mat2(1, 1, 0, 1), 1e-20);
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].row == 0);
  CHECK(ts[0].col == 1);
  CHECK(ts[0].amount == Scalar(1));

  // [[0,1],[-1,0]]: multiply-back is the oracle
  Mat w = mat2(0, 1, -1, 0);
  auto tw = sln_to_transvections(w, 1e-20);
  CHECK(transvections_product(2, tw) == w);
  CHECK(tw.size() <= 2u * 2u + 4u * 2u);
}

TEST_CASE("multiply-back is entry-exact on random SL_n products") {
  Rng rng(314);
  for (int t = 0; t < 60; ++t) {
    int n = 2 + static_cast<int>(rng.below(3));
    Mat q = random_sl(rng, n, 2 + static_cast<int>(rng.below(9)));
    auto ts = sln_to_transvections(q, 1e-20);
    CHECK(transvections_product(n, ts) == q);
    CHECK(ts.size() <= static_cast<size_t>(n * n + 4 * n));
    for (const auto& tv : ts) CHECK(tv.row != tv.col);
  }
}

TEST_CASE("non-unimodular matrices are rejected") {
  CHECK_THROWS_AS(sln_to_transvections(mat2(2, 0, 0, 1), 1e-20), Error);
}

TEST_CASE("float multiply-back stays inside tolerance after renormalization") {
  Rng rng(11);
  Mat q = random_sl(rng, 3, 6);
  Mat qf(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) qf(i, j) = q(i, j).to_float(128);
  auto ts = sln_to_transvections(qf, 1e-20);
  Mat back = transvections_product(3, ts);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(back(i, j).close_to(qf(i, j), 1e-30));
}

TEST_CASE("sl2 polynomial-ring reduction on the pinned examples") {
  CHECK(sl2_polyring_to_transvections(PolyMat::identity(2), 1e-20).empty());

  PolyMat e12x = PolyMat::identity(2);
  e12x(0, 1) = XPoly::variable();
  auto ts = sl2_polyring_to_transvections(e12x, 1e-20);
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].row == 0);
  CHECK(ts[0].col == 1);
  CHECK(ts[0].amount == XPoly::variable());

  // [[1+x^2, x],[x, 1]] = E12(x) E21(x)
  PolyMat m(2);
  m(0, 0) = XPoly(std::vector<Scalar>{Scalar(1), Scalar(), Scalar(1)});
  m(0, 1) = XPoly::variable();
  m(1, 0) = XPoly::variable();
  m(1, 1) = XPoly(1);
  auto tm = sl2_polyring_to_transvections(m, 1e-20);
  CHECK(polymat_equal(transvections_product(2, tm), m));
}

TEST_CASE("sl2 polynomial multiply-back on random elementary products") {
  Rng rng(2718);
  for (int t = 0; t < 40; ++t) {
    PolyMat m = random_sl2_poly(rng, 2 + static_cast<int>(rng.below(7)), 3);
    auto ts = sl2_polyring_to_transvections(m, 1e-20);
    CHECK(polymat_equal(transvections_product(2, ts), m));
    for (const auto& tv : ts) CHECK(tv.row != tv.col);
  }
}

TEST_CASE("sl2 zero-pivot patterns go through the gadget, not an error") {
  // [[0, 1], [-1, 0]] over the polynomial ring
  PolyMat w(2);
  w(0, 1) = XPoly(1);
  w(1, 0) = XPoly(-1);
  auto ts = sl2_polyring_to_transvections(w, 1e-20);
  CHECK(polymat_equal(transvections_product(2, ts), w));
}

TEST_CASE("sl2 det check is a polynomial identity") {
  PolyMat bad = PolyMat::identity(2);
  bad(0, 0) = XPoly::variable();  // det = x
  CHECK_THROWS_AS(sl2_polyring_to_transvections(bad, 1e-20), Error);
}

TEST_CASE("transvection blocks coalesce same-triangle runs") {
  std::vector<Transvection<Scalar>> ts = {
      {1, 0, Scalar(1)}, {2, 0, Scalar(2)}, {0, 1, Scalar(3)}, {1, 2, Scalar(4)},
      {2, 1, Scalar(5)}};
  auto blocks = transvection_blocks(ts);
  REQUIRE(blocks.size() == 3);
  CHECK(blocks[0] == std::pair<char, int>('L', 2));
  CHECK(blocks[1] == std::pair<char, int>('U', 2));
  CHECK(blocks[2] == std::pair<char, int>('L', 1));
}

TEST_CASE("dual basis: duality, avoidance, optional orthogonality") {
  Rng rng(55);
  Vec avoid_pt{Scalar(1), Scalar(0), Scalar(2)};
  Vec p{Scalar(2), Scalar(1), Scalar(-1)};
  DualBasis basis = sample_dual_basis(3, {avoid_pt}, kMargin, rng, p);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Scalar v = basis.forms[i](basis.vectors[j]);
      CHECK(v == (i == j ? Scalar(1) : Scalar()));
    }
  for (const auto& f : basis.forms) CHECK(!f(avoid_pt).is_zero());
  CHECK(herm(basis.vectors[1], p).is_zero());
}

TEST_CASE("transvection_to_shear: linear parts compose back to the matrix") {
  Rng rng(77);
  DualBasis basis = sample_dual_basis(3, {}, kMargin, rng);
  Mat q = random_sl(rng, 3, 6);
  // conjugate into dual coordinates, factor, build shears, compare jets
  Mat lambda(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) lambda(i, j) = basis.forms[i].coeffs[j];
  Mat conj_q = lambda * q * mat_inverse(lambda);
  auto ts = sln_to_transvections(conj_q, 1e-20);
  Word w;
  w.n = 3;
  for (const auto& t : ts)
    w.factors.push_back(transvection_to_shear<Scalar>(t, basis, {}, {}, std::nullopt));
  JetMap j = word_jet(w, Vec(3, Scalar()), 1);
  CHECK(j.linear_part() == q);
}

TEST_CASE("standard dual basis example: T_{2,1}(1) acts as z + z1 e2") {
  DualBasis std_basis;
  for (int i = 0; i < 2; ++i) {
    LinForm f;
    f.coeffs = Vec(2, Scalar());
    f.coeffs[i] = Scalar(1);
    std_basis.forms.push_back(f);
    Vec v(2, Scalar());
    v[i] = Scalar(1);
    std_basis.vectors.push_back(v);
  }
  Transvection<Scalar> t{1, 0, Scalar(1)};
  auto g = transvection_to_shear<Scalar>(t, std_basis, {}, {}, std::nullopt);
  const auto& s = std::get<Shear<Scalar>>(g);
  CHECK(s.fn.expanded() == UniPoly<Scalar>::variable());
  Vec img = primitive_eval(g, Vec{Scalar(3), Scalar(4)});
  CHECK(img[0] == Scalar(3));
  CHECK(img[1] == Scalar(7));
  Word w;
  w.n = 2;
  w.factors.push_back(g);
  Mat lp = word_jet(w, Vec(2, Scalar()), 1).linear_part();
  CHECK(lp == transvection_matrix(2, t));
}

TEST_CASE("transvection shear honors fix orders and parametric amounts") {
  Rng rng(99);
  DualBasis basis = sample_dual_basis(2, {Vec{Scalar(1), Scalar(2)}}, kMargin, rng);
  Vec a{Scalar(1), Scalar(2)};
  Transvection<Scalar> t{0, 1, Scalar::rational(5, 3)};
  auto g = transvection_to_shear<Scalar>(t, basis, {{a, 3}}, {}, std::nullopt);
  Word w;
  w.n = 2;
  w.factors.push_back(g);
  // f vanishes to order 3 at form(a): the jet through order 2 is the identity
  JetMap ja = word_jet(w, a, 2);
  CHECK(ja == JetMap::identity(2, 2, a));
  // linear part at 0 is I + amount e_{0,1} in dual coordinates
  Mat lambda(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) lambda(i, j) = basis.forms[i].coeffs[j];
  Mat lp = word_jet(w, Vec(2, Scalar()), 1).linear_part();
  Mat in_dual = lambda * lp * mat_inverse(lambda);
  CHECK(in_dual == transvection_matrix(2, t));

  // parametric amount: coefficients degree 1 in x; x = 0 gives the identity
  Transvection<XPoly> tp{0, 1, XPoly::variable()};
  auto gp = transvection_to_shear<XPoly>(tp, basis, {}, {}, std::nullopt);
  Word at0 = Word{};
  at0.n = 2;
  at0.factors.push_back(specialize(std::get<Shear<XPoly>>(gp).fn.is_zero()
                                       ? Primitive<XPoly>(gp)
                                       : Primitive<XPoly>(gp),
                                   Scalar()));
  Mat lp0 = word_jet(at0, Vec(2, Scalar()), 1).linear_part();
  CHECK(lp0 == Mat::identity(2));
}

TEST_CASE("det_fix_overshear: SL input passes through; diag(2,1) gets fixed") {
  Rng rng(123);
  DualBasis basis = sample_dual_basis(2, {}, kMargin, rng);
  Mat sl = mat2(1, 1, 0, 1);
  auto [none, same] = det_fix_overshear(sl, basis, {}, {}, std::nullopt, 1e-20);
  CHECK(!none.has_value());
  CHECK(same == sl);

  Mat q(2);
  q(0, 0) = Scalar::floating(2.0, 0.0, 128);
  q(1, 1) = Scalar::floating(1.0, 0.0, 128);
  auto [s0, rest] = det_fix_overshear(q, basis, {}, {}, std::nullopt, 1e-20);
  REQUIRE(s0.has_value());
  const auto& ov = std::get<Overshear<Scalar>>(*s0);
  // f(0) = log 2
  Scalar f0 = eval_fn(ov.fn, Scalar());
  CHECK(f0.close_to(Scalar::floating(2.0, 0.0, 128).log(), 1e-30));
  // the remaining matrix has determinant 1
  CHECK(rest.det().close_to(Scalar(1), 1e-30));
  // exact mode with det != 1 wants float
  CHECK_THROWS_AS(det_fix_overshear(mat2(2, 0, 0, 1), basis, {}, {}, std::nullopt, 1e-20),
                  ModeError);
}

TEST_CASE("det fix with a fix point gives identity-to-order jets there") {
  Rng rng(321);
  Vec a{Scalar(1), Scalar(-1)};
  DualBasis basis = sample_dual_basis(2, {a}, kMargin, rng);
  Mat q(2);
  q(0, 0) = Scalar::floating(0.0, 1.0, 128);   // i
  q(1, 1) = Scalar::floating(1.0, 1.0, 128);   // det = i(1+i) != 1
  q(0, 1) = Scalar::floating(0.5, 0.0, 128);
  auto [s0, rest] = det_fix_overshear(q, basis, {{a, 3}}, {}, std::nullopt, 1e-20);
  REQUIRE(s0.has_value());
  CHECK(rest.det().close_to(Scalar(1), 1e-30));
  Word w;
  w.n = 2;
  w.factors.push_back(*s0);
  Vec af{a[0].to_float(128), a[1].to_float(128)};
  JetMap ja = word_jet(w, af, 2);
  JetMap ida = JetMap::identity(2, 2, af);
  for (int i = 0; i < 2; ++i)
    for (int rank = 0; rank < ja.comp(i).size(); ++rank)
      CHECK((ja.comp(i).at(rank) - ida.comp(i).at(rank)).magnitude() < 1e-30);
}

TEST_CASE("form_image is the hull of corner images and detects 0") {
  LinForm f;
  f.coeffs = Vec{Scalar(1), Scalar::rational(Rational(0), Rational(1))};
  std::vector<Vec> corners;
  for (long a : {1L, 2L})
    for (long b : {-1L, 1L}) corners.push_back(Vec{Scalar(a), Scalar(b)});
  Polygon img = form_image(f, corners);
  CHECK(img.size() >= 3);
  CHECK(!polygon_contains_zero(img));
}
