#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shearforge/jet.hpp"
#include "shearforge/rng.hpp"
#include "support/naive_poly.hpp"

using namespace shearforge;
using oracle::NaivePoly;

namespace {

Vec origin(int n) { return Vec(n, Scalar()); }

JetMap random_jet(Rng& rng, int n, int k, bool tangent_to_id = false) {
  JetMap j(n, k, origin(n), origin(n));
  auto tab = MonomialTable::get(n, k);
  for (int i = 0; i < n; ++i)
    for (int r = 1; r < tab->size(); ++r) {
      Scalar c = Scalar::rational(rng.range(-3, 3), rng.range(1, 3));
      j.comp(i).at(r) = c;
    }
  // force an invertible (unipotent-dominant) linear part
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj) {
      std::vector<int> e(n, 0);
      e[jj] = 1;
      if (i == jj)
        j.comp(i).set(e, Scalar(1));
      else if (tangent_to_id)
        j.comp(i).set(e, Scalar());
    }
  return j;
}

NaivePoly to_naive(const TruncPoly<Scalar>& p) {
  NaivePoly r(p.dim());
  for (int rank = 0; rank < p.size(); ++rank)
    if (!p.at(rank).is_zero()) r.add_term(p.table().exponents(rank), p.at(rank));
  return r;
}

// independent full-expansion composition, then truncation
std::vector<NaivePoly> naive_compose(const JetMap& a, const JetMap& b, int k) {
  std::vector<NaivePoly> args;
  for (int i = 0; i < a.dim(); ++i) args.push_back(to_naive(b.comp(i)));
  std::vector<NaivePoly> out;
  for (int i = 0; i < a.dim(); ++i)
    out.push_back(to_naive(a.comp(i)).substitute(args).drop_above(k));
  return out;
}

}  // namespace

TEST_CASE("monomial table is graded-lex and self-consistent") {
  auto tab = MonomialTable::get(2, 2);
  // 1; z1, z2; z1^2, z1 z2, z2^2
  REQUIRE(tab->size() == 6);
  CHECK(tab->exponents(0) == std::vector<int>{0, 0});
  CHECK(tab->exponents(1) == std::vector<int>{1, 0});
  CHECK(tab->exponents(2) == std::vector<int>{0, 1});
  CHECK(tab->exponents(3) == std::vector<int>{2, 0});
  CHECK(tab->exponents(4) == std::vector<int>{1, 1});
  CHECK(tab->exponents(5) == std::vector<int>{0, 2});
  CHECK(tab->product_rank(1, 2) == 4);
  CHECK(tab->product_rank(3, 3) == -1);
  CHECK(tab->degree_begin(2) == 3);
  CHECK(tab->degree_end(2) == 6);
}

TEST_CASE("compose matches identity cases") {
  Rng rng(7);
  JetMap b = random_jet(rng, 2, 3);
  JetMap id = JetMap::identity(2, 3, origin(2));
  CHECK(compose(id, b, 3) == b);
  CHECK(compose(b, id, 3) == b);
}

TEST_CASE("compose matches the spec quadratic example") {
  // A = (z1, z2 + z1^2), B = (z1 + z2^2, z2), both 0 -> 0, order 2
  JetMap a(2, 2, origin(2), origin(2));
  a.comp(0) = TruncPoly<Scalar>::coordinate(2, 2, 0);
  a.comp(1) = TruncPoly<Scalar>::coordinate(2, 2, 1);
  a.comp(1).set({2, 0}, Scalar(1));
  JetMap b(2, 2, origin(2), origin(2));
  b.comp(0) = TruncPoly<Scalar>::coordinate(2, 2, 0);
  b.comp(0).set({0, 2}, Scalar(1));
  b.comp(1) = TruncPoly<Scalar>::coordinate(2, 2, 1);
  JetMap c = compose(a, b, 2);
  // independent oracle: full expansion, drop degree >= 3
  auto expect = naive_compose(a, b, 2);
  for (int i = 0; i < 2; ++i)
    for (int rank = 1; rank < c.comp(i).size(); ++rank)
      CHECK(c.comp(i).at(rank) == expect[i].coeff(c.comp(i).table().exponents(rank)));
  // and the frozen values: (z1 + z2^2, z2 + z1^2)
  CHECK(c.comp(0).coeff({0, 2}) == Scalar(1));
  CHECK(c.comp(1).coeff({2, 0}) == Scalar(1));
  CHECK(c.comp(0).coeff({2, 0}).is_zero());
}

TEST_CASE("linear jets compose as matrix products") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    JetMap a = random_jet(rng, 3, 1);
    JetMap b = random_jet(rng, 3, 1);
    JetMap c = compose(a, b, 1);
    Mat prod = a.linear_part() * b.linear_part();
    CHECK(c.linear_part() == prod);
  }
}

TEST_CASE("compose agrees with the brute-force oracle on random jets") {
  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    int n = 2 + static_cast<int>(rng.below(2));
    int k = 2 + static_cast<int>(rng.below(2));
    JetMap a = random_jet(rng, n, k);
    JetMap b = random_jet(rng, n, k);
    JetMap c = compose(a, b, k);
    auto expect = naive_compose(a, b, k);
    for (int i = 0; i < n; ++i)
      for (int rank = 1; rank < c.comp(i).size(); ++rank)
        CHECK(c.comp(i).at(rank) == expect[i].coeff(c.comp(i).table().exponents(rank)));
  }
}

TEST_CASE("compose is associative (exact)") {
  Rng rng(5);
  for (int t = 0; t < 6; ++t) {
    int k = 3;
    JetMap a = random_jet(rng, 2, k), b = random_jet(rng, 2, k), c = random_jet(rng, 2, k);
    CHECK(compose(a, compose(b, c, k), k) == compose(compose(a, b, k), c, k));
  }
}

TEST_CASE("formal inverse inverts on both sides") {
  Rng rng(31);
  JetMap id = JetMap::identity(2, 3, origin(2));
  CHECK(formal_inverse(id, 3) == id);
  for (int t = 0; t < 8; ++t) {
    JetMap a = random_jet(rng, 2, 3);
    JetMap inv = formal_inverse(a, 3);
    CHECK(compose(a, inv, 3) == id);
    CHECK(compose(inv, a, 3) == id);
  }
  // (z1, z2 + z1^2) -> (z1, z2 - z1^2)
  JetMap a(2, 2, origin(2), origin(2));
  a.comp(0) = TruncPoly<Scalar>::coordinate(2, 2, 0);
  a.comp(1) = TruncPoly<Scalar>::coordinate(2, 2, 1);
  a.comp(1).set({2, 0}, Scalar(1));
  JetMap inv = formal_inverse(a, 2);
  CHECK(inv.comp(1).coeff({2, 0}) == Scalar(-1));
  // linear jet inverts to the matrix inverse
  JetMap lin(2, 1, origin(2), origin(2));
  lin.comp(0) = TruncPoly<Scalar>::coordinate(2, 1, 0).scaled(Scalar(2));
  lin.comp(1) = TruncPoly<Scalar>::coordinate(2, 1, 1).scaled(Scalar::rational(1, 2));
  JetMap linv = formal_inverse(lin, 1);
  CHECK(linv.comp(0).coeff({1, 0}) == Scalar::rational(1, 2));
  CHECK(linv.comp(1).coeff({0, 1}) == Scalar(2));
}

TEST_CASE("degenerate jets are rejected") {
  JetMap a(2, 2, origin(2), origin(2));
  a.comp(0) = TruncPoly<Scalar>::coordinate(2, 2, 0);
  // second row zero -> singular linear part
  CHECK_FALSE(a.nondegenerate());
  CHECK_THROWS_AS(formal_inverse(a, 2), SingularError);
}

TEST_CASE("jacobian determinant jet") {
  // identity -> constant 1
  JetMap id = JetMap::identity(2, 3, origin(2));
  auto dj = jacobian_det_jet(id, 2);
  CHECK(dj.poly.at(0) == Scalar(1));
  CHECK(dj.poly.zero_through(2) == false);  // constant 1 present
  for (int r = 1; r < dj.poly.size(); ++r) CHECK(dj.poly.at(r).is_zero());

  // (z1, z2 e^{z1}) truncated to order 3: det jet to order 2 is 1 + z1 + z1^2/2
  JetMap a(2, 3, origin(2), origin(2));
  a.comp(0) = TruncPoly<Scalar>::coordinate(2, 3, 0);
  a.comp(1) = TruncPoly<Scalar>::coordinate(2, 3, 1);
  a.comp(1).set({1, 1}, Scalar(1));
  a.comp(1).set({2, 1}, Scalar::rational(1, 2));
  auto d = jacobian_det_jet(a, 2);
  CHECK(d.poly.at(0) == Scalar(1));
  CHECK(d.poly.coeff({1, 0}) == Scalar(1));
  CHECK(d.poly.coeff({2, 0}) == Scalar::rational(1, 2));
  CHECK(d.poly.coeff({0, 1}).is_zero());
  CHECK(d.poly.coeff({0, 2}).is_zero());
  CHECK(d.poly.coeff({1, 1}).is_zero());
}

TEST_CASE("chain rule for determinant jets") {
  Rng rng(41);
  for (int t = 0; t < 6; ++t) {
    int k = 3;
    JetMap a = random_jet(rng, 2, k), b = random_jet(rng, 2, k);
    auto lhs = jacobian_det_jet(compose(a, b, k), k - 1);
    auto da = jacobian_det_jet(a, k - 1);
    auto db = jacobian_det_jet(b, k - 1);
    auto da_of_b = scalar_compose(da, b, k - 1);
    auto prod = da_of_b.poly * db.poly;
    CHECK(prod == lhs.poly);
  }
}

TEST_CASE("truncation monotonicity") {
  Rng rng(53);
  int k = 4;
  JetMap a = random_jet(rng, 2, k), b = random_jet(rng, 2, k);
  JetMap full = compose(a, b, k);
  JetMap low = compose(a.truncated(2), b.truncated(2), 2);
  CHECK(full.truncated(2) == low);
}

TEST_CASE("rebase keeps coefficients and moves anchors") {
  Vec a{Scalar(1), Scalar()};
  JetMap j(2, 2, origin(2), origin(2));
  j.comp(0) = TruncPoly<Scalar>::coordinate(2, 2, 0);
  j.comp(1) = TruncPoly<Scalar>::coordinate(2, 2, 1);
  j.comp(1).set({2, 0}, Scalar(1));
  JetMap r = j.rebased(a, a);
  CHECK(vec_equal(r.anchor(), a));
  // evaluation at (1+t, s) gives (1+t, s+t^2): test t = 1/2, s = 3
  Vec z{Scalar(1) + Scalar::rational(1, 2), Scalar(3)};
  Vec img = r.eval(z);
  CHECK(img[0] == z[0]);
  CHECK(img[1] == Scalar(3) + Scalar::rational(1, 4));
  // round trip
  JetMap back = r.rebased(origin(2), origin(2));
  CHECK(back == j);
  // identity rebased stays identity at the new anchor
  JetMap id0 = JetMap::identity(2, 2, origin(2));
  JetMap ida = id0.rebased(a, a);
  CHECK(ida == JetMap::identity(2, 2, a));
}

TEST_CASE("exp of scalar jets: exact series and float constant factor") {
  // exp(z1 + z2) through order 2 = 1 + z1 + z2 + z1^2/2 + z1 z2 + z2^2/2
  ScalarJet<Scalar> s;
  s.anchor = origin(2);
  s.poly = TruncPoly<Scalar>::coordinate(2, 2, 0) + TruncPoly<Scalar>::coordinate(2, 2, 1);
  auto e = exp_jet(s);
  CHECK(e.poly.at(0) == Scalar(1));
  CHECK(e.poly.coeff({1, 0}) == Scalar(1));
  CHECK(e.poly.coeff({2, 0}) == Scalar::rational(1, 2));
  CHECK(e.poly.coeff({1, 1}) == Scalar(1));

  // nonzero exact constant term -> ModeError
  s.poly.at(0) = Scalar(1);
  CHECK_THROWS_AS(exp_jet(s), ModeError);

  // float constant term multiplies by e^c
  s.poly.at(0) = Scalar::floating(1.0, 0.0, 128);
  auto ef = exp_jet(s);
  CHECK(ef.poly.at(0).close_to(Scalar::floating(2.718281828459045, 0.0, 128), 1e-12));
}

TEST_CASE("parametric jets compose and specialize consistently") {
  // A(z) = (z1, z2 + x z1^2) as a family in x
  ParamJet a(2, 2, {XPoly(), XPoly()}, {XPoly(), XPoly()});
  a.comp(0) = TruncPoly<XPoly>::coordinate(2, 2, 0);
  a.comp(1) = TruncPoly<XPoly>::coordinate(2, 2, 1);
  a.comp(1).set({2, 0}, XPoly::variable());
  ParamJet b = a;  // compose the family with itself
  ParamJet c = compose(a, b, 2);
  // specialize at x = 3 and compare against scalar composition
  Scalar x0(3);
  JetMap cs = specialize(c, x0);
  JetMap as = specialize(a, x0);
  JetMap expect = compose(as, as, 2);
  CHECK(cs == expect);
  // parametric inverse with unipotent linear part
  ParamJet inv = formal_inverse(a, 2);
  ParamJet idp = ParamJet::identity(2, 2, {XPoly(), XPoly()});
  CHECK(compose(a, inv, 2) == idp);
}
