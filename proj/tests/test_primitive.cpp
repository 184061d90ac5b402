#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shearforge/primitive.hpp"
#include "shearforge/rng.hpp"

using namespace shearforge;

namespace {

Vec origin(int n) { return Vec(n, Scalar()); }

LinForm form_z1(int n) {
  LinForm f;
  f.coeffs = origin(n);
  f.coeffs[0] = Scalar(1);
  return f;
}

Vec e2(int n) {
  Vec v = origin(n);
  v[1] = Scalar(1);
  return v;
}

Vec random_point(Rng& rng, int n) {
  Vec z(n);
  for (int i = 0; i < n; ++i)
    z[i] = Scalar::rational(Rational(rng.range(-5, 5), rng.range(1, 3)),
                            Rational(rng.range(-5, 5), rng.range(1, 3)));
  return z;
}

Primitive<Scalar> random_shear(Rng& rng, int n) {
  LinForm f;
  f.coeffs = random_point(rng, n);
  if (f.is_zero()) f.coeffs[0] = Scalar(1);
  Vec u = random_point(rng, n), w = random_point(rng, n);
  Vec dir = vec_sub(vec_scale(u, f(w)), vec_scale(w, f(u)));
  if (vec_is_zero(dir)) {
    // retry with a fixed independent pair
    dir = vec_sub(vec_scale(e2(n), f(form_z1(n).coeffs)), origin(n));
  }
  std::vector<Scalar> c;
  int deg = 1 + static_cast<int>(rng.below(3));
  for (int d = 0; d <= deg; ++d) c.push_back(Scalar::rational(rng.range(-3, 3), 2));
  return make_shear(std::move(f), std::move(dir), UniPoly<Scalar>(std::move(c)));
}

}  // namespace

TEST_CASE("shear evaluation matches direct substitution") {
  // f(zeta) = zeta^2, form z1, dir (0,1): (2,0) -> (2,4)
  auto g = make_shear(form_z1(2), e2(2), UniPoly<Scalar>::monomial(2, Scalar(1)));
  Vec img = primitive_eval(g, Vec{Scalar(2), Scalar()});
  CHECK(img[0] == Scalar(2));
  CHECK(img[1] == Scalar(4));
  // f == 0 -> identity
  auto h = make_shear(form_z1(2), e2(2), UniPoly<Scalar>());
  Vec z{Scalar(3), Scalar(5)};
  CHECK(vec_equal(primitive_eval(h, z), z));
}

TEST_CASE("translation and linear primitives evaluate") {
  Primitive<Scalar> t = Translation<Scalar>{Vec{Scalar(1), Scalar(-2)}};
  CHECK(vec_equal(primitive_eval(t, Vec{Scalar(1), Scalar(1)}), Vec{Scalar(2), Scalar(-1)}));
  Mat m(2);
  m(0, 0) = Scalar(2);
  m(1, 1) = Scalar::rational(1, 2);
  Primitive<Scalar> lin = LinearMap<Scalar>{m};
  Primitive<Scalar> inv = primitive_inverse(lin);
  const auto& li = std::get<LinearMap<Scalar>>(inv);
  CHECK(li.m(0, 0) == Scalar::rational(1, 2));
  CHECK(li.m(1, 1) == Scalar(2));
}

TEST_CASE("inverse cancels exactly on random rational points") {
  Rng rng(97);
  for (int t = 0; t < 100; ++t) {
    int n = 2 + static_cast<int>(rng.below(2));
    Primitive<Scalar> g = random_shear(rng, n);
    Primitive<Scalar> gi = primitive_inverse(g);
    Vec z = random_point(rng, n);
    CHECK(vec_equal(primitive_eval(gi, primitive_eval(g, z)), z));
    // structural double inverse
    const auto& s = std::get<Shear<Scalar>>(g);
    Primitive<Scalar> gii = primitive_inverse(gi);
    const auto& s2 = std::get<Shear<Scalar>>(gii);
    CHECK(s.fn == s2.fn);
    CHECK(vec_equal(s.dir, s2.dir));
  }
}

TEST_CASE("lambda-invariance of shears and overshears") {
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    int n = 2;
    Primitive<Scalar> g = random_shear(rng, n);
    Vec z = random_point(rng, n);
    const auto& s = std::get<Shear<Scalar>>(g);
    CHECK(s.form(primitive_eval(g, z)) == s.form(z));
  }
  // float overshear keeps its form value to working precision
  auto ov = make_overshear(form_z1(2), e2(2),
                           UniPoly<Scalar>::monomial(1, Scalar::floating(0.25, 0.0, 128)));
  Vec z{Scalar::floating(1.5, 0.5, 128), Scalar::floating(-2.0, 1.0, 128)};
  Vec img = primitive_eval(ov, z);
  CHECK(std::get<Overshear<Scalar>>(ov).form(img) == std::get<Overshear<Scalar>>(ov).form(z));
}

TEST_CASE("overshear evaluation requires float mode and inverts") {
  auto ov = make_overshear(form_z1(2), e2(2), UniPoly<Scalar>::monomial(1, Scalar(1)));
  CHECK_THROWS_AS(primitive_eval(ov, Vec{Scalar(1), Scalar(1)}), ModeError);
  Vec z{Scalar::floating(0.7, -0.3, 128), Scalar::floating(1.2, 0.4, 128)};
  Vec img = primitive_eval(ov, z);
  Vec back = primitive_eval(primitive_inverse(ov), img);
  CHECK(vec_close(back, z, default_tolerance(128)));
  // z1-scaling form: image of (a, b) is (a, b e^{f(a)})
  Vec w{Scalar::floating(2.0, 0.0, 128), Scalar::floating(1.0, 0.0, 128)};
  Vec imgw = primitive_eval(ov, w);
  Scalar expected = Scalar::floating(2.0, 0.0, 128).exp();  // f(2) = 2
  CHECK(imgw[1].close_to(expected, default_tolerance(128)));
}

TEST_CASE("word evaluation folds right to left") {
  Word w;
  w.n = 2;
  CHECK(vec_equal(word_eval(w, Vec{Scalar(4), Scalar(5)}), Vec{Scalar(4), Scalar(5)}));
  Rng rng(3);
  Primitive<Scalar> g = random_shear(rng, 2);
  w.factors = {g, primitive_inverse(g)};
  Vec z = random_point(rng, 2);
  CHECK(vec_equal(word_eval(w, z), z));
}

TEST_CASE("word jets: empty word, monomial shear, identity-to-order overshear") {
  Word w;
  w.n = 2;
  JetMap j = word_jet(w, Vec{Scalar(1), Scalar(2)}, 3);
  CHECK(j == JetMap::identity(2, 3, Vec{Scalar(1), Scalar(2)}));

  // single shear f = c zeta^r at 0, order r: z + c z1^r e2
  Scalar c = Scalar::rational(3, 2);
  int r = 3;
  Word ws;
  ws.n = 2;
  ws.factors.push_back(make_shear(form_z1(2), e2(2), UniPoly<Scalar>::monomial(r, c)));
  JetMap js = word_jet(ws, origin(2), r);
  CHECK(js.comp(0) == TruncPoly<Scalar>::coordinate(2, r, 0));
  TruncPoly<Scalar> expect = TruncPoly<Scalar>::coordinate(2, r, 1);
  expect.set({r, 0}, c);
  CHECK(js.comp(1) == expect);

  // overshear with f vanishing to order N at form(a): jet at a is identity to order N
  int N = 3;
  // f(zeta) = (zeta - 2)^N * 1/4 (float): vanishes to order N at a = (2, 0)
  UniPoly<Scalar> shifted = UniPoly<Scalar>::monomial(N, Scalar::floating(0.25, 0.0, 128));
  UniPoly<Scalar> fn = shifted.taylor_shift(Scalar(-2));
  Word wo;
  wo.n = 2;
  wo.factors.push_back(make_overshear(form_z1(2), e2(2), fn));
  Vec a{Scalar::floating(2.0, 0.0, 128), Scalar::floating(0.0, 0.0, 128)};
  JetMap jo = word_jet(wo, a, N - 1);
  JetMap ida = JetMap::identity(2, N - 1, a);
  for (int i = 0; i < 2; ++i)
    for (int rank = 0; rank < jo.comp(i).size(); ++rank)
      CHECK((jo.comp(i).at(rank) - ida.comp(i).at(rank)).magnitude() < 1e-30);
}

TEST_CASE("word_jet equals the chain of factor jets computed separately") {
  Rng rng(71);
  Word w;
  w.n = 2;
  for (int i = 0; i < 4; ++i) w.factors.push_back(random_shear(rng, 2));
  Vec p = random_point(rng, 2);
  int k = 3;
  JetMap whole = word_jet(w, p, k);
  JetMap acc = JetMap::identity(2, k, p);
  for (size_t i = w.factors.size(); i-- > 0;)
    acc = compose(primitive_jet(w.factors[i], acc.value(), k), acc, k);
  CHECK(whole == acc);
}

TEST_CASE("shear-only words have constant determinant jet one") {
  Rng rng(19);
  Word w;
  w.n = 3;
  for (int i = 0; i < 3; ++i) w.factors.push_back(random_shear(rng, 3));
  JetMap j = word_jet(w, origin(3), 3);
  auto det = jacobian_det_jet(j, 2);
  CHECK(det.poly.at(0) == Scalar(1));
  for (int rank = 1; rank < det.poly.size(); ++rank) CHECK(det.poly.at(rank).is_zero());
}

TEST_CASE("overshear determinant jet is the truncated exp of f o form") {
  auto fn = UniPoly<Scalar>::monomial(1, Scalar::floating(0.5, 0.0, 128));
  Word w;
  w.n = 2;
  w.factors.push_back(make_overshear(form_z1(2), e2(2), fn));
  Vec p{Scalar::floating(0.3, 0.0, 128), Scalar::floating(0.2, 0.0, 128)};
  int k = 3;
  JetMap j = word_jet(w, p, k);
  auto det = jacobian_det_jet(j, k - 1);
  // expected: exp of the scalar jet of f(form(z)) at p
  ScalarJet<Scalar> s;
  s.anchor = p;
  s.poly = TruncPoly<Scalar>::coordinate(2, k - 1, 0).scaled(Scalar::floating(0.5, 0.0, 128));
  s.poly.at(0) = fn.eval(std::get<Overshear<Scalar>>(w.factors[0]).form(p));
  auto expect = exp_jet(s);
  for (int rank = 0; rank < det.poly.size(); ++rank)
    CHECK((det.poly.at(rank) - expect.poly.at(rank)).magnitude() < 1e-35);
}

TEST_CASE("overshear jets in exact mode are rejected") {
  auto ov = make_overshear(form_z1(2), e2(2), UniPoly<Scalar>::monomial(1, Scalar(1)));
  Word w;
  w.n = 2;
  w.factors.push_back(ov);
  CHECK_THROWS_AS(word_jet(w, Vec{Scalar(1), Scalar()}, 2), ModeError);
}

TEST_CASE("parametric shears specialize consistently with their jets") {
  // f(x; zeta) = x zeta: family of shears z + x z1 e2
  UniPoly<XPoly> fn = UniPoly<XPoly>::monomial(1, XPoly::variable());
  ParamWord w;
  w.n = 2;
  w.factors.push_back(make_shear<XPoly>(form_z1(2), e2(2), fn));
  std::vector<XPoly> anchor{XPoly(), XPoly()};
  ParamJet pj = word_jet(w, anchor, 2);
  Scalar x0 = Scalar::rational(5, 2);
  JetMap specialized = specialize(pj, x0);
  Word ws = specialize(w, x0);
  JetMap direct = word_jet(ws, origin(2), 2);
  CHECK(specialized == direct);
}
