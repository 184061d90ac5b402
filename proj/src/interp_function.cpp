#include "shearforge/interp_function.hpp"

#include <algorithm>
#include <cmath>

namespace shearforge {

int real_cmp(const Scalar& a, const Scalar& b) {
  if (a.is_exact() && b.is_exact()) {
    const Rational &x = a.exact().re, &y = b.exact().re;
    if (x < y) return -1;
    if (y < x) return 1;
    return 0;
  }
  mpfr_prec_t p = std::max({kDefaultPrecision, a.precision(), b.precision()});
  Float x = a.to_float(p).approx().re, y = b.to_float(p).approx().re;
  if (x < y) return -1;
  if (y < x) return 1;
  return 0;
}

Scalar real_min(const Scalar& a, const Scalar& b) { return real_cmp(a, b) <= 0 ? a : b; }
Scalar real_max(const Scalar& a, const Scalar& b) { return real_cmp(a, b) >= 0 ? a : b; }

void PlaneBox::validate() const {
  if (real_cmp(re_lo, re_hi) > 0 || real_cmp(im_lo, im_hi) > 0)
    throw Error("empty plane box");
}

namespace {

Scalar cpx(const Scalar& re, const Scalar& im) {
  return re + im * Scalar::rational(Rational(0), Rational(1));
}

// clamp of 0 into [lo, hi] on the real line
Scalar clamp0(const Scalar& lo, const Scalar& hi) {
  if (real_cmp(lo, Scalar()) > 0) return lo;
  if (real_cmp(hi, Scalar()) < 0) return hi;
  return Scalar();
}

// lo + (hi-lo) * i/(res-1), exact for rational bounds
Scalar lerp(const Scalar& lo, const Scalar& hi, int i, int res) {
  if (res <= 1) return (lo + hi) * Scalar::rational(1, 2);
  return lo + (hi - lo) * Scalar::rational(i, res - 1);
}

Scalar cross_im(const Scalar& u, const Scalar& v) {
  // Im(conj(u) v): positive when v lies counterclockwise of u
  return (u.conj() * v).imag_part();
}

}  // namespace

std::vector<Scalar> PlaneBox::corners() const {
  validate();
  return {cpx(re_lo, im_lo), cpx(re_hi, im_lo), cpx(re_hi, im_hi), cpx(re_lo, im_hi)};
}

std::vector<Scalar> PlaneBox::grid(int res) const {
  validate();
  std::vector<Scalar> pts;
  pts.reserve(static_cast<size_t>(res) * res);
  for (int a = 0; a < res; ++a)
    for (int b = 0; b < res; ++b)
      pts.push_back(cpx(lerp(re_lo, re_hi, a, res), lerp(im_lo, im_hi, b, res)));
  return pts;
}

bool PlaneBox::contains_zero() const {
  return real_cmp(re_lo, Scalar()) <= 0 && real_cmp(Scalar(), re_hi) <= 0 &&
         real_cmp(im_lo, Scalar()) <= 0 && real_cmp(Scalar(), im_hi) <= 0;
}

Polygon convex_hull(std::vector<Scalar> pts) {
  if (pts.size() <= 2) return pts;
  std::sort(pts.begin(), pts.end(), [](const Scalar& a, const Scalar& b) {
    int c = real_cmp(a.real_part(), b.real_part());
    if (c != 0) return c < 0;
    return real_cmp(a.imag_part(), b.imag_part()) < 0;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Scalar& a, const Scalar& b) { return a == b; }),
            pts.end());
  if (pts.size() <= 2) return pts;
  auto left_turn = [](const Scalar& o, const Scalar& a, const Scalar& b) {
    return real_cmp(cross_im(a - o, b - o), Scalar()) > 0;
  };
  Polygon hull;
  for (const auto& p : pts) {  // lower chain
    while (hull.size() >= 2 && !left_turn(hull[hull.size() - 2], hull.back(), p))
      hull.pop_back();
    hull.push_back(p);
  }
  size_t lower = hull.size() + 1;
  for (size_t i = pts.size() - 1; i-- > 0;) {  // upper chain
    const auto& p = pts[i];
    while (hull.size() >= lower && !left_turn(hull[hull.size() - 2], hull.back(), p))
      hull.pop_back();
    hull.push_back(p);
  }
  hull.pop_back();
  return hull;
}

bool polygon_contains_zero(const Polygon& poly) {
  if (poly.empty()) return false;
  if (poly.size() == 1) return poly[0].is_zero();
  if (poly.size() == 2) {
    Scalar d = poly[1] - poly[0];
    if (!cross_im(d, -poly[0]).is_zero()) return false;
    Scalar t = (-poly[0] * d.conj()).real_part();
    return real_cmp(t, Scalar()) >= 0 && real_cmp(t, d.abs2()) <= 0;
  }
  for (size_t i = 0; i < poly.size(); ++i) {
    const Scalar& a = poly[i];
    const Scalar& b = poly[(i + 1) % poly.size()];
    if (real_cmp(cross_im(b - a, -a), Scalar()) < 0) return false;
  }
  return true;
}

Scalar polygon_nearest_to_zero(const Polygon& poly) {
  if (poly.empty()) throw Error("nearest point of an empty polygon");
  if (polygon_contains_zero(poly)) throw ConstraintError("region contains or touches 0");
  Scalar best = poly[0];
  Scalar best2 = best.abs2();
  auto consider = [&](const Scalar& p) {
    Scalar p2 = p.abs2();
    if (real_cmp(p2, best2) < 0) {
      best = p;
      best2 = p2;
    }
  };
  const size_t m = poly.size();
  for (size_t i = 0; i < m; ++i) {
    const Scalar& a = poly[i];
    consider(a);
    if (m == 1) break;
    const Scalar& b = poly[(i + 1) % m];
    Scalar d = b - a;
    Scalar dd = d.abs2();
    if (dd.is_zero()) continue;
    // projection parameter of 0 onto the segment, interior points only
    Scalar t = (-a * d.conj()).real_part() / dd;
    if (real_cmp(t, Scalar()) > 0 && real_cmp(t, Scalar(1)) < 0) consider(a + d * t);
  }
  return best;
}

std::vector<Scalar> polygon_sample(const Polygon& poly, int res) {
  std::vector<Scalar> pts(poly);
  const size_t m = poly.size();
  if (m >= 2) {
    for (size_t i = 0; i < m; ++i) {
      const Scalar& a = poly[i];
      const Scalar& b = poly[(i + 1) % m];
      for (int t = 1; t < res; ++t)
        pts.push_back(a + (b - a) * Scalar::rational(t, res));
    }
  }
  if (m >= 3) {
    Scalar centroid;
    for (const auto& p : poly) centroid += p;
    centroid = centroid * Scalar::rational(1, static_cast<long>(m));
    size_t boundary = pts.size();
    for (size_t i = 0; i < boundary; ++i)
      for (int t = 1; t < 4; ++t)
        pts.push_back(centroid + (pts[i] - centroid) * Scalar::rational(t, 4));
  }
  return pts;
}

std::pair<Scalar, Scalar> separating_direction(const PlaneBox& K) {
  K.validate();
  Scalar c = cpx(clamp0(K.re_lo, K.re_hi), clamp0(K.im_lo, K.im_hi));
  if (c.is_zero()) throw ConstraintError("K contains or touches 0");
  // theta = 0 is exact when the nearest point sits on the positive real axis
  if (c.imag_part().is_zero() && real_cmp(c.real_part(), Scalar()) > 0 && c.is_exact())
    return {Scalar(), c.real_part()};
  mpfr_prec_t p = std::max(kDefaultPrecision, c.precision());
  Scalar cf = c.to_float(p);
  Float theta = Float::atan2(cf.approx().im, cf.approx().re);
  Float margin = cf.abs_float(p);
  return {Scalar::floating(std::move(theta), Float(p)),
          Scalar::floating(std::move(margin), Float(p))};
}

namespace {

template <class R>
UniPoly<R> lift_poly(const UniPoly<Scalar>& p) {
  if constexpr (RingOps<R>::parametric) {
    std::vector<XPoly> c;
    c.reserve(p.coeffs().size());
    for (const auto& s : p.coeffs()) c.push_back(XPoly::constant(s));
    return UniPoly<XPoly>(std::move(c));
  } else {
    return p;
  }
}

// real upper bound for |z| as a scalar (rational in exact mode)
Scalar abs_upper_scalar(const Scalar& z) {
  if (z.is_exact()) return Scalar::rational(z.abs_upper());
  mpfr_prec_t p = z.precision();
  return Scalar::floating(z.abs_float(p), Float(p));
}

template <class R>
mpfr_prec_t beta_precision(const R& beta) {
  if constexpr (RingOps<R>::parametric) {
    mpfr_prec_t p = 0;
    for (const auto& c : beta.coeffs()) p = std::max(p, c.precision());
    return p;
  } else {
    return beta.precision();
  }
}

UniPoly<Scalar> promote_poly(const UniPoly<Scalar>& f, mpfr_prec_t prec) {
  std::vector<Scalar> c;
  c.reserve(f.coeffs().size());
  for (const auto& s : f.coeffs()) c.push_back(s.to_float(prec));
  return UniPoly<Scalar>(std::move(c));
}

// float-evaluated grid maximum from the factored form; stable at any power
template <class R>
Scalar fn_grid_max_abs2_float(const ShearFn<R>& f, const std::vector<Scalar>& pts,
                              const std::vector<Scalar>& param_grid,
                              mpfr_prec_t prec) {
  Float best(prec);
  auto run = [&](const ShearFn<Scalar>& g) {
    for (const auto& p : pts) {
      Float m = eval_fn(g, p.to_float(prec)).abs2().to_float(prec).approx().re;
      if (best < m) best = m;
    }
  };
  if constexpr (RingOps<R>::parametric) {
    std::vector<Scalar> xs = param_grid;
    if (xs.empty()) xs.push_back(Scalar());
    for (const auto& x : xs) run(specialize(f, x));
  } else {
    (void)param_grid;
    run(f);
  }
  return Scalar::floating(best, Float(prec));
}

}  // namespace

template <class R>
Scalar grid_max_abs2(const UniPoly<R>& f, const std::vector<Scalar>& pts,
                     const std::vector<Scalar>& param_grid) {
  Scalar best;
  if constexpr (RingOps<R>::parametric) {
    std::vector<Scalar> grid = param_grid;
    if (grid.empty()) grid.push_back(Scalar());
    for (const auto& x : grid) {
      UniPoly<Scalar> fx = specialize(f, x);
      for (const auto& p : pts) best = real_max(best, fx.eval(p).abs2());
    }
  } else {
    (void)param_grid;
    for (const auto& p : pts) best = real_max(best, f.eval(p).abs2());
  }
  return best;
}

template <class R>
ShearFn<R> build_interp_core(const R& beta, int r, const Scalar& zeta0,
                             const InterpConstraints& cons,
                             const std::optional<SmallnessTarget>& small) {
  if (r < 0) throw Error("negative leading order");
  if (beta.is_zero()) return ShearFn<R>();
  std::vector<Scalar> all;
  for (const auto& [p, o] : cons.vanish) {
    if ((p - zeta0).is_zero())
      throw ConstraintError("vanish point collides with the working anchor");
    if (o < 1) throw Error("vanishing order must be >= 1");
    all.push_back(p);
  }
  for (const auto& z : cons.zeros) {
    if ((z - zeta0).is_zero())
      throw ConstraintError("zero point collides with the working anchor");
    all.push_back(z);
  }
  for (size_t i = 0; i < all.size(); ++i)
    for (size_t j = i + 1; j < all.size(); ++j)
      if (all[i] == all[j]) throw ConstraintError("coincident constraint points");

  std::vector<std::pair<Scalar, int>> roots;
  if (r > 0) roots.push_back({zeta0, r});
  Scalar h_at(1);  // value of the constraint product at zeta0
  for (const auto& [p, o] : cons.vanish) {
    roots.push_back({p, o});
    h_at = h_at * pow_scalar(zeta0 - p, o);
  }
  for (const auto& z : cons.zeros) {
    roots.push_back({z, 1});
    h_at = h_at * (zeta0 - z);
  }

  if (!small) {
    R scale = RingOps<R>::mul_scalar(beta, h_at.inverse());
    return ShearFn<R>(UniPoly<R>::constant(std::move(scale)), std::move(roots),
                      UniPoly<Scalar>(), 0);
  }

  const auto& sm = *small;
  if (sm.region.empty()) throw Error("empty smallness region");
  if (real_cmp(sm.eps, Scalar()) <= 0) throw Error("eps must be positive");
  Scalar eps2 = sm.eps * sm.eps;

  // geometry in the frame shifted to the anchor
  Polygon shifted;
  shifted.reserve(sm.region.size());
  for (const auto& v : sm.region) shifted.push_back(v - zeta0);
  if (polygon_contains_zero(shifted))
    throw ConstraintError("region image touches the working anchor");
  Scalar c = polygon_nearest_to_zero(shifted);

  bool float_ctx = !sm.eps.is_exact() || !c.is_exact() || !zeta0.is_exact();
  if constexpr (RingOps<R>::parametric) {
    for (const auto& xc : beta.coeffs())
      if (!xc.is_exact()) float_ctx = true;
  } else {
    if (!beta.is_exact()) float_ctx = true;
  }
  const mpfr_prec_t prec_ctx =
      std::max(kDefaultPrecision, std::max(beta_precision(beta), sm.eps.precision()));
  const mpfr_prec_t prec = std::max<mpfr_prec_t>(256, prec_ctx);

  Scalar beta_bound = sm.weight_bound;
  if (beta_bound.is_zero()) {
    if constexpr (RingOps<R>::parametric)
      throw Error("parametric smallness needs an explicit weight bound");
    else
      beta_bound = abs_upper_scalar(beta);
  }

  std::vector<Scalar> check_pts =
      sm.check_points.empty() ? polygon_sample(sm.region, sm.grid_res) : sm.check_points;

  // numeric estimate of max |(zeta-zeta0)^r h / h_at| over the sample; the
  // grid check below is the certificate, this only sizes the degree
  Float g_est(prec);
  {
    ShearFn<Scalar> probe(
        UniPoly<Scalar>::constant(h_at.inverse().to_float(prec)), roots,
        UniPoly<Scalar>(), 0);
    for (const auto& pt : check_pts) {
      Float m = eval_fn(probe, pt.to_float(prec)).abs_float(prec);
      if (g_est < m) g_est = m;
    }
  }
  Float gb = g_est * beta_bound.abs_float(prec) * Float::of(16.0, prec);
  if (gb.is_zero()) gb = Float::of(1e-300, prec);

  Float cr = c.abs_float(prec);
  Float rr(prec);
  for (const auto& v : shifted) {
    Float m = v.abs_float(prec);
    if (rr < m) rr = m;
  }

  // pick the separator scale s minimizing the vertex contraction factor
  auto vertex_q2 = [&](const Float& s) {
    Float best(prec);
    for (const auto& v : shifted) {
      Scalar u = Scalar::floating(Float::of(1.0, prec), Float(prec)) -
                 Scalar::floating(s, Float(prec)) * c.conj().to_float(prec) *
                     v.to_float(prec);
      Float m = u.abs2().to_float(prec).approx().re;
      if (best < m) best = m;
    }
    return best;
  };
  Float s_base = Float::of(1.0, prec) / (cr * rr);
  Float s_best = Float::of(1.0, prec) / (rr * rr);
  Float q2_best = vertex_q2(s_best);
  for (int j = -4; j <= 10; ++j) {
    double scale = std::pow(2.0, j * 0.5);
    Float cand = s_base * Float::of(scale, prec);
    Float q2 = vertex_q2(cand);
    if (q2 < q2_best) {
      q2_best = q2;
      s_best = cand;
    }
  }

  const Scalar half = Scalar::rational(1, 2);
  Scalar s = float_ctx ? Scalar::floating(s_best, Float(prec)).to_float(prec_ctx)
                       : Scalar::rational(s_best.to_rational());

  for (int attempt = 0; attempt < 32; ++attempt) {
    // u(zeta) = 1 - s conj(c) (zeta - zeta0)
    Scalar slope = -(s * c.conj());
    UniPoly<Scalar> u(std::vector<Scalar>{Scalar(1) - slope * zeta0, slope});
    Scalar q2;
    for (const auto& v : sm.region) q2 = real_max(q2, u.eval(v).abs2());
    Scalar u_at = u.eval(zeta0);
    if (real_cmp(q2, Scalar(1)) >= 0 || u_at.is_zero()) {
      s = s * half;
      continue;
    }
    // smallest M with (gb q^M)^2 <= (eps/2)^2, via logarithms
    Float q2f = q2.to_float(prec).approx().re;
    Float target = (sm.eps * half).abs_float(prec);
    Float mf = (target.log() - gb.log()) / (q2f.log() * Float::of(0.5, prec));
    double md = mf.to_double();
    const long m_cap = float_ctx ? 20000 : 600;
    long m;
    if (!(md >= 0))
      m = 0;  // also catches non-finite ratios
    else if (md > static_cast<double>(m_cap))
      m = m_cap + 1;
    else
      m = static_cast<long>(md) + 1;
    if (m > m_cap)
      throw ConstraintError(
          "eps unreachable: smallness degree cap exceeded (consider float mode or a "
          "smaller region)");
    R scale =
        RingOps<R>::mul_scalar(beta, (h_at * pow_scalar(u_at, m)).inverse());
    ShearFn<R> f(UniPoly<R>::constant(std::move(scale)), roots, u, m);
    Scalar measured = fn_grid_max_abs2_float(f, check_pts, sm.param_grid, prec);
    if (real_cmp(measured, eps2) <= 0) return f;
    s = s * half;
  }
  throw ConstraintError("eps unreachable within the retry cap");
}

UniPoly<Scalar> build_interp_function(const Scalar& beta, int r,
                                      const std::vector<std::pair<Scalar, int>>& vanish,
                                      const std::vector<Scalar>& zeros,
                                      const std::optional<PlaneBox>& K,
                                      const std::optional<Scalar>& eps) {
  InterpConstraints cons{vanish, zeros};
  std::optional<SmallnessTarget> small;
  if (eps) {
    if (!K) throw Error("eps constraint needs a region K");
    if (K->contains_zero()) throw ConstraintError("K contains or touches 0");
    SmallnessTarget t;
    t.region = K->corners();
    t.eps = *eps;
    // spec verification grid for rectangles: 65x65 plus the four corners
    t.check_points = K->grid(65);
    auto cs = K->corners();
    t.check_points.insert(t.check_points.end(), cs.begin(), cs.end());
    small = std::move(t);
  }
  return build_interp_core<Scalar>(beta, r, Scalar(), cons, small).expanded();
}

template ShearFn<Scalar> build_interp_core<Scalar>(const Scalar&, int, const Scalar&,
                                                   const InterpConstraints&,
                                                   const std::optional<SmallnessTarget>&);
template ShearFn<XPoly> build_interp_core<XPoly>(const XPoly&, int, const Scalar&,
                                                 const InterpConstraints&,
                                                 const std::optional<SmallnessTarget>&);
template Scalar grid_max_abs2<Scalar>(const UniPoly<Scalar>&, const std::vector<Scalar>&,
                                      const std::vector<Scalar>&);
template Scalar grid_max_abs2<XPoly>(const UniPoly<XPoly>&, const std::vector<Scalar>&,
                                     const std::vector<Scalar>&);

}  // namespace shearforge
