#include "shearforge/lindecomp.hpp"

namespace shearforge {

std::vector<std::pair<char, int>> transvection_blocks(
    const std::vector<Transvection<Scalar>>& ts) {
  std::vector<std::pair<char, int>> out;
  for (const auto& t : ts) {
    char tri = t.row > t.col ? 'L' : 'U';
    if (!out.empty() && out.back().first == tri)
      out.back().second += 1;
    else
      out.push_back({tri, 1});
  }
  return out;
}

namespace {

bool scalar_is_one(const Scalar& s, double tol) {
  return s.is_exact() ? s == Scalar(1) : s.close_to(Scalar(1), tol);
}

}  // namespace

std::vector<Transvection<Scalar>> sln_to_transvections(const Mat& q, double tol) {
  const int n = q.dim();
  Mat m = q;
  Scalar det = m.det();
  if (det.is_exact()) {
    if (!(det == Scalar(1))) throw Error("matrix determinant is not 1");
  } else {
    if (!det.close_to(Scalar(1), tol)) throw Error("matrix determinant is not 1");
    if (!(det == Scalar(1).to_float(det.precision()))) {
      // renormalize by det^{-1/n}
      Scalar scale = (det.log() * Scalar::rational(-1, n)).exp();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = m(i, j) * scale;
    }
  }

  std::vector<Transvection<Scalar>> ops;  // recorded as left-multiplications
  auto row_add = [&](int dst, int src, const Scalar& c) {
    if (c.is_zero()) return;
    for (int j = 0; j < n; ++j) m(dst, j) = m(dst, j) + c * m(src, j);
    ops.push_back({dst, src, c});
  };

  for (int j = 0; j < n - 1; ++j) {
    if (m(j, j).is_zero()) {
      int piv = -1;
      for (int i = j + 1; i < n; ++i)
        if (!m(i, j).is_zero()) {
          piv = i;
          break;
        }
      if (piv < 0) throw SingularError("matrix is singular");
      row_add(j, piv, Scalar(1));
    }
    if (!scalar_is_one(m(j, j), 0.0)) {
      int aux = j + 1;
      if (m(aux, j).is_zero()) row_add(aux, j, Scalar(1));
      row_add(j, aux, (Scalar(1) - m(j, j)) / m(aux, j));
    }
    for (int i = 0; i < n; ++i) {
      if (i == j || m(i, j).is_zero()) continue;
      row_add(i, j, -(m(i, j) / m(j, j)));
    }
  }
  // remaining column n-1: diagonal is det = 1; clear everything above
  for (int i = 0; i < n - 1; ++i)
    if (!m(i, n - 1).is_zero()) row_add(i, n - 1, -(m(i, n - 1) / m(n - 1, n - 1)));

  // ops reduce m to I, so q = inv(op_1) ... inv(op_t)
  std::vector<Transvection<Scalar>> out;
  out.reserve(ops.size());
  for (const auto& t : ops) out.push_back({t.row, t.col, -t.amount});
  return out;
}

namespace {

bool xpoly_is_zero(const XPoly& p, double tol) {
  for (const auto& c : p.coeffs())
    if (!(c.is_exact() ? c.is_zero() : c.close_to(Scalar(), tol))) return false;
  return true;
}

}  // namespace

std::vector<Transvection<XPoly>> sl2_polyring_to_transvections(const PolyMat& m0,
                                                               double tol) {
  if (m0.dim() != 2) throw DimensionError("polynomial-ring reduction handles 2x2 only");
  XPoly det = m0.det();
  if (!xpoly_is_zero(det - XPoly(1), tol))
    throw Error("matrix determinant is not 1 as a polynomial");

  PolyMat m = m0;
  std::vector<Transvection<XPoly>> ops;  // left multiplications
  auto row_add = [&](int dst, int src, const XPoly& c) {
    if (c.is_zero()) return;
    for (int j = 0; j < 2; ++j) m(dst, j) = m(dst, j) + c * m(src, j);
    ops.push_back({dst, src, c});
  };

  // Euclidean reduction of the first column (a, c) = (m00, m10): kill c,
  // borrowing it into a via the gadget row when a runs out
  for (int guard = 0; guard < 1000; ++guard) {
    if (m(1, 0).is_zero()) break;
    if (m(0, 0).is_zero()) {
      row_add(0, 1, XPoly(1));
      continue;
    }
    if (m(1, 0).degree() >= m(0, 0).degree()) {
      auto [quot, rem] = divmod(m(1, 0), m(0, 0));
      row_add(1, 0, -quot);
      // force the exact remainder pattern when float rounding leaves dust
      m(1, 0) = rem;
    } else {
      auto [quot, rem] = divmod(m(0, 0), m(1, 0));
      row_add(0, 1, -quot);
      m(0, 0) = rem;
    }
  }
  if (!m(1, 0).is_zero()) throw Error("euclidean reduction did not terminate");
  // m = [[u, b], [0, d]] with u d = 1, so u is a nonzero constant
  if (m(0, 0).degree() != 0) throw Error("unit diagonal expected after reduction");
  Scalar u = m(0, 0).coeff(0);
  XPoly b = m(0, 1);

  std::vector<Transvection<XPoly>> out;
  out.reserve(ops.size() + 7);
  for (const auto& t : ops) out.push_back({t.row, t.col, -t.amount});
  // tail: m = E12(b u) diag(u, 1/u); diag(u,1/u) = w(u) w(-1)
  XPoly bu = b.scaled(u);
  if (!bu.is_zero()) out.push_back({0, 1, bu});
  if (!scalar_is_one(u, 0.0)) {
    Scalar uinv = u.inverse();
    out.push_back({0, 1, XPoly::constant(u)});
    out.push_back({1, 0, XPoly::constant(-uinv)});
    out.push_back({0, 1, XPoly::constant(u)});
    out.push_back({0, 1, XPoly::constant(Scalar(-1))});
    out.push_back({1, 0, XPoly::constant(Scalar(1))});
    out.push_back({0, 1, XPoly::constant(Scalar(-1))});
  }
  return out;
}

namespace {

Scalar small_gaussian(Rng& rng, long lo, long hi) {
  return Scalar::rational(Rational(rng.range(lo, hi)), Rational(rng.range(lo, hi)));
}

LinForm random_form(Rng& rng, int n) {
  LinForm f;
  f.coeffs.resize(n);
  long s0 = rng.coin() ? 1 : -1;
  f.coeffs[0] =
      Scalar::rational(Rational(s0 * rng.range(4, 6)), Rational(rng.range(-6, 6)));
  for (int i = 1; i < n; ++i) f.coeffs[i] = small_gaussian(rng, -1, 1);
  return f;
}

bool form_ok(const LinForm& f, const Scalar& margin2, const std::vector<Vec>& avoid) {
  Scalar head = f.coeffs[0].abs2();
  Scalar total;
  for (const auto& c : f.coeffs) total += c.abs2();
  if (real_cmp(head, margin2 * total) < 0) return false;
  for (const auto& a : avoid)
    if (f(a).is_zero()) return false;
  return true;
}

}  // namespace

DualBasis sample_dual_basis(int n, const std::vector<Vec>& avoid,
                            const Scalar& axis_margin, Rng& rng,
                            const std::optional<Vec>& orth) {
  Scalar margin2 = axis_margin * axis_margin;
  for (int round = 0; round < 256; ++round) {
    DualBasis basis;
    basis.forms.resize(n);
    // optional vectors[1] Hermitian-orthogonal to `orth`
    Vec e2;
    if (orth && !vec_is_zero(*orth)) {
      const Vec& p = *orth;
      Scalar p2 = norm2(p);
      bool got = false;
      for (int t = 0; t < 50 && !got; ++t) {
        Vec u(n);
        for (int i = 0; i < n; ++i) u[i] = small_gaussian(rng, -3, 3);
        Vec cand = vec_sub(u, vec_scale(p, herm(u, p) / p2));
        if (!vec_is_zero(cand)) {
          e2 = cand;
          got = true;
        }
      }
      if (!got) continue;
      // forms: lambda_1(e2) = 1, others lambda(e2) = 0
      LinForm l2;
      bool ok2 = false;
      for (int t = 0; t < 100 && !ok2; ++t) {
        LinForm cand = random_form(rng, n);
        Scalar v = cand(e2);
        if (v.is_zero()) continue;
        for (auto& c : cand.coeffs) c = c / v;
        if (form_ok(cand, margin2, avoid)) {
          l2 = cand;
          ok2 = true;
        }
      }
      if (!ok2) continue;
      basis.forms[1] = l2;
      bool all_ok = true;
      for (int m = 0; m < n && all_ok; ++m) {
        if (m == 1) continue;
        bool okm = false;
        for (int t = 0; t < 100 && !okm; ++t) {
          LinForm cand = random_form(rng, n);
          Scalar v = cand(e2);
          LinForm proj;
          proj.coeffs.resize(n);
          for (int i = 0; i < n; ++i) proj.coeffs[i] = cand.coeffs[i] - v * l2.coeffs[i];
          if (proj.is_zero()) continue;
          if (form_ok(proj, margin2, avoid)) {
            basis.forms[m] = proj;
            okm = true;
          }
        }
        if (!okm) all_ok = false;
      }
      if (!all_ok) continue;
    } else {
      bool all_ok = true;
      for (int m = 0; m < n && all_ok; ++m) {
        bool okm = false;
        for (int t = 0; t < 100 && !okm; ++t) {
          LinForm cand = random_form(rng, n);
          if (form_ok(cand, margin2, avoid)) {
            basis.forms[m] = cand;
            okm = true;
          }
        }
        if (!okm) all_ok = false;
      }
      if (!all_ok) continue;
    }
    // invert the form matrix to get the dual vectors
    Mat lambda(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lambda(i, j) = basis.forms[i].coeffs[j];
    Mat inv;
    try {
      inv = mat_inverse(lambda);
    } catch (const SingularError&) {
      continue;
    }
    basis.vectors.assign(n, Vec(n));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) basis.vectors[j][i] = inv(i, j);
    if (orth && !vec_is_zero(*orth) && !herm(basis.vectors[1], *orth).is_zero()) continue;
    return basis;
  }
  throw ConstraintError("dual basis sampling failed: avoidance constraints");
}

Polygon form_image(const LinForm& form, const std::vector<Vec>& region_corners) {
  std::vector<Scalar> imgs;
  imgs.reserve(region_corners.size());
  for (const auto& c : region_corners) imgs.push_back(form(c));
  return convex_hull(std::move(imgs));
}

namespace {

template <class R>
std::optional<SmallnessTarget> budget_to_target(const LinForm& form,
                                                const std::optional<RegionBudget>& budget) {
  if (!budget) return std::nullopt;
  SmallnessTarget t;
  t.region = form_image(form, budget->corners);
  if (polygon_contains_zero(t.region))
    throw ConstraintError("form image of the region contains 0");
  t.eps = budget->eps;
  t.weight_bound = budget->weight_bound;
  t.param_grid = budget->param_grid;
  return t;
}

}  // namespace

template <class R>
Primitive<R> transvection_to_shear(const Transvection<R>& t, const DualBasis& basis,
                                   const std::vector<std::pair<Vec, int>>& fix,
                                   const std::vector<Vec>& zeros,
                                   const std::optional<RegionBudget>& budget,
                                   int r_lead) {
  if (t.row == t.col) throw Error("transvection needs row != col");
  const LinForm& form = basis.forms[t.col];
  const Vec& dir = basis.vectors[t.row];
  InterpConstraints cons;
  for (const auto& [a, order] : fix) cons.vanish.push_back({form(a), order});
  for (const auto& c : zeros) cons.zeros.push_back(form(c));
  std::optional<SmallnessTarget> small = budget_to_target<R>(form, budget);
  ShearFn<R> f = build_interp_core<R>(t.amount, r_lead, Scalar(), cons, small);
  return make_shear<R>(form, dir, std::move(f));
}

std::pair<std::optional<Primitive<Scalar>>, Mat> det_fix_overshear(
    const Mat& q, const DualBasis& basis, const std::vector<std::pair<Vec, int>>& fix,
    const std::vector<Vec>& zeros, const std::optional<RegionBudget>& budget,
    double tol) {
  const int n = q.dim();
  Scalar det = q.det();
  if (det.is_zero()) throw SingularError("matrix is singular");
  if (det.is_exact()) {
    if (det == Scalar(1)) return {std::nullopt, q};
    throw ModeError("determinant fix requires float mode (log of det)");
  }
  if (det.close_to(Scalar(1), tol)) return {std::nullopt, q};

  const LinForm& form = basis.forms[0];
  const Vec& dir = basis.vectors[1];
  Scalar logdet = det.log();
  InterpConstraints cons;
  for (const auto& [a, order] : fix) cons.vanish.push_back({form(a), order});
  for (const auto& c : zeros) cons.zeros.push_back(form(c));
  std::optional<SmallnessTarget> small = budget_to_target<Scalar>(form, budget);
  ShearFn<Scalar> f = build_interp_core<Scalar>(logdet, 0, Scalar(), cons, small);
  Primitive<Scalar> s0 = make_overshear<Scalar>(form, dir, std::move(f));

  // linear part of S0 is I + (det-1) w conj(w)^T / |w|^2; invert in closed form
  Scalar q2 = norm2(dir);
  Scalar a = det.inverse() - Scalar(1);
  Mat linv = Mat::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      linv(i, j) = linv(i, j) + a * dir[i] * dir[j].conj() / q2;
  return {std::move(s0), q * linv};
}

template Primitive<Scalar> transvection_to_shear<Scalar>(
    const Transvection<Scalar>&, const DualBasis&,
    const std::vector<std::pair<Vec, int>>&, const std::vector<Vec>&,
    const std::optional<RegionBudget>&, int);
template Primitive<XPoly> transvection_to_shear<XPoly>(
    const Transvection<XPoly>&, const DualBasis&,
    const std::vector<std::pair<Vec, int>>&, const std::vector<Vec>&,
    const std::optional<RegionBudget>&, int);

}  // namespace shearforge
