#include "shearforge/engine.hpp"

#include <string>

namespace shearforge {

int default_grid_res(int n) {
  if (n <= 2) return 7;
  if (n == 3) return 4;
  return 3;
}

std::vector<Vec> box_corners(const std::vector<PlaneBox>& box) {
  const int n = static_cast<int>(box.size());
  std::vector<std::vector<Scalar>> per;
  for (const auto& b : box) per.push_back(b.corners());
  std::vector<Vec> out;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec z(n);
    for (int i = 0; i < n; ++i) z[i] = per[i][idx[i]];
    out.push_back(std::move(z));
    int i = 0;
    for (; i < n; ++i) {
      if (++idx[i] < 4) break;
      idx[i] = 0;
    }
    if (i == n) break;
  }
  return out;
}

std::vector<Vec> box_grid(const std::vector<PlaneBox>& box, int res) {
  const int n = static_cast<int>(box.size());
  std::vector<std::vector<Scalar>> per;
  for (const auto& b : box) per.push_back(b.grid(res));
  const size_t m = per.empty() ? 0 : per[0].size();
  std::vector<Vec> out;
  std::vector<size_t> idx(n, 0);
  while (true) {
    Vec z(n);
    for (int i = 0; i < n; ++i) z[i] = per[i][idx[i]];
    out.push_back(std::move(z));
    int i = 0;
    for (; i < n; ++i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
    if (i == n) break;
  }
  return out;
}

Scalar word_deviation2(const Word& w, const std::vector<Vec>& grid) {
  Scalar best;
  for (const auto& z : grid) {
    Vec img = word_eval(w, z);
    Scalar d2;
    for (size_t i = 0; i < z.size(); ++i) d2 += (img[i] - z[i]).abs2();
    best = real_max(best, d2);
  }
  return best;
}

Scalar word_deviation2(const ParamWord& w, const std::vector<Vec>& grid,
                       const std::vector<Scalar>& param_grid) {
  Scalar best;
  std::vector<Scalar> xs = param_grid;
  if (xs.empty()) xs.push_back(Scalar());
  for (const auto& x : xs) {
    Word wx = specialize(w, x);
    best = real_max(best, word_deviation2(wx, grid));
  }
  return best;
}

namespace {

std::vector<XPoly> lift_vec(const Vec& v) {
  std::vector<XPoly> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(XPoly::constant(s));
  return out;
}

template <class R>
std::vector<R> ring_point(const Vec& v) {
  if constexpr (RingOps<R>::parametric)
    return lift_vec(v);
  else
    return v;
}

template <class R>
Vec const_point(const std::vector<R>& v) {
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = RingOps<R>::const_term(v[i]);
  return out;
}

template <class R>
bool point_is_constant(const std::vector<R>& v) {
  for (const auto& c : v)
    if (!RingOps<R>::is_constant(c)) return false;
  return true;
}

double engine_tol(const EngineConfig& cfg) {
  return cfg.tol > 0 ? cfg.tol : default_tolerance(cfg.precision_bits);
}

Scalar scalar_abs_ub(const Scalar& s) {
  return s.is_exact()
             ? Scalar::rational(s.abs_upper())
             : Scalar::floating(s.abs_float(s.precision()), Float(s.precision()));
}

template <class R>
Scalar weight_bound_of(const R& beta, const std::vector<Scalar>& param_grid) {
  if constexpr (RingOps<R>::parametric) {
    Scalar best;
    std::vector<Scalar> xs = param_grid;
    if (xs.empty()) xs.push_back(Scalar());
    for (const auto& x : xs) best = real_max(best, scalar_abs_ub(beta.eval(x)));
    return best;
  } else {
    (void)param_grid;
    return scalar_abs_ub(beta);
  }
}

Scalar vec_norm_ub(const Vec& v) {
  Scalar s;
  for (const auto& c : v) s += c.abs2();
  return s.is_exact() ? Scalar::rational(s.exact().re.sqrt_upper())
                      : Scalar::floating(s.to_float(s.precision()).approx().re.sqrt(),
                                         Float(s.precision()));
}

// n = 2 overshears away from the origin need a repositioning mover first
struct NeedsOriginMove : ConstraintError {
  using ConstraintError::ConstraintError;
};

// Smallness data shared by one stage: region corners in the original
// coordinates, a per-stage budget, and the parametric grid.
struct StageBudget {
  std::vector<Vec> corners;
  Scalar stage_eps;
  std::vector<Scalar> param_grid;
};

// f with f(zeta0 + eta) = beta eta^r + O(eta^{r+1}), vanishing to the given
// orders at the (unshifted) scalar images, zeros at the images, and |f|
// small on the (unshifted) polygon region when a target is given.
template <class R>
ShearFn<R> anchored_interp(const R& beta, int r, const Scalar& zeta0,
                           const std::vector<std::pair<Scalar, int>>& vanish,
                           const std::vector<Scalar>& zeros,
                           const std::optional<SmallnessTarget>& small) {
  InterpConstraints cons{vanish, zeros};
  return build_interp_core<R>(beta, r, zeta0, cons, small);
}

// image of the region under a form, as a smallness target with budget eps
std::optional<SmallnessTarget> region_target(const LinForm& form,
                                             const std::optional<StageBudget>& budget,
                                             const Scalar& eps, const Scalar& weight) {
  if (!budget) return std::nullopt;
  SmallnessTarget t;
  t.region = form_image(form, budget->corners);
  t.eps = eps;
  t.weight_bound = weight;
  t.param_grid = budget->param_grid;
  return t;
}

// random form vanishing on the span of `kill` and nonvanishing at `avoid`
LinForm annihilating_form(Rng& rng, int n, const std::vector<Vec>& kill,
                          const std::vector<Vec>& avoid, int tries) {
  for (int t = 0; t < tries; ++t) {
    LinForm f;
    f.coeffs.resize(n);
    for (int i = 0; i < n; ++i)
      f.coeffs[i] =
          Scalar::rational(Rational(rng.range(-6, 6)), Rational(rng.range(-6, 6)));
    bool ok = true;
    for (const auto& d : kill) {
      Scalar fd = f(d);
      if (fd.is_zero()) continue;
      int pivot = -1;
      for (int i = 0; i < n; ++i)
        if (!d[i].is_zero()) pivot = i;
      if (pivot < 0) continue;
      f.coeffs[pivot] = f.coeffs[pivot] - fd / d[pivot];
      if (!f(d).is_zero()) {
        ok = false;
        break;
      }
    }
    if (!ok || f.is_zero()) continue;
    for (const auto& d : kill)
      if (!f(d).is_zero()) ok = false;
    for (const auto& p : avoid)
      if (f(p).is_zero()) ok = false;
    if (ok) return f;
  }
  throw ConstraintError("mover form sampling failed");
}

// One shear moving `from` to `to` by value interpolation at the node
// lambda(from), honoring fix orders, exact zeros, and a smallness budget.
Primitive<Scalar> mover_leg(Rng& rng, const Vec& from, const Vec& to,
                            const std::vector<std::pair<Vec, int>>& fix,
                            const std::vector<Vec>& zeros,
                            const std::optional<StageBudget>& budget) {
  const int n = static_cast<int>(from.size());
  Vec dir = vec_sub(to, from);
  for (int t = 0; t < 200; ++t) {
    LinForm lam;
    try {
      lam = annihilating_form(rng, n, {dir}, {}, 50);
    } catch (const ConstraintError&) {
      continue;
    }
    Scalar zeta0 = lam(from);
    try {
      std::vector<std::pair<Scalar, int>> vanish;
      for (const auto& [a, o] : fix) vanish.push_back({lam(a), o});
      std::vector<Scalar> zs;
      for (const auto& c : zeros) zs.push_back(lam(c));
      std::optional<SmallnessTarget> sm;
      if (budget) {
        Scalar eps_f = budget->stage_eps / vec_norm_ub(dir);
        sm = region_target(lam, budget, eps_f, Scalar(1));
      }
      ShearFn<Scalar> f = anchored_interp<Scalar>(Scalar(1), 0, zeta0, vanish, zs, sm);
      return make_shear<Scalar>(lam, dir, std::move(f));
    } catch (const ConstraintError&) {
      continue;  // image collision or region conflict: resample the form
    }
  }
  throw ConstraintError("mover leg infeasible: constraint collisions persist");
}

Word move_point_word_impl(const Vec& p, const Vec& q,
                          const std::vector<std::pair<Vec, int>>& fix,
                          const std::vector<Vec>& zeros, std::uint64_t seed,
                          const std::optional<StageBudget>& budget) {
  const int n = static_cast<int>(p.size());
  Word w;
  w.n = n;
  if (vec_equal(p, q)) return w;
  for (const auto& [a, o] : fix) {
    (void)o;
    if (vec_equal(a, p) || vec_equal(a, q))
      throw ConstraintError("fix point collides with the moved endpoints");
  }
  for (const auto& c : zeros)
    if (vec_equal(c, p) || vec_equal(c, q))
      throw ConstraintError("zero point collides with the moved endpoints");

  Rng rng(seed ^ 0xabcdef12345ull);
  std::optional<StageBudget> half = budget;
  if (half) half->stage_eps = half->stage_eps * Scalar::rational(1, 2);
  try {
    w.factors.push_back(mover_leg(rng, p, q, fix, zeros, budget));
    return w;
  } catch (const ConstraintError&) {
  }
  for (int t = 0; t < 100; ++t) {
    Vec mid(n);
    for (int i = 0; i < n; ++i)
      mid[i] =
          p[i] + Scalar::rational(Rational(rng.range(-4, 4)), Rational(rng.range(-4, 4)));
    if (vec_equal(mid, p) || vec_equal(mid, q)) continue;
    bool clash = false;
    for (const auto& [a, o] : fix) {
      (void)o;
      if (vec_equal(a, mid)) clash = true;
    }
    for (const auto& c : zeros)
      if (vec_equal(c, mid)) clash = true;
    if (clash) continue;
    try {
      Word two;
      two.n = n;
      Primitive<Scalar> leg1 = mover_leg(rng, p, mid, fix, zeros, half);
      Primitive<Scalar> leg2 = mover_leg(rng, mid, q, fix, zeros, half);
      two.factors = {leg2, leg1};  // leg1 applied first
      return two;
    } catch (const ConstraintError&) {
      continue;
    }
  }
  throw ConstraintError("mover infeasible after the two-step fallback");
}

}  // namespace

Word move_point_word(const Vec& p, const Vec& q,
                     const std::vector<std::pair<Vec, int>>& fix,
                     const std::vector<Vec>& zeros, std::uint64_t seed) {
  return move_point_word_impl(p, q, fix, zeros, seed, std::nullopt);
}

ParamWord move_point_word_param(const Vec& p, const std::vector<XPoly>& q,
                                const std::vector<std::pair<Vec, int>>& fix,
                                const std::vector<Vec>& zeros, std::uint64_t seed) {
  const int n = static_cast<int>(p.size());
  ParamWord w;
  w.n = n;
  int deg = 0;
  for (const auto& c : q) deg = std::max(deg, c.degree());
  Vec const_part(n);
  for (int i = 0; i < n; ++i) const_part[i] = q[i].coeff(0) - p[i];
  struct VaryingMove {
    int power;
    Vec dir;
  };
  std::vector<VaryingMove> varying;
  for (int t = 1; t <= deg; ++t) {
    Vec col(n);
    bool nonzero = false;
    for (int i = 0; i < n; ++i) {
      col[i] = q[i].coeff(t);
      if (!col[i].is_zero()) nonzero = true;
    }
    if (nonzero) varying.push_back({t, std::move(col)});
  }
  if (static_cast<int>(varying.size()) >= n)
    throw ConstraintError(
        "parametric displacement spans too many directions (needs a proper subspace)");

  Rng rng(seed ^ 0x5eed5eedull);
  Vec cur = p;
  if (!vec_is_zero(const_part)) {
    Word base = move_point_word(p, vec_add(p, const_part), fix, zeros, rng.next());
    ParamWord lifted = lift_word(base);
    w.factors.insert(w.factors.end(), lifted.factors.begin(), lifted.factors.end());
    cur = vec_add(p, const_part);
  }
  std::vector<Vec> kill;
  for (const auto& v : varying) kill.push_back(v.dir);
  for (const auto& mv : varying) {
    bool built = false;
    for (int t = 0; t < 200 && !built; ++t) {
      LinForm lam;
      try {
        lam = annihilating_form(rng, n, kill, {}, 50);
      } catch (const ConstraintError&) {
        continue;
      }
      Scalar zeta0 = lam(cur);
      try {
        std::vector<std::pair<Scalar, int>> vanish;
        for (const auto& [a, o] : fix) vanish.push_back({lam(a), o});
        std::vector<Scalar> zs;
        for (const auto& c : zeros) zs.push_back(lam(c));
        XPoly beta = XPoly::monomial(mv.power, Scalar(1));
        ShearFn<XPoly> f =
            anchored_interp<XPoly>(beta, 0, zeta0, vanish, zs, std::nullopt);
        w.factors.insert(w.factors.begin(), make_shear<XPoly>(lam, mv.dir, std::move(f)));
        built = true;
      } catch (const ConstraintError&) {
        continue;
      }
    }
    if (!built) throw ConstraintError("parametric mover leg infeasible");
  }
  return w;
}

// ---------- single-jet pipeline ----------

namespace {

template <class R>
struct StageContext {
  int n = 0;
  int order = 1;
  Vec anchor;  // constant working anchor p0
  std::vector<std::pair<Vec, int>> fix;
  std::vector<Vec> zeros;
  std::optional<StageBudget> budget;
  bool volume = false;
  EngineConfig cfg;
  Rng* rng = nullptr;
};

template <class R>
std::vector<Vec> avoid_points(const StageContext<R>& ctx) {
  std::vector<Vec> avoid;
  for (const auto& [a, o] : ctx.fix) {
    (void)o;
    avoid.push_back(vec_sub(a, ctx.anchor));
  }
  for (const auto& c : ctx.zeros) avoid.push_back(vec_sub(c, ctx.anchor));
  return avoid;
}

template <class R>
void append_inverse_jet(Jet<R>& rem, const Primitive<R>& g, const Vec& anchor, int k) {
  Primitive<R> gi = primitive_inverse(g);
  Jet<R> gij = primitive_jet(gi, ring_point<R>(anchor), k);
  rem = compose(rem, gij, k);
}

template <class R>
Primitive<R> dual_shear(const DualBasis& db, int row, int col, const R& amount,
                        int r_lead, const StageContext<R>& ctx, const Scalar& eps_f) {
  const LinForm& form = db.forms[col];
  const Vec& dir = db.vectors[row];
  Scalar zeta0 = form(ctx.anchor);
  std::vector<std::pair<Scalar, int>> vanish;
  for (const auto& [pt, o] : ctx.fix) vanish.push_back({form(pt), o});
  std::vector<Scalar> zs;
  for (const auto& c : ctx.zeros) zs.push_back(form(c));
  Scalar weight = weight_bound_of(
      amount, ctx.budget ? ctx.budget->param_grid : std::vector<Scalar>{});
  std::optional<SmallnessTarget> sm = region_target(form, ctx.budget, eps_f, weight);
  ShearFn<R> f = anchored_interp<R>(amount, r_lead, zeta0, vanish, zs, sm);
  return make_shear<R>(form, dir, std::move(f));
}

// Factors realizing the linear part, in word order (first applied = back).
template <class R>
std::vector<Primitive<R>> linear_stage(Jet<R>& rem, const StageContext<R>& ctx) {
  const int n = ctx.n;
  const int k = ctx.order;
  const double tol = engine_tol(ctx.cfg);
  Matrix<R> q0 = rem.linear_part();
  std::vector<Primitive<R>> out;

  // determinant fix (skipped in volume mode, where det = 1 is guaranteed)
  Matrix<R> a = q0;
  if (!ctx.volume) {
    R detr = q0.det();
    if constexpr (RingOps<R>::parametric) {
      if (!RingOps<R>::is_constant(detr))
        throw ConstraintError(
            "parametric linear part unsupported: non-constant determinant");
    }
    Scalar det0 = RingOps<R>::const_term(detr);
    if (det0.is_zero()) throw SingularError("degenerate linear part");
    bool is_one = det0.is_exact() ? det0 == Scalar(1) : det0.close_to(Scalar(1), tol);
    if (!is_one) {
      if (!vec_is_zero(ctx.anchor) && n == 2)
        throw NeedsOriginMove("determinant fix at a nonzero anchor needs n >= 3");
      Scalar logdet = det0.log();  // rejects exact mode
      std::optional<Vec> orth;
      if (!vec_is_zero(ctx.anchor)) orth = ctx.anchor;
      std::vector<Vec> avoid = avoid_points(ctx);
      Primitive<R> s0r;
      bool have_s0 = false;
      for (int try_basis = 0; try_basis < 32 && !have_s0; ++try_basis) {
        DualBasis db = sample_dual_basis(n, avoid, ctx.cfg.axis_margin, *ctx.rng, orth);
        try {
          const LinForm& lam = db.forms[0];
          const Vec& w = db.vectors[1];
          Scalar zeta0 = lam(ctx.anchor);
          std::vector<std::pair<Scalar, int>> vanish;
          for (const auto& [pt, o] : ctx.fix) vanish.push_back({lam(pt), o});
          std::vector<Scalar> zs;
          for (const auto& c : ctx.zeros) zs.push_back(lam(c));
          std::optional<SmallnessTarget> sm =
              region_target(lam, ctx.budget, ctx.budget ? ctx.budget->stage_eps : Scalar(),
                            scalar_abs_ub(logdet));
          ShearFn<Scalar> f =
              anchored_interp<Scalar>(logdet, 0, zeta0, vanish, zs, sm);
          if constexpr (RingOps<R>::parametric)
            s0r = Overshear<XPoly>{lam, w, lift_fn(f)};
          else
            s0r = Overshear<Scalar>{lam, w, std::move(f)};
          // linear action of S0 is I + (det-1) w conj(w)^T/|w|^2 at the anchor
          Scalar q2n = norm2(w);
          Scalar amt = det0.inverse() - Scalar(1);
          Matrix<R> linv = Matrix<R>::identity(n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              linv(i, j) =
                  linv(i, j) + RingOps<R>::lift(amt * w[i] * w[j].conj() / q2n);
          a = q0 * linv;
          have_s0 = true;
        } catch (const ConstraintError&) {
          if (try_basis == 31) throw;
          continue;
        }
      }
      if (have_s0) {
        out.push_back(s0r);
        append_inverse_jet(rem, s0r, ctx.anchor, k);
      }
    }
  }

  // remaining SL part via transvections in generic dual coordinates
  bool identity_left = true;
  {
    Matrix<R> id = Matrix<R>::identity(n);
    for (int i = 0; i < n && identity_left; ++i)
      for (int j = 0; j < n && identity_left; ++j) {
        R diff = a(i, j) - id(i, j);
        if constexpr (RingOps<R>::parametric) {
          if (!diff.is_zero()) identity_left = false;
        } else {
          if (!(diff.is_exact() ? diff.is_zero() : diff.close_to(Scalar(), tol)))
            identity_left = false;
        }
      }
  }
  if (identity_left) return out;

  std::vector<Vec> avoid = avoid_points(ctx);
  for (int try_basis = 0; try_basis < 32; ++try_basis) {
    DualBasis db = sample_dual_basis(n, avoid, ctx.cfg.axis_margin, *ctx.rng);
    try {
      Mat lambda(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lambda(i, j) = db.forms[i].coeffs[j];
      Mat lambda_inv = mat_inverse(lambda);

      std::vector<Transvection<R>> ts;
      if constexpr (RingOps<R>::parametric) {
        PolyMat conj(n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            XPoly acc;
            for (int s = 0; s < n; ++s)
              for (int t = 0; t < n; ++t)
                acc = acc + a(s, t).scaled(lambda(i, s) * lambda_inv(t, j));
            conj(i, j) = acc;
          }
        bool constant = true;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            if (!RingOps<R>::is_constant(conj(i, j))) constant = false;
        if (constant) {
          Mat cm(n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) cm(i, j) = conj(i, j).coeff(0);
          for (const auto& t : sln_to_transvections(cm, tol))
            ts.push_back({t.row, t.col, XPoly::constant(t.amount)});
        } else if (n == 2) {
          ts = sl2_polyring_to_transvections(conj, tol);
        } else {
          throw ConstraintError(
              "parametric linear part unsupported: needs n = 2 or a constant matrix");
        }
      } else {
        Mat conj = lambda * a * lambda_inv;
        ts = sln_to_transvections(conj, tol);
      }

      std::vector<Primitive<R>> shears;
      for (const auto& t : ts) {
        Scalar eps_f;
        if (ctx.budget)
          eps_f = ctx.budget->stage_eps *
                  Scalar::rational(1, static_cast<long>(ts.size())) /
                  vec_norm_ub(db.vectors[t.row]);
        shears.push_back(dual_shear<R>(db, t.row, t.col, t.amount, 1, ctx, eps_f));
      }
      // word order: the first transvection of the product is leftmost
      std::vector<Primitive<R>> stage = shears;
      out.insert(out.begin(), stage.begin(), stage.end());
      // advance rem through the inverses in application order (reverse)
      for (auto it = shears.rbegin(); it != shears.rend(); ++it)
        append_inverse_jet(rem, *it, ctx.anchor, k);
      return out;
    } catch (const ConstraintError&) {
      if (try_basis == 31) throw;
      continue;
    }
  }
  throw ConstraintError("linear stage failed: no admissible dual basis");
}

// degree-r stage: shears for the divergence-free part, overshears for the rest
template <class R>
std::vector<Primitive<R>> homog_stage(Jet<R>& rem, int r, const StageContext<R>& ctx) {
  const int n = ctx.n;
  const int k = ctx.order;
  const double tol = engine_tol(ctx.cfg);
  HomogField<R> h = slice_field(rem, r);
  if (h.is_zero()) return {};
  std::vector<Vec> avoid = avoid_points(ctx);
  auto grid = ctx.budget ? ctx.budget->param_grid : std::vector<Scalar>{};

  // divergence-free fields need no overshears at all
  bool div_zero = true;
  for (const auto& d : divergence(h)) {
    bool zero;
    if constexpr (RingOps<R>::parametric) {
      zero = true;
      for (const auto& c : d.coeffs())
        if (!(c.is_exact() ? c.is_zero() : c.close_to(Scalar(), tol * 1e6))) zero = false;
    } else {
      zero = d.is_exact() ? d.is_zero() : d.close_to(Scalar(), tol * 1e6);
    }
    if (!zero) {
      div_zero = false;
      break;
    }
  }
  if (ctx.volume && !div_zero)
    throw Error("volume mode but the stage field is not divergence-free");
  bool need_os = !ctx.volume && !div_zero;
  if (need_os && !vec_is_zero(ctx.anchor) && n == 2)
    throw NeedsOriginMove("n = 2 overshear stage at a nonzero anchor");
  std::optional<Vec> b_orth;
  if (need_os && !vec_is_zero(ctx.anchor)) b_orth = ctx.anchor;

  for (int try_basis = 0; try_basis < 32; ++try_basis) {
    ShearBasis basis = sample_shear_basis(n, r, avoid, ctx.cfg.axis_margin,
                                          ctx.rng->next(), b_orth);
    try {
      auto dec = decompose_homog(h, basis);
      long active = 0;
      for (const auto& c : dec.a_coeffs)
        if (!c.is_zero()) ++active;
      if (need_os)
        for (const auto& d : dec.b_coeffs)
          if (!d.is_zero()) ++active;
      if (active == 0) return {};
      Scalar per_eps;
      if (ctx.budget) per_eps = ctx.budget->stage_eps * Scalar::rational(1, active);

      std::vector<Primitive<R>> factors;
      for (size_t j = 0; j < basis.a_gens.size(); ++j) {
        const R& c = dec.a_coeffs[j];
        if (c.is_zero()) continue;
        const auto& [lam, v] = basis.a_gens[j];
        Scalar zeta0 = lam(ctx.anchor);
        std::vector<std::pair<Scalar, int>> vanish;
        for (const auto& [pt, o] : ctx.fix) vanish.push_back({lam(pt), o});
        std::vector<Scalar> zs;
        for (const auto& cc : ctx.zeros) zs.push_back(lam(cc));
        std::optional<SmallnessTarget> sm;
        if (ctx.budget) {
          Scalar eps_f = per_eps / vec_norm_ub(v);
          sm = region_target(lam, ctx.budget, eps_f, weight_bound_of(c, grid));
        }
        ShearFn<R> f = anchored_interp<R>(c, r, zeta0, vanish, zs, sm);
        factors.push_back(make_shear<R>(lam, v, std::move(f)));
      }
      if (need_os) {
        for (size_t j = 0; j < basis.b_gens.size(); ++j) {
          const R& d = dec.b_coeffs[j];
          if (d.is_zero()) continue;
          if constexpr (!RingOps<R>::parametric) {
            if (d.is_exact())
              throw ModeError(
                  "float mode required: non-divergence-free stage needs overshears");
          }
          const auto& [mu, wv] = basis.b_gens[j];
          Scalar zeta0 = mu(ctx.anchor);
          std::vector<std::pair<Scalar, int>> vanish;
          for (const auto& [pt, o] : ctx.fix) vanish.push_back({mu(pt), o});
          std::vector<Scalar> zs;
          for (const auto& cc : ctx.zeros) zs.push_back(mu(cc));
          std::optional<SmallnessTarget> sm;
          if (ctx.budget) {
            // |e^h - 1| |<z,w>| / |w|^2 <= budget over the region corners
            Scalar rw;
            for (const auto& corner : ctx.budget->corners)
              rw = real_max(rw, scalar_abs_ub(herm(corner, wv)));
            rw = rw / norm2(wv) + Scalar(1);
            Scalar eps_h = per_eps / (rw * Scalar(2));
            sm = region_target(mu, ctx.budget, eps_h, weight_bound_of(d, grid));
          }
          ShearFn<R> f = anchored_interp<R>(d, r - 1, zeta0, vanish, zs, sm);
          factors.push_back(make_overshear<R>(mu, wv, std::move(f)));
        }
      }
      for (auto it = factors.rbegin(); it != factors.rend(); ++it)
        append_inverse_jet(rem, *it, ctx.anchor, k);
      return factors;
    } catch (const ConstraintError&) {
      if (try_basis == 31) throw;
      continue;
    } catch (const SingularError&) {
      // the float screen admitted a singular basis; resample
      if (try_basis == 31) throw;
      continue;
    }
  }
  throw ConstraintError("homogeneous stage failed: no admissible basis");
}

template <class R>
bool rem_is_identity(const Jet<R>& rem, double tol) {
  Jet<R> id = Jet<R>::identity(rem.dim(), rem.order(), rem.anchor());
  for (int i = 0; i < rem.dim(); ++i)
    for (int rank = 1; rank < rem.comp(i).size(); ++rank) {
      R diff = rem.comp(i).at(rank) - id.comp(i).at(rank);
      if constexpr (RingOps<R>::parametric) {
        for (const auto& c : diff.coeffs())
          if (!(c.is_exact() ? c.is_zero() : c.close_to(Scalar(), tol))) return false;
      } else {
        if (!(diff.is_exact() ? diff.is_zero() : diff.close_to(Scalar(), tol)))
          return false;
      }
    }
  return true;
}

// all stages at a constant fixed anchor; target anchored p0 -> p0
template <class R>
AutoWord<R> build_fixed_point_word(const Jet<R>& target, StageContext<R> ctx) {
  const int k = target.order();
  AutoWord<R> w;
  w.n = ctx.n;
  Jet<R> rem = target;

  std::vector<Primitive<R>> lin = linear_stage(rem, ctx);
  std::vector<std::vector<Primitive<R>>> stages;
  for (int r = 2; r <= k; ++r) stages.push_back(homog_stage(rem, r, ctx));

  if (!rem_is_identity(rem, engine_tol(ctx.cfg) * 1e8))
    throw Error("stage telescoping failed to reach the identity jet");

  for (auto it = stages.rbegin(); it != stages.rend(); ++it)
    w.factors.insert(w.factors.end(), it->begin(), it->end());
  w.factors.insert(w.factors.end(), lin.begin(), lin.end());
  return w;
}

}  // namespace

// ---------- public constructions ----------

template <class R>
AutoWord<R> interpolate_one_point(const Jet<R>& p, const EngineConfig& config) {
  const int n = p.dim();
  const int k = p.order();
  Rng rng(config.seed);

  std::vector<R> zero_pt(n, R());
  Jet<R> p0 = p.rebased(zero_pt, zero_pt);
  Matrix<R> q = p0.linear_part();
  if (RingOps<R>::const_term(q.det()).is_zero()) throw SingularError("degenerate jet");

  AutoWord<R> w;
  w.n = n;
  Jet<R> rem = p0;
  bool lin_id = q == Matrix<R>::identity(n);
  Primitive<R> linf = LinearMap<R>{q};
  if (!lin_id) append_inverse_jet(rem, linf, Vec(n, Scalar()), k);

  StageContext<R> ctx;
  ctx.n = n;
  ctx.order = k;
  ctx.anchor = Vec(n, Scalar());
  ctx.volume = false;
  ctx.cfg = config;
  ctx.rng = &rng;
  std::vector<std::vector<Primitive<R>>> stages;
  for (int r = 2; r <= k; ++r) stages.push_back(homog_stage(rem, r, ctx));
  if (!rem_is_identity(rem, engine_tol(config) * 1e8))
    throw Error("stage telescoping failed to reach the identity jet");

  for (auto it = stages.rbegin(); it != stages.rend(); ++it)
    w.factors.insert(w.factors.end(), it->begin(), it->end());
  if (!lin_id) w.factors.push_back(linf);

  bool at_origin = true;
  for (const auto& c : p.anchor())
    if (!c.is_zero()) at_origin = false;
  for (const auto& c : p.value())
    if (!c.is_zero()) at_origin = false;
  if (!at_origin) {
    std::vector<R> minus_anchor(p.anchor());
    for (auto& c : minus_anchor) c = -c;
    AutoWord<R> full;
    full.n = n;
    full.factors.push_back(Translation<R>{p.value()});
    full.factors.insert(full.factors.end(), w.factors.begin(), w.factors.end());
    full.factors.push_back(Translation<R>{std::move(minus_anchor)});
    return full;
  }
  return w;
}

template <class R>
AutoWord<R> interpolate_jet_at_point(const Problem<R>& spec) {
  if (spec.targets.size() != 1)
    throw Error("interpolate_jet_at_point expects exactly one target");
  const Jet<R>& target = spec.targets[0].jet;
  const int n = spec.n;
  const int k = target.order();
  const double tol = engine_tol(spec.config);
  if (target.dim() != n) throw DimensionError("target dimension mismatch");
  if (!point_is_constant<R>(target.anchor()))
    throw Error("target anchors must not depend on the parameter");
  Vec a = const_point<R>(target.anchor());

  if (RingOps<R>::const_term(target.linear_part().det()).is_zero())
    throw SingularError("degenerate jet");
  for (const auto& [pt, o] : spec.fix) {
    (void)o;
    if (vec_equal(pt, a)) throw ConstraintError("fix point equals the target anchor");
  }
  for (const auto& c : spec.axis_points)
    if (vec_equal(c, a)) throw ConstraintError("axis point equals the target anchor");
  if (spec.volume && k >= 2) {
    auto dj = jacobian_det_jet(target, k - 1);
    TruncPoly<R> one = TruncPoly<R>::constant(n, k - 1, R(1));
    TruncPoly<R> diff = dj.poly - one;
    for (int rank = 0; rank < diff.size(); ++rank) {
      const R& c = diff.at(rank);
      bool zero;
      if constexpr (RingOps<R>::parametric)
        zero = c.is_zero();
      else
        zero = c.is_exact() ? c.is_zero() : c.close_to(Scalar(), tol);
      if (!zero) throw Error("volume mode requires a determinant jet equal to 1");
    }
  }

  auto box_contains = [&](const std::vector<PlaneBox>& box, const Vec& z) {
    for (int i = 0; i < n; ++i) {
      if (real_cmp(z[i].real_part(), box[i].re_lo) < 0 ||
          real_cmp(box[i].re_hi, z[i].real_part()) < 0 ||
          real_cmp(z[i].imag_part(), box[i].im_lo) < 0 ||
          real_cmp(box[i].im_hi, z[i].imag_part()) < 0)
        return false;
    }
    return true;
  };
  if (spec.approx) {
    if (static_cast<int>(spec.approx->box.size()) != n)
      throw DimensionError("approx box needs one rectangle per coordinate");
    if (box_contains(spec.approx->box, a) ||
        box_contains(spec.approx->box, const_point<R>(target.value())))
      throw ConstraintError("approx region contains an anchor or a value");
  }

  Rng rng(spec.config.seed);
  int rounds = std::max(1, spec.config.budget_rounds);
  Scalar budget_scale(1);
  std::string last_failure = "no attempt";
  for (int round = 0; round < rounds; ++round) {
    Rng round_rng(rng.next());
    try {
      Jet<R> work = target;

      // per-slot budget: mover, conjugation, and each of S0..Sk get a share
      std::optional<StageBudget> slot;
      if (spec.approx) {
        StageBudget b;
        std::vector<PlaneBox> infl = spec.approx->box;
        Scalar e = spec.approx->eps;
        for (auto& bx : infl) {
          bx.re_lo = bx.re_lo - e;
          bx.re_hi = bx.re_hi + e;
          bx.im_lo = bx.im_lo - e;
          bx.im_hi = bx.im_hi + e;
        }
        b.corners = box_corners(infl);
        b.stage_eps =
            spec.approx->eps * budget_scale * Scalar::rational(1, k + 4);
        b.param_grid = spec.approx->param_grid;
        slot = std::move(b);
      }

      bool needs_move = false;
      for (int i = 0; i < n; ++i)
        if (!(target.value()[i] == target.anchor()[i])) needs_move = true;
      AutoWord<R> mover;
      mover.n = n;
      if (needs_move) {
        if constexpr (RingOps<R>::parametric) {
          mover = move_point_word_param(a, target.value(), spec.fix, spec.axis_points,
                                        round_rng.next());
        } else {
          mover = move_point_word_impl(a, target.value(), spec.fix, spec.axis_points,
                                       round_rng.next(), slot);
        }
        AutoWord<R> mi = inverse_word(mover);
        Jet<R> mij = word_jet(mi, target.value(), k);
        work = compose(mij, target, k);
      }

      // stages run anchored at a; only the n = 2 overshear case needs a
      // repositioning mover to the origin first
      AutoWord<R> core;
      AutoWord<R> to_zero;
      to_zero.n = n;
      bool sandwiched = false;
      {
        StageContext<R> ctx;
        ctx.n = n;
        ctx.order = k;
        ctx.anchor = a;
        ctx.fix = spec.fix;
        ctx.zeros = spec.axis_points;
        ctx.budget = slot;
        ctx.volume = spec.volume;
        ctx.cfg = spec.config;
        ctx.rng = &round_rng;
        try {
          core = build_fixed_point_word(work, ctx);
        } catch (const NeedsOriginMove&) {
          sandwiched = true;
          Word tz = move_point_word_impl(a, Vec(n, Scalar()), spec.fix,
                                         spec.axis_points, round_rng.next(), slot);
          if constexpr (RingOps<R>::parametric)
            to_zero = lift_word(tz);
          else
            to_zero = tz;
          std::vector<R> zero_pt(n, R());
          Jet<R> tzj = word_jet(to_zero, ring_point<R>(a), k);       // a -> 0
          Jet<R> tzi = word_jet(inverse_word(to_zero), zero_pt, k);  // 0 -> a
          Jet<R> work0 = compose(tzj, compose(work, tzi, k), k);
          StageContext<R> ctx0 = ctx;
          ctx0.anchor = Vec(n, Scalar());
          core = build_fixed_point_word(work0, ctx0);
        }
      }

      AutoWord<R> full;
      full.n = n;
      full.factors = mover.factors;
      if (sandwiched) {
        AutoWord<R> inv = inverse_word(to_zero);
        full.factors.insert(full.factors.end(), inv.factors.begin(), inv.factors.end());
        full.factors.insert(full.factors.end(), core.factors.begin(),
                            core.factors.end());
        full.factors.insert(full.factors.end(), to_zero.factors.begin(),
                            to_zero.factors.end());
      } else {
        full.factors.insert(full.factors.end(), core.factors.begin(),
                            core.factors.end());
      }

      if (spec.approx) {
        int res = spec.config.grid_res > 0 ? spec.config.grid_res : default_grid_res(n);
        std::vector<Vec> grid = box_grid(spec.approx->box, res);
        Scalar dev2;
        if constexpr (RingOps<R>::parametric)
          dev2 = word_deviation2(full, grid, spec.approx->param_grid);
        else
          dev2 = word_deviation2(full, grid);
        if (real_cmp(dev2, spec.approx->eps * spec.approx->eps) > 0) {
          last_failure = "approx budget exceeded on the verification grid";
          budget_scale = budget_scale * Scalar::rational(1, 2);
          continue;
        }
      }
      return full;
    } catch (const ConstraintError& e) {
      last_failure = e.what();
      budget_scale = budget_scale * Scalar::rational(1, 2);
      continue;
    }
  }
  throw ConstraintError("interpolation failed after budget retries: " + last_failure);
}

template <class R>
FamilyTrace<R> interpolate_finite_family(const Problem<R>& spec,
                                         const std::vector<Scalar>& eps_schedule,
                                         const Scalar& box_growth) {
  const int n = spec.n;
  FamilyTrace<R> trace;
  trace.word.n = n;
  if (spec.targets.empty()) return trace;

  int max_order = 1;
  for (const auto& t : spec.targets) max_order = std::max(max_order, t.jet.order());
  const int fix_n = max_order + 1;

  std::vector<Vec> anchors, values;
  for (const auto& t : spec.targets) {
    if (!point_is_constant<R>(t.jet.anchor()))
      throw Error("family anchors must not depend on the parameter");
    anchors.push_back(const_point<R>(t.jet.anchor()));
    values.push_back(const_point<R>(t.jet.value()));
  }

  bool use_eps = !eps_schedule.empty() || spec.approx.has_value();
  std::vector<PlaneBox> box;
  if (spec.approx)
    box = spec.approx->box;
  else if (use_eps)
    box.assign(n, PlaneBox{Scalar(-1), Scalar(1), Scalar(-1), Scalar(1)});

  auto eps_at = [&](size_t j) -> Scalar {
    if (!use_eps) return Scalar();
    if (j < eps_schedule.size()) return eps_schedule[j];
    Scalar e = eps_schedule.empty() ? (spec.approx ? spec.approx->eps : Scalar(1))
                                    : eps_schedule.back();
    for (size_t t = eps_schedule.size(); t <= j; ++t) e = e * Scalar::rational(1, 2);
    return e;
  };

  Rng rng(spec.config.seed);
  for (size_t j = 0; j < spec.targets.size(); ++j) {
    const Jet<R>& pj = spec.targets[j].jet;
    const int mj = pj.order();
    Jet<R> goal = pj;
    if (!trace.word.factors.empty()) {
      Jet<R> fj = word_jet(trace.word, ring_point<R>(anchors[j]), mj);
      Jet<R> fji = formal_inverse(fj, mj);
      goal = compose(pj, fji, mj);
    }

    Problem<R> stage;
    stage.n = n;
    stage.targets.push_back({goal});
    stage.volume = spec.volume;
    stage.config = spec.config;
    stage.config.seed = rng.next();
    stage.fix = spec.fix;
    for (size_t i = 0; i < j; ++i) stage.fix.push_back({values[i], fix_n});
    // later anchors are pinned to high order, not just pointwise: the
    // accumulated word then has an exactly-identity jet there, so the
    // conjugated targets stay well-conditioned
    for (size_t m = j + 1; m < spec.targets.size(); ++m)
      stage.fix.push_back({anchors[m], fix_n});
    stage.axis_points = spec.axis_points;
    if (use_eps) {
      auto inside = [&](const Vec& z) {
        for (int i = 0; i < n; ++i) {
          if (real_cmp(z[i].real_part(), box[i].re_lo) < 0 ||
              real_cmp(box[i].re_hi, z[i].real_part()) < 0 ||
              real_cmp(z[i].imag_part(), box[i].im_lo) < 0 ||
              real_cmp(box[i].im_hi, z[i].imag_part()) < 0)
            return false;
        }
        return true;
      };
      if (inside(anchors[j]) || inside(values[j]))
        throw ConstraintError("schedule infeasible: target swallowed by the box chain");
      ApproxSpec ap;
      ap.box = box;
      ap.eps = eps_at(j);
      if (spec.approx) ap.param_grid = spec.approx->param_grid;
      stage.approx = std::move(ap);
    }

    AutoWord<R> psi = interpolate_jet_at_point(stage);
    trace.stages.push_back(psi);
    if (use_eps) trace.boxes.push_back(box);

    AutoWord<R> next;
    next.n = n;
    next.factors = psi.factors;
    next.factors.insert(next.factors.end(), trace.word.factors.begin(),
                        trace.word.factors.end());
    trace.word = std::move(next);

    if (use_eps && j + 1 < spec.targets.size()) {
      Scalar margin = eps_at(j + 1) + box_growth;
      std::vector<Vec> probe = box_grid(box, 3);
      std::vector<PlaneBox> grown = box;
      auto widen = [&](const Vec& z) {
        for (int i = 0; i < n; ++i) {
          grown[i].re_lo = real_min(grown[i].re_lo, z[i].real_part());
          grown[i].re_hi = real_max(grown[i].re_hi, z[i].real_part());
          grown[i].im_lo = real_min(grown[i].im_lo, z[i].imag_part());
          grown[i].im_hi = real_max(grown[i].im_hi, z[i].imag_part());
        }
      };
      if constexpr (RingOps<R>::parametric) {
        std::vector<Scalar> xs =
            spec.approx ? spec.approx->param_grid : std::vector<Scalar>{};
        if (xs.empty()) xs.push_back(Scalar());
        for (const auto& x : xs) {
          Word wx = specialize(trace.word, x);
          for (const auto& z : probe) widen(word_eval(wx, z));
        }
      } else {
        for (const auto& z : probe) widen(word_eval(trace.word, z));
      }
      for (int i = 0; i < n; ++i) {
        grown[i].re_lo = grown[i].re_lo - margin;
        grown[i].re_hi = grown[i].re_hi + margin;
        grown[i].im_lo = grown[i].im_lo - margin;
        grown[i].im_hi = grown[i].im_hi + margin;
      }
      box = std::move(grown);
    }
  }
  return trace;
}

template <class R>
AutoWord<R> moving_points_with_jets(const std::vector<Vec>& points,
                                    const std::vector<std::vector<R>>& targets,
                                    const std::vector<Jet<R>>& jets,
                                    const EngineConfig& config) {
  const size_t m = points.size();
  if (targets.size() != m || jets.size() != m)
    throw DimensionError("points/targets/jets size mismatch");
  AutoWord<R> empty;
  if (m == 0) return empty;
  const int n = static_cast<int>(points[0].size());
  empty.n = n;

  bool trivial = true;
  for (size_t j = 0; j < m && trivial; ++j) {
    for (int i = 0; i < n; ++i)
      if (!(targets[j][i] == RingOps<R>::lift(points[j][i]))) trivial = false;
    Jet<R> id = Jet<R>::identity(n, jets[j].order(), jets[j].anchor());
    if (!(jets[j] == id)) trivial = false;
  }
  if (trivial) return empty;

  Rng rng(config.seed);
  // two phases via fresh intermediate positions, so targets may coincide
  // with other moved points (swaps and cycles included)
  std::vector<Vec> temps;
  {
    std::vector<Vec> taken = points;
    for (const auto& t : targets)
      if (point_is_constant<R>(t)) taken.push_back(const_point<R>(t));
    for (size_t j = 0; j < m; ++j) {
      for (int tries = 0; tries < 200; ++tries) {
        Vec cand(n);
        for (int i = 0; i < n; ++i)
          cand[i] = Scalar::rational(Rational(rng.range(-9, 9), rng.range(1, 3)),
                                     Rational(rng.range(-9, 9), rng.range(1, 3)));
        bool clash = false;
        for (const auto& t : taken)
          if (vec_equal(t, cand)) clash = true;
        if (!clash) {
          temps.push_back(cand);
          taken.push_back(cand);
          break;
        }
      }
    }
    if (temps.size() != m) throw ConstraintError("no free intermediate positions");
  }

  AutoWord<R> g;
  g.n = n;
  auto prepend = [&](AutoWord<R>&& mover) {
    AutoWord<R> next;
    next.n = n;
    next.factors = std::move(mover.factors);
    next.factors.insert(next.factors.end(), g.factors.begin(), g.factors.end());
    g = std::move(next);
  };
  // phase 1: p_j -> temp_j, pinning unmoved points and earlier temps
  for (size_t j = 0; j < m; ++j) {
    std::vector<Vec> pin;
    for (size_t i = j + 1; i < m; ++i) pin.push_back(points[i]);
    for (size_t i = 0; i < j; ++i) pin.push_back(temps[i]);
    Word base = move_point_word(points[j], temps[j], {}, pin, rng.next());
    if constexpr (RingOps<R>::parametric)
      prepend(lift_word(base));
    else
      prepend(std::move(base));
  }
  // phase 2: temp_j -> alpha_j, pinning later temps and earlier targets
  for (size_t j = 0; j < m; ++j) {
    std::vector<Vec> pin;
    for (size_t i = j + 1; i < m; ++i) pin.push_back(temps[i]);
    AutoWord<R> mover;
    if constexpr (RingOps<R>::parametric) {
      for (size_t i = 0; i < j; ++i) {
        if (point_is_constant<R>(targets[i]))
          pin.push_back(const_point<R>(targets[i]));
        else
          throw ConstraintError(
              "moving several parametric targets at once is unsupported");
      }
      if (point_is_constant<R>(targets[j])) {
        mover = lift_word(
            move_point_word(temps[j], const_point<R>(targets[j]), {}, pin, rng.next()));
      } else {
        mover = move_point_word_param(temps[j], targets[j], {}, pin, rng.next());
      }
    } else {
      for (size_t i = 0; i < j; ++i) pin.push_back(targets[i]);
      mover = move_point_word(temps[j], targets[j], {}, pin, rng.next());
    }
    prepend(std::move(mover));
  }

  AutoWord<R> ginv = inverse_word(g);
  Problem<R> fam;
  fam.n = n;
  fam.config = config;
  fam.config.seed = rng.next();
  for (size_t j = 0; j < m; ++j) {
    Jet<R> gi = word_jet(ginv, targets[j], jets[j].order());
    Jet<R> pulled = compose(gi, jets[j], jets[j].order());
    fam.targets.push_back({pulled});
  }
  FamilyTrace<R> h = interpolate_finite_family(fam, {}, Scalar());

  AutoWord<R> full;
  full.n = n;
  full.factors = g.factors;
  full.factors.insert(full.factors.end(), h.word.factors.begin(), h.word.factors.end());
  return full;
}

template AutoWord<Scalar> interpolate_one_point<Scalar>(const JetMap&,
                                                        const EngineConfig&);
template AutoWord<XPoly> interpolate_one_point<XPoly>(const ParamJet&,
                                                      const EngineConfig&);
template AutoWord<Scalar> interpolate_jet_at_point<Scalar>(const ProblemSpec&);
template AutoWord<XPoly> interpolate_jet_at_point<XPoly>(const ParamProblem&);
template FamilyTrace<Scalar> interpolate_finite_family<Scalar>(
    const ProblemSpec&, const std::vector<Scalar>&, const Scalar&);
template FamilyTrace<XPoly> interpolate_finite_family<XPoly>(
    const ParamProblem&, const std::vector<Scalar>&, const Scalar&);
template AutoWord<Scalar> moving_points_with_jets<Scalar>(
    const std::vector<Vec>&, const std::vector<std::vector<Scalar>>&,
    const std::vector<JetMap>&, const EngineConfig&);
template AutoWord<XPoly> moving_points_with_jets<XPoly>(
    const std::vector<Vec>&, const std::vector<std::vector<XPoly>>&,
    const std::vector<ParamJet>&, const EngineConfig&);

}  // namespace shearforge
