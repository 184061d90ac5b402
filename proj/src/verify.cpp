#include "shearforge/verify.hpp"

#include <cmath>

#include "shearforge/homog.hpp"

namespace shearforge {

namespace {

// Taylor prefix of a plain polynomial at c0 by repeated synthetic division
// (kept deliberately different from the builder's binomial-sum route).
std::vector<Scalar> prefix_by_division(const UniPoly<Scalar>& f, const Scalar& c0,
                                       int k) {
  std::vector<Scalar> out(k + 1, Scalar());
  UniPoly<Scalar> cur = f;
  for (int j = 0; j <= k && !cur.is_zero(); ++j) {
    auto [q, rem] = cur.synthetic_div(c0);
    out[j] = rem;
    cur = std::move(q);
  }
  return out;
}

// truncated multiply of (k+1)-prefixes
std::vector<Scalar> mul_prefix(const std::vector<Scalar>& a,
                               const std::vector<Scalar>& b, int k) {
  std::vector<Scalar> out(k + 1, Scalar());
  for (int i = 0; i <= k; ++i) {
    if (a[i].is_zero()) continue;
    for (int j = 0; i + j <= k; ++j) {
      if (b[j].is_zero()) continue;
      out[i + j] = out[i + j] + a[i] * b[j];
    }
  }
  return out;
}

// prefix of the factored function at c0: root factors multiplied out as
// shifted linears, the separator power by binary powering of its prefix
std::vector<Scalar> prefix_of_fn(const ShearFn<Scalar>& fn, const Scalar& c0, int k) {
  std::vector<Scalar> acc = prefix_by_division(fn.poly(), c0, k);
  for (const auto& [root, m] : fn.roots()) {
    std::vector<Scalar> lin(k + 1, Scalar());
    lin[0] = c0 - root;
    if (k >= 1) lin[1] = Scalar(1);
    for (int t = 0; t < m; ++t) acc = mul_prefix(acc, lin, k);
  }
  if (fn.has_sep()) {
    std::vector<Scalar> sep(k + 1, Scalar());
    sep[0] = fn.sep().eval(c0);
    if (k >= 1) sep[1] = fn.sep().coeff(1);
    std::vector<Scalar> pw(k + 1, Scalar());
    pw[0] = Scalar(1);
    long e = fn.power();
    std::vector<Scalar> sq = sep;
    while (e > 0) {
      if (e & 1) pw = mul_prefix(pw, sq, k);
      sq = mul_prefix(sq, sq, k);
      e >>= 1;
    }
    acc = mul_prefix(acc, pw, k);
  }
  return acc;
}

// scalar jet of fn(form(z)) at the anchor via multinomial expansion of the
// form powers (the builder substitutes truncated polynomials instead)
TruncPoly<Scalar> scalar_jet_of_form_fn(const ShearFn<Scalar>& fn, const LinForm& form,
                                        const Vec& anchor, int k) {
  const int n = form.dim();
  Scalar c0 = form(anchor);
  std::vector<Scalar> pref = prefix_of_fn(fn, c0, k);
  TruncPoly<Scalar> out = TruncPoly<Scalar>::zero(n, k);
  out.at(0) = pref[0];
  auto tab = out.table_ptr();
  for (int d = 1; d <= k; ++d) {
    if (pref[d].is_zero()) continue;
    std::vector<Scalar> pw = form_power_coeffs(form, d);
    int lo = tab->degree_begin(d);
    for (size_t m = 0; m < pw.size(); ++m)
      out.at(lo + static_cast<int>(m)) =
          out.at(lo + static_cast<int>(m)) + pref[d] * pw[m];
  }
  return out;
}

}  // namespace

JetMap verifier_factor_jet(const Primitive<Scalar>& g, const Vec& anchor, int order) {
  const int n = primitive_dim(g);
  const int k = order;
  return std::visit(
      [&](const auto& f) -> JetMap {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Shear<Scalar>>) {
          TruncPoly<Scalar> t = scalar_jet_of_form_fn(f.fn, f.form, anchor, k);
          Scalar f0 = t.at(0);
          t.at(0) = Scalar();
          Vec value = vec_add(anchor, vec_scale(f.dir, f0));
          JetMap j(n, k, anchor, std::move(value));
          for (int i = 0; i < n; ++i)
            j.comp(i) =
                TruncPoly<Scalar>::coordinate(n, k, i) + t.scaled(f.dir[i]);
          return j;
        } else if constexpr (std::is_same_v<T, Overshear<Scalar>>) {
          ScalarJet<Scalar> sj;
          sj.anchor = anchor;
          sj.poly = scalar_jet_of_form_fn(f.fn, f.form, anchor, k);
          ScalarJet<Scalar> e = exp_jet(sj);
          TruncPoly<Scalar> em1 =
              e.poly - TruncPoly<Scalar>::constant(n, k, Scalar(1));
          Scalar q = norm2(f.dir);
          TruncPoly<Scalar> pair = TruncPoly<Scalar>::zero(n, k);
          Scalar pair0;
          for (int i = 0; i < n; ++i) {
            Scalar wc = f.dir[i].conj() / q;
            pair = pair + TruncPoly<Scalar>::coordinate(n, k, i).scaled(wc);
            pair0 += anchor[i] * wc;
          }
          pair.at(0) = pair0;
          TruncPoly<Scalar> amount = em1 * pair;
          Scalar a0 = amount.at(0);
          amount.at(0) = Scalar();
          Vec value = vec_add(anchor, vec_scale(f.dir, a0));
          JetMap j(n, k, anchor, std::move(value));
          for (int i = 0; i < n; ++i)
            j.comp(i) =
                TruncPoly<Scalar>::coordinate(n, k, i) + amount.scaled(f.dir[i]);
          return j;
        } else if constexpr (std::is_same_v<T, Translation<Scalar>>) {
          JetMap j = JetMap::identity(n, k, anchor);
          return j.rebased(anchor, vec_add(anchor, f.offset));
        } else {
          JetMap j(n, k, anchor, f.m.apply(anchor));
          for (int i = 0; i < n; ++i) {
            TruncPoly<Scalar> c = TruncPoly<Scalar>::zero(n, k);
            for (int jj = 0; jj < n; ++jj)
              c = c + TruncPoly<Scalar>::coordinate(n, k, jj).scaled(f.m(i, jj));
            j.comp(i) = std::move(c);
          }
          return j;
        }
      },
      g);
}

JetMap verifier_word_jet(const Word& w, const Vec& anchor, int order) {
  JetMap j = JetMap::identity(w.n, order, anchor);
  for (size_t i = w.factors.size(); i-- > 0;) {
    JetMap f = verifier_factor_jet(w.factors[i], j.value(), order);
    j = compose(f, j, order);
  }
  return j;
}

namespace {

struct ResidualAcc {
  double mag = 0;
  bool exact_zero = true;

  void feed(const Scalar& diff) {
    if (diff.is_exact()) {
      if (!diff.is_zero()) {
        exact_zero = false;
        mag = std::max(mag, diff.magnitude());
      }
    } else {
      double m = diff.magnitude();
      if (m != 0) exact_zero = false;
      mag = std::max(mag, m);
    }
  }
  bool pass(double tol) const { return exact_zero || mag <= tol; }
};

ResidualAcc jet_difference(const JetMap& got, const JetMap& want) {
  ResidualAcc acc;
  int k = std::min(got.order(), want.order());
  JetMap g = got.truncated(k), t = want.truncated(k);
  for (int i = 0; i < g.dim(); ++i) {
    acc.feed(g.value()[i] - t.value()[i]);
    for (int rank = 1; rank < g.comp(i).size(); ++rank)
      acc.feed(g.comp(i).at(rank) - t.comp(i).at(rank));
  }
  return acc;
}

bool word_is_exact(const Word& w) {
  for (const auto& f : w.factors) {
    bool ok = std::visit(
        [](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, Shear<Scalar>> ||
                        std::is_same_v<T, Overshear<Scalar>>) {
            for (const auto& c : g.fn.poly().coeffs())
              if (!c.is_exact()) return false;
            for (const auto& [root, m] : g.fn.roots()) {
              (void)m;
              if (!root.is_exact()) return false;
            }
            for (const auto& c : g.fn.sep().coeffs())
              if (!c.is_exact()) return false;
            return true;
          } else if constexpr (std::is_same_v<T, Translation<Scalar>>) {
            for (const auto& c : g.offset)
              if (!c.is_exact()) return false;
            return true;
          } else {
            for (int i = 0; i < g.m.dim(); ++i)
              for (int j = 0; j < g.m.dim(); ++j)
                if (!g.m(i, j).is_exact()) return false;
            return true;
          }
        },
        f);
    if (!ok) return false;
  }
  return true;
}

long word_precision(const Word& w) {
  long p = kDefaultPrecision;
  for (const auto& f : w.factors) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, Shear<Scalar>> ||
                        std::is_same_v<T, Overshear<Scalar>>) {
            for (const auto& c : g.fn.poly().coeffs())
              p = std::max<long>(p, c.precision());
          } else if constexpr (std::is_same_v<T, Translation<Scalar>>) {
            for (const auto& c : g.offset) p = std::max<long>(p, c.precision());
          } else {
            for (int i = 0; i < g.m.dim(); ++i)
              for (int j = 0; j < g.m.dim(); ++j)
                p = std::max<long>(p, g.m(i, j).precision());
          }
        },
        f);
  }
  return p;
}

}  // namespace

Report verify_word(const Word& w, const ProblemSpec& spec, double tol) {
  Report rep;
  rep.mode = word_is_exact(w) ? "exact" : "float";
  rep.precision_bits = word_precision(w);
  rep.seed = spec.config.seed;
  rep.grid_res =
      spec.config.grid_res > 0 ? spec.config.grid_res : default_grid_res(spec.n);
  const bool exact = rep.mode == "exact";
  const double use_tol = exact ? 0.0 : tol;

  for (size_t t = 0; t < spec.targets.size(); ++t) {
    const JetMap& target = spec.targets[t].jet;
    JetMap got = verifier_word_jet(w, target.anchor(), target.order());
    ResidualAcc acc = jet_difference(got, target);
    rep.add("jet-match[" + std::to_string(t) + "]", acc.mag, acc.exact_zero, use_tol,
            acc.pass(use_tol));
  }

  for (size_t i = 0; i < spec.fix.size(); ++i) {
    const auto& [a, order] = spec.fix[i];
    int upto = std::max(1, order - 1);
    JetMap got = verifier_word_jet(w, a, upto);
    ResidualAcc acc = jet_difference(got, JetMap::identity(spec.n, upto, a));
    rep.add("fix-order[" + std::to_string(i) + "]", acc.mag, acc.exact_zero, use_tol,
            acc.pass(use_tol));
  }

  for (size_t j = 0; j < spec.axis_points.size(); ++j) {
    const Vec& c = spec.axis_points[j];
    ResidualAcc acc;
    for (const auto& f : w.factors) {
      Vec img = primitive_eval(f, c);
      for (int i = 0; i < spec.n; ++i) acc.feed(img[i] - c[i]);
    }
    rep.add("axis-fix[" + std::to_string(j) + "]", acc.mag, acc.exact_zero, use_tol,
            acc.pass(use_tol));
  }

  if (spec.volume) {
    bool factors_ok = true;
    for (const auto& f : w.factors)
      if (!volume_preserving_factor(f, tol)) factors_ok = false;
    rep.add("volume-factors", factors_ok ? 0.0 : 1.0, factors_ok, 0, factors_ok);
    for (size_t t = 0; t < spec.targets.size(); ++t) {
      const JetMap& target = spec.targets[t].jet;
      if (target.order() < 2) continue;
      JetMap got = verifier_word_jet(w, target.anchor(), target.order());
      auto det = jacobian_det_jet(got, target.order() - 1);
      ResidualAcc acc;
      acc.feed(det.poly.at(0) - Scalar(1));
      for (int rank = 1; rank < det.poly.size(); ++rank) acc.feed(det.poly.at(rank));
      rep.add("det-jet[" + std::to_string(t) + "]", acc.mag, acc.exact_zero, use_tol,
              acc.pass(use_tol));
    }
  }

  if (spec.approx) {
    std::vector<Vec> grid = box_grid(spec.approx->box, rep.grid_res);
    Scalar dev2 = grid_deviation2(w, grid);
    Scalar eps2 = spec.approx->eps * spec.approx->eps;
    bool ok = real_cmp(dev2, eps2) <= 0;
    double dev = std::sqrt(std::max(0.0, dev2.magnitude()));
    rep.add("approx-grid", dev, dev2.is_zero(), spec.approx->eps.magnitude(), ok);
  }

  return rep;
}

Report verify_word(const ParamWord& w, const ParamProblem& spec, double tol,
                   const std::vector<Scalar>& param_grid) {
  Report rep;
  rep.mode = "poly1";
  rep.seed = spec.config.seed;
  rep.grid_res =
      spec.config.grid_res > 0 ? spec.config.grid_res : default_grid_res(spec.n);
  std::vector<Scalar> xs = param_grid;
  if (xs.empty()) xs.push_back(Scalar());
  long prec = kDefaultPrecision;
  for (size_t xi = 0; xi < xs.size(); ++xi) {
    Word wx = specialize(w, xs[xi]);
    ProblemSpec sx;
    sx.n = spec.n;
    sx.fix = spec.fix;
    sx.axis_points = spec.axis_points;
    sx.volume = spec.volume;
    sx.config = spec.config;
    if (spec.approx) {
      ApproxSpec ap;
      ap.box = spec.approx->box;
      ap.eps = spec.approx->eps;
      sx.approx = std::move(ap);
    }
    for (const auto& t : spec.targets) sx.targets.push_back({specialize(t.jet, xs[xi])});
    Report sub = verify_word(wx, sx, tol);
    prec = std::max(prec, sub.precision_bits);
    for (auto& e : sub.entries)
      rep.add("x[" + std::to_string(xi) + "]." + e.id, e.residual, e.exact_zero,
              e.tolerance, e.pass);
  }
  rep.precision_bits = prec;
  return rep;
}

Report crosscheck_numeric(const Word& w, const Vec& anchor, int order, const Scalar& h,
                          double tol) {
  if (order < 1 || order > 2)
    throw Error("numeric cross-check supports orders 1 and 2");
  const int n = w.n;
  mpfr_prec_t prec = std::max<mpfr_prec_t>(kDefaultPrecision, word_precision(w));
  Vec a(n);
  for (int i = 0; i < n; ++i) a[i] = anchor[i].to_float(prec);
  Scalar hh = h.to_float(prec);
  if (real_cmp(hh.abs2(), Scalar()) <= 0) throw Error("step h must be nonzero");

  JetMap jet = verifier_word_jet(w, a, order);

  auto eval_shift = [&](int j, const Scalar& dj, int l, const Scalar& dl) {
    Vec z = a;
    z[j] = z[j] + dj;
    if (l >= 0) z[l] = z[l] + dl;
    return word_eval(w, z);
  };

  struct Estimate {
    std::vector<int> exps;
    int comp;
    Scalar value;
  };
  auto estimate_all = [&](const Scalar& step) {
    std::vector<Estimate> out;
    // first order: (W(a+he_j) - W(a-he_j)) / 2h
    for (int j = 0; j < n; ++j) {
      Vec plus = eval_shift(j, step, -1, Scalar());
      Vec minus = eval_shift(j, -step, -1, Scalar());
      for (int i = 0; i < n; ++i) {
        std::vector<int> e(n, 0);
        e[j] = 1;
        out.push_back({e, i, (plus[i] - minus[i]) / (Scalar(2) * step)});
      }
    }
    if (order >= 2) {
      Vec center = word_eval(w, a);
      for (int j = 0; j < n; ++j) {
        Vec plus = eval_shift(j, step, -1, Scalar());
        Vec minus = eval_shift(j, -step, -1, Scalar());
        for (int i = 0; i < n; ++i) {
          std::vector<int> e(n, 0);
          e[j] = 2;
          Scalar second =
              (plus[i] - Scalar(2) * center[i] + minus[i]) / (step * step);
          out.push_back({e, i, second / Scalar(2)});
        }
      }
      for (int j = 0; j < n; ++j)
        for (int l = j + 1; l < n; ++l) {
          Vec pp = eval_shift(j, step, l, step);
          Vec pm = eval_shift(j, step, l, -step);
          Vec mp = eval_shift(j, -step, l, step);
          Vec mm = eval_shift(j, -step, l, -step);
          for (int i = 0; i < n; ++i) {
            std::vector<int> e(n, 0);
            e[j] = 1;
            e[l] = 1;
            Scalar mixed = (pp[i] - pm[i] - mp[i] + mm[i]) /
                           (Scalar(4) * step * step);
            out.push_back({e, i, mixed});
          }
        }
    }
    return out;
  };

  std::vector<Estimate> at_h = estimate_all(hh);
  std::vector<Estimate> at_h2 = estimate_all(hh * Scalar::rational(1, 2));

  Report rep;
  rep.mode = "float";
  rep.precision_bits = prec;
  rep.grid_res = 0;
  double h_mag = hh.magnitude();
  for (size_t i = 0; i < at_h.size(); ++i) {
    const auto& est = at_h2[i];
    Scalar want = jet.comp(est.comp).coeff(est.exps);
    double diff = (est.value - want).magnitude();
    // Richardson: err(h) ~ C h^2, so C ~ |D_h - D_{h/2}| / (3/4 h^2)
    double c_est = (at_h[i].value - est.value).magnitude() / (0.75 * h_mag * h_mag);
    double budget = tol + c_est * (h_mag / 2) * (h_mag / 2);
    std::string id = "fd[" + std::to_string(est.comp) + "][";
    for (int v = 0; v < n; ++v) id += std::to_string(est.exps[v]);
    id += "]";
    rep.add(id, diff, false, budget, diff <= budget);
  }
  return rep;
}

}  // namespace shearforge
