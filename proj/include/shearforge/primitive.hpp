#pragma once

#include <variant>
#include <vector>

#include "shearforge/jet.hpp"
#include "shearforge/shearfn.hpp"
#include "shearforge/unipoly.hpp"

namespace shearforge {

// The four primitive automorphisms. Forms and directions are plain scalars
// even in the parametric instantiation; only the one-variable functions,
// translation offsets and linear entries carry the parameter.
//
//   Shear:      z + f(form(z)) dir             with form(dir) = 0
//   Overshear:  z + (e^{f(form(z))} - 1) <z,dir> dir / |dir|^2
//   Translation z + t
//   LinearMap   M z
//
// The overshear divides the Hermitian pairing by |dir|^2, which is the
// |dir| = 1 normalization written scale-invariantly; it keeps rational data
// exact and makes the inverse exactly the same map with f replaced by -f.
template <class R>
struct Shear {
  LinForm form;
  Vec dir;
  ShearFn<R> fn;
};

template <class R>
struct Overshear {
  LinForm form;
  Vec dir;
  ShearFn<R> fn;
};

template <class R>
struct Translation {
  std::vector<R> offset;
};

template <class R>
struct LinearMap {
  Matrix<R> m;
};

template <class R>
using Primitive = std::variant<Shear<R>, Overshear<R>, Translation<R>, LinearMap<R>>;

// Ordered composition word; factors[0] is applied last (function
// composition order: word = factors[0] o factors[1] o ... o factors[m-1]).
template <class R>
struct AutoWord {
  int n = 0;
  std::vector<Primitive<R>> factors;
};

using Word = AutoWord<Scalar>;
using ParamWord = AutoWord<XPoly>;

template <class R>
int primitive_dim(const Primitive<R>& p) {
  return std::visit(
      [](const auto& g) -> int {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Shear<R>> || std::is_same_v<T, Overshear<R>>)
          return static_cast<int>(g.dir.size());
        else if constexpr (std::is_same_v<T, Translation<R>>)
          return static_cast<int>(g.offset.size());
        else
          return g.m.dim();
      },
      p);
}

template <class R>
Primitive<R> make_shear(LinForm form, Vec dir, ShearFn<R> fn) {
  if (form.coeffs.size() != dir.size()) throw DimensionError("shear shape mismatch");
  if (form.is_zero()) throw Error("shear form must be nonzero");
  if (vec_is_zero(dir)) throw Error("shear direction must be nonzero");
  if (!form(dir).is_zero()) throw Error("shear requires form(dir) = 0");
  return Shear<R>{std::move(form), std::move(dir), std::move(fn)};
}

template <class R>
Primitive<R> make_shear(LinForm form, Vec dir, UniPoly<R> fn) {
  return make_shear<R>(std::move(form), std::move(dir), ShearFn<R>(std::move(fn)));
}

template <class R>
Primitive<R> make_overshear(LinForm form, Vec dir, ShearFn<R> fn) {
  if (form.coeffs.size() != dir.size()) throw DimensionError("overshear shape mismatch");
  if (form.is_zero()) throw Error("overshear form must be nonzero");
  if (vec_is_zero(dir)) throw Error("overshear direction must be nonzero");
  if (!form(dir).is_zero()) throw Error("overshear requires form(dir) = 0");
  return Overshear<R>{std::move(form), std::move(dir), std::move(fn)};
}

template <class R>
Primitive<R> make_overshear(LinForm form, Vec dir, UniPoly<R> fn) {
  return make_overshear<R>(std::move(form), std::move(dir), ShearFn<R>(std::move(fn)));
}

template <class R>
Primitive<R> primitive_inverse(const Primitive<R>& p) {
  return std::visit(
      [](const auto& g) -> Primitive<R> {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Shear<R>>) {
          return Shear<R>{g.form, g.dir, -g.fn};
        } else if constexpr (std::is_same_v<T, Overshear<R>>) {
          return Overshear<R>{g.form, g.dir, -g.fn};
        } else if constexpr (std::is_same_v<T, Translation<R>>) {
          std::vector<R> t(g.offset);
          for (auto& x : t) x = -x;
          return Translation<R>{std::move(t)};
        } else {
          if constexpr (RingOps<R>::parametric)
            return LinearMap<R>{polymat_inverse(g.m)};
          else
            return LinearMap<R>{mat_inverse(g.m)};
        }
      },
      p);
}

// Pointwise evaluation (scalar words only; specialize parametric words first).
inline Vec primitive_eval(const Primitive<Scalar>& p, const Vec& z) {
  return std::visit(
      [&](const auto& g) -> Vec {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Shear<Scalar>>) {
          Scalar t = eval_fn(g.fn, g.form(z));
          return vec_add(z, vec_scale(g.dir, t));
        } else if constexpr (std::is_same_v<T, Overshear<Scalar>>) {
          Scalar t = eval_fn(g.fn, g.form(z));
          Scalar factor = t.exp() - Scalar(1);  // float mode enforced here
          Scalar amount = factor * herm(z, g.dir) / norm2(g.dir);
          return vec_add(z, vec_scale(g.dir, amount));
        } else if constexpr (std::is_same_v<T, Translation<Scalar>>) {
          return vec_add(z, g.offset);
        } else {
          return g.m.apply(z);
        }
      },
      p);
}

inline Vec word_eval(const Word& w, Vec z) {
  for (size_t i = w.factors.size(); i-- > 0;) z = primitive_eval(w.factors[i], z);
  return z;
}

// Taylor jet of one primitive at an anchor.
template <class R>
Jet<R> primitive_jet(const Primitive<R>& p, const std::vector<R>& anchor, int order) {
  const int n = primitive_dim(p);
  if (static_cast<int>(anchor.size()) != n) throw DimensionError("jet anchor mismatch");
  const int k = order;
  return std::visit(
      [&](const auto& g) -> Jet<R> {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Shear<R>> || std::is_same_v<T, Overshear<R>>) {
          R c0 = g.form.template apply<R>(anchor);
          std::vector<R> coeffs = taylor_prefix_fn(g.fn, c0, k);
          // scalar jet of f(form(z)) at the anchor, constant included
          TruncPoly<R> lin = TruncPoly<R>::zero(n, k);
          for (int i = 0; i < n; ++i)
            lin = lin + TruncPoly<R>::coordinate(n, k, i).scaled_scalar(g.form.coeffs[i]);
          TruncPoly<R> t = TruncPoly<R>::zero(n, k);
          for (int d = k; d >= 0; --d) {
            t = t * lin;
            t.at(0) = t.at(0) + coeffs[d];
          }
          if constexpr (std::is_same_v<T, Shear<R>>) {
            R f0 = t.at(0);
            TruncPoly<R> body = t;
            body.at(0) = R();
            std::vector<R> value(anchor);
            for (int i = 0; i < n; ++i)
              value[i] = value[i] + RingOps<R>::mul_scalar(f0, g.dir[i]);
            Jet<R> j(n, k, anchor, std::move(value));
            for (int i = 0; i < n; ++i)
              j.comp(i) = TruncPoly<R>::coordinate(n, k, i) + body.scaled_scalar(g.dir[i]);
            return j;
          } else {
            ScalarJet<R> sj;
            sj.anchor = anchor;
            sj.poly = t;
            ScalarJet<R> e = exp_jet(sj);  // rejects exact/parametric e^c, c != 0
            TruncPoly<R> em1 = e.poly - TruncPoly<R>::constant(n, k, R(1));
            Scalar q = norm2(g.dir);
            TruncPoly<R> pair = TruncPoly<R>::zero(n, k);
            R pair0;
            for (int i = 0; i < n; ++i) {
              Scalar w = g.dir[i].conj() / q;
              pair = pair + TruncPoly<R>::coordinate(n, k, i).scaled_scalar(w);
              pair0 = pair0 + RingOps<R>::mul_scalar(anchor[i], w);
            }
            pair.at(0) = pair0;
            TruncPoly<R> amount = em1 * pair;
            R a0 = amount.at(0);
            amount.at(0) = R();
            std::vector<R> value(anchor);
            for (int i = 0; i < n; ++i)
              value[i] = value[i] + RingOps<R>::mul_scalar(a0, g.dir[i]);
            Jet<R> j(n, k, anchor, std::move(value));
            for (int i = 0; i < n; ++i)
              j.comp(i) =
                  TruncPoly<R>::coordinate(n, k, i) + amount.scaled_scalar(g.dir[i]);
            return j;
          }
        } else if constexpr (std::is_same_v<T, Translation<R>>) {
          std::vector<R> value(anchor);
          for (int i = 0; i < n; ++i) value[i] = value[i] + g.offset[i];
          Jet<R> j = Jet<R>::identity(n, k, anchor);
          return j.rebased(anchor, std::move(value));
        } else {
          Jet<R> j(n, k, anchor, g.m.apply(anchor));
          for (int i = 0; i < n; ++i) {
            TruncPoly<R> c = TruncPoly<R>::zero(n, k);
            for (int jj = 0; jj < n; ++jj)
              c = c + TruncPoly<R>::coordinate(n, k, jj).scaled(g.m(i, jj));
            j.comp(i) = std::move(c);
          }
          return j;
        }
      },
      p);
}

// Jet at `anchor` of the whole composition, chaining factor jets.
template <class R>
Jet<R> word_jet(const AutoWord<R>& w, const std::vector<R>& anchor, int order) {
  if (order < 1) throw DimensionError("word_jet needs order >= 1");
  Jet<R> j = Jet<R>::identity(w.n, order, anchor);
  for (size_t i = w.factors.size(); i-- > 0;) {
    Jet<R> f = primitive_jet(w.factors[i], j.value(), order);
    j = compose(f, j, order);
  }
  return j;
}

// det of the factor's linear action is identically one
template <class R>
bool volume_preserving_factor(const Primitive<R>& p, double tol) {
  return std::visit(
      [&](const auto& g) -> bool {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Shear<R>> || std::is_same_v<T, Translation<R>>)
          return true;
        else if constexpr (std::is_same_v<T, Overshear<R>>)
          return false;
        else {
          R d = g.m.det();
          R one(1);
          if constexpr (RingOps<R>::parametric) {
            return d == one;
          } else {
            return d.is_exact() ? d == one : d.close_to(one, tol);
          }
        }
      },
      p);
}

inline Primitive<Scalar> specialize(const Primitive<XPoly>& p, const Scalar& x0) {
  return std::visit(
      [&](const auto& g) -> Primitive<Scalar> {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Shear<XPoly>>) {
          return Shear<Scalar>{g.form, g.dir, specialize(g.fn, x0)};
        } else if constexpr (std::is_same_v<T, Overshear<XPoly>>) {
          return Overshear<Scalar>{g.form, g.dir, specialize(g.fn, x0)};
        } else if constexpr (std::is_same_v<T, Translation<XPoly>>) {
          Vec t;
          for (const auto& c : g.offset) t.push_back(c.eval(x0));
          return Translation<Scalar>{std::move(t)};
        } else {
          Mat m(g.m.dim());
          for (int i = 0; i < g.m.dim(); ++i)
            for (int j = 0; j < g.m.dim(); ++j) m(i, j) = g.m(i, j).eval(x0);
          return LinearMap<Scalar>{std::move(m)};
        }
      },
      p);
}

inline Word specialize(const ParamWord& w, const Scalar& x0) {
  Word r;
  r.n = w.n;
  for (const auto& f : w.factors) r.factors.push_back(specialize(f, x0));
  return r;
}

inline ParamWord lift_word(const Word& w) {
  ParamWord r;
  r.n = w.n;
  for (const auto& f : w.factors) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, Shear<Scalar>>) {
            r.factors.push_back(Shear<XPoly>{g.form, g.dir, lift_fn(g.fn)});
          } else if constexpr (std::is_same_v<T, Overshear<Scalar>>) {
            r.factors.push_back(Overshear<XPoly>{g.form, g.dir, lift_fn(g.fn)});
          } else if constexpr (std::is_same_v<T, Translation<Scalar>>) {
            std::vector<XPoly> t;
            for (const auto& s : g.offset) t.push_back(XPoly::constant(s));
            r.factors.push_back(Translation<XPoly>{std::move(t)});
          } else {
            PolyMat m(g.m.dim());
            for (int i = 0; i < g.m.dim(); ++i)
              for (int j = 0; j < g.m.dim(); ++j) m(i, j) = XPoly::constant(g.m(i, j));
            r.factors.push_back(LinearMap<XPoly>{std::move(m)});
          }
        },
        f);
  }
  return r;
}

}  // namespace shearforge
