#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "shearforge/truncpoly.hpp"

namespace shearforge {

// Truncated Taylor polynomial of a scalar function at an anchor (constant
// term included, unlike Jet components).
template <class R>
struct ScalarJet {
  std::vector<R> anchor;
  TruncPoly<R> poly;

  int dim() const { return poly.dim(); }
  int order() const { return poly.order(); }
};

// Truncated Taylor polynomial map of C^n at an anchor point. Components are
// polynomials in (z - anchor) with zero constant term; the image of the
// anchor is stored separately as `value`.
template <class R>
class Jet {
 public:
  Jet() = default;
  Jet(int n, int k, std::vector<R> anchor, std::vector<R> value)
      : n_(n), k_(k), anchor_(std::move(anchor)), value_(std::move(value)) {
    if (static_cast<int>(anchor_.size()) != n || static_cast<int>(value_.size()) != n)
      throw DimensionError("jet anchor/value dimension mismatch");
    comps_.assign(n, TruncPoly<R>::zero(n, k));
  }

  static Jet identity(int n, int k, std::vector<R> anchor) {
    Jet j(n, k, anchor, anchor);
    for (int i = 0; i < n; ++i) j.comps_[i] = TruncPoly<R>::coordinate(n, k, i);
    return j;
  }

  int dim() const { return n_; }
  int order() const { return k_; }
  const std::vector<R>& anchor() const { return anchor_; }
  const std::vector<R>& value() const { return value_; }
  const TruncPoly<R>& comp(int i) const { return comps_[i]; }
  TruncPoly<R>& comp(int i) { return comps_[i]; }

  void set_coeff(int component, const std::vector<int>& exps, R v) {
    int d = 0;
    for (int e : exps) d += e;
    if (d < 1 || d > k_) throw DimensionError("jet coefficient degree out of range");
    comps_[component].set(exps, std::move(v));
  }

  Matrix<R> linear_part() const {
    Matrix<R> m(n_);
    std::vector<int> e(n_, 0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        e.assign(n_, 0);
        e[j] = 1;
        m(i, j) = comps_[i].coeff(e);
      }
    return m;
  }

  bool nondegenerate() const { return !linear_part().det().is_zero(); }

  std::vector<R> eval(const std::vector<R>& z) const {
    std::vector<R> xi(n_);
    for (int i = 0; i < n_; ++i) xi[i] = z[i] - anchor_[i];
    std::vector<R> r(value_);
    for (int i = 0; i < n_; ++i) r[i] = r[i] + comps_[i].eval(xi);
    return r;
  }

  Jet truncated(int k) const {
    if (k > k_) throw DimensionError("cannot extend a jet's order");
    Jet j(n_, k, anchor_, value_);
    for (int i = 0; i < n_; ++i) j.comps_[i] = comps_[i].truncated(k);
    return j;
  }

  // T_{value -> new_value} o J o T_{new_anchor -> anchor}: coefficients kept
  Jet rebased(std::vector<R> new_anchor, std::vector<R> new_value) const {
    if (static_cast<int>(new_anchor.size()) != n_ ||
        static_cast<int>(new_value.size()) != n_)
      throw DimensionError("rebase dimension mismatch");
    Jet j = *this;
    j.anchor_ = std::move(new_anchor);
    j.value_ = std::move(new_value);
    return j;
  }

  bool operator==(const Jet& o) const {
    if (n_ != o.n_ || k_ != o.k_) return false;
    for (int i = 0; i < n_; ++i)
      if (!(comps_[i] == o.comps_[i])) return false;
    for (int i = 0; i < n_; ++i)
      if (!(anchor_[i] == o.anchor_[i]) || !(value_[i] == o.value_[i])) return false;
    return true;
  }

 private:
  int n_ = 0, k_ = 0;
  std::vector<R> anchor_, value_;
  std::vector<TruncPoly<R>> comps_;
};

using JetMap = Jet<Scalar>;
using ParamJet = Jet<XPoly>;

namespace detail {

template <class R>
bool anchors_match(const std::vector<R>& a, const std::vector<R>& b) {
  if constexpr (RingOps<R>::parametric) {
    for (size_t i = 0; i < a.size(); ++i)
      if (!(a[i] == b[i])) return false;
    return true;
  } else {
    // agreement is limited by the weakest float precision present
    mpfr_prec_t p = 0;
    bool exact = true;
    for (const auto& x : a)
      if (!x.is_exact()) {
        exact = false;
        p = p == 0 ? x.precision() : std::min(p, x.precision());
      }
    for (const auto& x : b)
      if (!x.is_exact()) {
        exact = false;
        p = p == 0 ? x.precision() : std::min(p, x.precision());
      }
    for (size_t i = 0; i < a.size(); ++i) {
      if (exact) {
        if (!(a[i] == b[i])) return false;
      } else if (!a[i].close_to(b[i], default_tolerance(std::min(p, kDefaultPrecision)))) {
        return false;
      }
    }
    return true;
  }
}

}  // namespace detail

// Jet of A o B, anchored at B.anchor; requires B.value == A.anchor.
template <class R>
Jet<R> compose(const Jet<R>& a, const Jet<R>& b, int order) {
  if (a.dim() != b.dim()) throw DimensionError("compose dimension mismatch");
  if (order < 1 || order > std::min(a.order(), b.order()))
    throw DimensionError("compose order exceeds available jet data");
  if (!detail::anchors_match(b.value(), a.anchor())) {
    std::string msg = "compose anchor mismatch: B.value != A.anchor";
    if constexpr (!RingOps<R>::parametric) {
      double worst = 0;
      bool all_exact = true;
      for (size_t i = 0; i < b.value().size(); ++i) {
        worst = std::max(worst, (b.value()[i] - a.anchor()[i]).magnitude());
        if (!b.value()[i].is_exact() || !a.anchor()[i].is_exact()) all_exact = false;
      }
      char buf[96];
      std::snprintf(buf, sizeof buf, " (|delta| = %.3e, exact=%d)", worst,
                    all_exact ? 1 : 0);
      msg += buf;
    }
    throw Error(msg);
  }
  Jet<R> at = a.truncated(order), bt = b.truncated(order);
  Jet<R> r(a.dim(), order, b.anchor(), a.value());
  std::vector<TruncPoly<R>> args;
  args.reserve(a.dim());
  for (int i = 0; i < a.dim(); ++i) args.push_back(bt.comp(i));
  for (int i = 0; i < a.dim(); ++i) r.comp(i) = at.comp(i).substitute(args);
  return r;
}

// Formal inverse: compose(A, inverse(A), k) is the identity jet at A.anchor.
template <class R>
Jet<R> formal_inverse(const Jet<R>& a, int order) {
  if (order < 1 || order > a.order())
    throw DimensionError("inverse order exceeds available jet data");
  Jet<R> at = a.truncated(order);
  Matrix<R> l = at.linear_part();
  Matrix<R> linv;
  if constexpr (RingOps<R>::parametric) {
    linv = polymat_inverse(l);
  } else {
    if (l.det().is_zero()) throw SingularError("degenerate jet has no inverse");
    linv = mat_inverse(l);
  }
  const int n = a.dim();
  // higher-order part H = P - L
  std::vector<TruncPoly<R>> high;
  for (int i = 0; i < n; ++i) {
    TruncPoly<R> h = at.comp(i);
    for (int j = 0; j < n; ++j) {
      TruncPoly<R> lin = TruncPoly<R>::coordinate(n, order, j).scaled(l(i, j));
      h = h - lin;
    }
    high.push_back(std::move(h));
  }
  // iterate J <- Linv (xi - H(J))
  std::vector<TruncPoly<R>> cur(n);
  for (int i = 0; i < n; ++i) {
    cur[i] = TruncPoly<R>::zero(n, order);
    for (int j = 0; j < n; ++j)
      cur[i] = cur[i] + TruncPoly<R>::coordinate(n, order, j).scaled(linv(i, j));
  }
  for (int it = 1; it < order; ++it) {
    std::vector<TruncPoly<R>> hj(n);
    for (int i = 0; i < n; ++i) hj[i] = high[i].substitute(cur);
    std::vector<TruncPoly<R>> next(n);
    for (int i = 0; i < n; ++i) {
      TruncPoly<R> acc = TruncPoly<R>::zero(n, order);
      for (int j = 0; j < n; ++j) {
        TruncPoly<R> t = TruncPoly<R>::coordinate(n, order, j) - hj[j];
        acc = acc + t.scaled(linv(i, j));
      }
      next[i] = std::move(acc);
    }
    cur = std::move(next);
  }
  Jet<R> r(n, order, at.value(), at.anchor());
  for (int i = 0; i < n; ++i) r.comp(i) = cur[i];
  return r;
}

// Truncated Taylor polynomial of det D(A) at the anchor, order <= A.order-1.
template <class R>
ScalarJet<R> jacobian_det_jet(const Jet<R>& a, int order) {
  if (order < 0 || order > a.order() - 1)
    throw DimensionError("jacobian order exceeds available jet data (loses one degree)");
  const int n = a.dim();
  std::vector<TruncPoly<R>> d(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      d[static_cast<size_t>(i) * n + j] = a.comp(i).derivative(j).truncated(order);
  // cofactor determinant over truncated polynomials
  std::vector<int> cols(n);
  for (int i = 0; i < n; ++i) cols[i] = i;
  struct Rec {
    int n;
    const std::vector<TruncPoly<R>>* d;
    TruncPoly<R> run(int row, std::vector<int>& cols) {
      if (cols.size() == 1)
        return (*d)[static_cast<size_t>(row) * n + cols[0]];
      TruncPoly<R> acc = TruncPoly<R>::zero((*d)[0].dim(), (*d)[0].order());
      for (size_t c = 0; c < cols.size(); ++c) {
        int col = cols[c];
        std::vector<int> rest;
        rest.reserve(cols.size() - 1);
        for (size_t t = 0; t < cols.size(); ++t)
          if (t != c) rest.push_back(cols[t]);
        TruncPoly<R> term =
            (*d)[static_cast<size_t>(row) * n + col] * run(row + 1, rest);
        acc = (c % 2 == 0) ? acc + term : acc - term;
      }
      return acc;
    }
  } rec{n, &d};
  ScalarJet<R> s;
  s.anchor = a.anchor();
  s.poly = rec.run(0, cols);
  return s;
}

// exp of a scalar jet: finite series on the constant-free part; a nonzero
// constant term contributes the transcendental factor e^c (float only).
template <class R>
ScalarJet<R> exp_jet(const ScalarJet<R>& s) {
  const int k = s.order();
  R c = s.poly.at(0);
  TruncPoly<R> body = s.poly;
  body.at(0) = R();
  TruncPoly<R> acc = TruncPoly<R>::constant(s.poly.dim(), k, R(1));
  TruncPoly<R> pw = acc;
  Scalar fact(1);
  for (int i = 1; i <= k; ++i) {
    pw = pw * body;
    fact = fact * Scalar(i);
    acc = acc + pw.scaled_scalar(fact.inverse());
  }
  if (!c.is_zero()) {
    if constexpr (RingOps<R>::parametric) {
      throw ModeError("exp of a parametric jet with nonzero constant term");
    } else {
      acc = acc.scaled(c.exp());
    }
  }
  ScalarJet<R> r;
  r.anchor = s.anchor;
  r.poly = std::move(acc);
  return r;
}

// S o B for a scalar jet S anchored at B.value.
template <class R>
ScalarJet<R> scalar_compose(const ScalarJet<R>& s, const Jet<R>& b, int order) {
  if (!detail::anchors_match(b.value(), s.anchor))
    throw Error("scalar_compose anchor mismatch");
  Jet<R> bt = b.truncated(order);
  std::vector<TruncPoly<R>> args;
  for (int i = 0; i < b.dim(); ++i) args.push_back(bt.comp(i));
  ScalarJet<R> r;
  r.anchor = b.anchor();
  r.poly = s.poly.truncated(order).substitute(args);
  return r;
}

inline ParamJet lift_jet(const JetMap& j) {
  std::vector<XPoly> anchor, value;
  for (const auto& a : j.anchor()) anchor.push_back(XPoly::constant(a));
  for (const auto& v : j.value()) value.push_back(XPoly::constant(v));
  ParamJet r(j.dim(), j.order(), anchor, value);
  for (int i = 0; i < j.dim(); ++i)
    for (int rank = 1; rank < j.comp(i).size(); ++rank)
      r.comp(i).at(rank) = XPoly::constant(j.comp(i).at(rank));
  return r;
}

inline JetMap specialize(const ParamJet& j, const Scalar& x0) {
  Vec anchor, value;
  for (const auto& a : j.anchor()) anchor.push_back(a.eval(x0));
  for (const auto& v : j.value()) value.push_back(v.eval(x0));
  JetMap r(j.dim(), j.order(), anchor, value);
  for (int i = 0; i < j.dim(); ++i)
    for (int rank = 1; rank < j.comp(i).size(); ++rank)
      r.comp(i).at(rank) = j.comp(i).at(rank).eval(x0);
  return r;
}

}  // namespace shearforge
