#pragma once

#include <utility>
#include <vector>

#include "shearforge/ring.hpp"
#include "shearforge/unipoly.hpp"

namespace shearforge {

inline Scalar pow_scalar(Scalar b, long e) {
  Scalar r(1);
  while (e > 0) {
    if (e & 1) r = r * b;
    b = b * b;
    e >>= 1;
  }
  return r;
}

// One-variable function in factored form:
//
//   f(zeta) = poly(zeta) * prod_i (zeta - root_i)^{m_i} * sep(zeta)^P
//
// with deg(sep) <= 1. Plain polynomials use only `poly`. The factors are
// kept separate for numerical reasons: expanding the smallness power sep^P
// into coefficients destroys it (the Horner sum cancels through about
// P log(1+|s c zeta|) bits), and expanding the root factors destroys exact
// point-fixing in float mode. Evaluation and Taylor data come from the
// factors and are stable at any power; roots are hit bitwise.
template <class R>
class ShearFn {
 public:
  ShearFn() = default;
  ShearFn(UniPoly<R> poly) : poly_(std::move(poly)) {}
  ShearFn(UniPoly<R> poly, std::vector<std::pair<Scalar, int>> roots,
          UniPoly<Scalar> sep, long power)
      : poly_(std::move(poly)),
        roots_(std::move(roots)),
        sep_(std::move(sep)),
        power_(power) {
    if (power_ < 0) throw Error("negative separator power");
    if (sep_.degree() > 1) throw Error("separator must be constant or linear");
    if (power_ == 0) sep_ = UniPoly<Scalar>();
    for (const auto& [root, m] : roots_) {
      (void)root;
      if (m < 1) throw Error("root multiplicities must be positive");
    }
  }

  const UniPoly<R>& poly() const { return poly_; }
  const std::vector<std::pair<Scalar, int>>& roots() const { return roots_; }
  const UniPoly<Scalar>& sep() const { return sep_; }
  long power() const { return power_; }
  bool has_sep() const { return power_ > 0 && !sep_.is_zero(); }
  bool plain() const { return roots_.empty() && !has_sep(); }

  bool is_zero() const { return poly_.is_zero(); }
  int degree() const {
    if (poly_.is_zero()) return -1;
    int d = poly_.degree();
    for (const auto& [root, m] : roots_) {
      (void)root;
      d += m;
    }
    if (has_sep()) d += static_cast<int>(power_) * sep_.degree();
    return d;
  }

  ShearFn operator-() const { return ShearFn(-poly_, roots_, sep_, power_); }
  ShearFn scaled(const R& s) const { return ShearFn(poly_.scaled(s), roots_, sep_, power_); }

  bool operator==(const ShearFn& o) const {
    if (!(poly_ == o.poly_) || power_ != o.power_ || !(sep_ == o.sep_)) return false;
    if (roots_.size() != o.roots_.size()) return false;
    for (size_t i = 0; i < roots_.size(); ++i)
      if (!(roots_[i].first == o.roots_[i].first) ||
          roots_[i].second != o.roots_[i].second)
        return false;
    return true;
  }

  // expanded coefficient form; exact-friendly but numerically fragile in
  // float mode at large powers
  UniPoly<R> expanded() const {
    UniPoly<Scalar> factors(1);
    for (const auto& [root, m] : roots_) {
      UniPoly<Scalar> lin(std::vector<Scalar>{-root, Scalar(1)});
      for (int i = 0; i < m; ++i) factors = factors * lin;
    }
    if (has_sep()) {
      UniPoly<Scalar> um(1);
      UniPoly<Scalar> sq = sep_;
      long e = power_;
      while (e > 0) {
        if (e & 1) um = um * sq;
        sq = sq * sq;
        e >>= 1;
      }
      factors = factors * um;
    }
    if constexpr (RingOps<R>::parametric) {
      std::vector<XPoly> c;
      c.reserve(factors.coeffs().size());
      for (const auto& s : factors.coeffs()) c.push_back(XPoly::constant(s));
      return poly_ * UniPoly<XPoly>(std::move(c));
    } else {
      return poly_ * factors;
    }
  }

 private:
  UniPoly<R> poly_;
  std::vector<std::pair<Scalar, int>> roots_;
  UniPoly<Scalar> sep_;
  long power_ = 0;
};

inline Scalar eval_fn(const ShearFn<Scalar>& f, const Scalar& z) {
  Scalar v = f.poly().eval(z);
  for (const auto& [root, m] : f.roots()) v = v * pow_scalar(z - root, m);
  if (f.has_sep()) v = v * pow_scalar(f.sep().eval(z), f.power());
  return v;
}

inline ShearFn<Scalar> specialize(const ShearFn<XPoly>& f, const Scalar& x0) {
  return ShearFn<Scalar>(specialize(f.poly(), x0), f.roots(), f.sep(), f.power());
}

inline ShearFn<XPoly> lift_fn(const ShearFn<Scalar>& f) {
  std::vector<XPoly> c;
  c.reserve(f.poly().coeffs().size());
  for (const auto& s : f.poly().coeffs()) c.push_back(XPoly::constant(s));
  return ShearFn<XPoly>(UniPoly<XPoly>(std::move(c)), f.roots(), f.sep(), f.power());
}

// First k+1 Taylor coefficients of a plain polynomial at c0.
template <class R>
std::vector<R> taylor_prefix(const UniPoly<R>& f, const R& c0, int k) {
  std::vector<R> acc(k + 1, R());
  const auto& c = f.coeffs();
  const int d_max = static_cast<int>(c.size()) - 1;
  std::vector<R> pw;
  pw.push_back(R(1));
  std::vector<Scalar> binom(k + 1, Scalar());
  binom[0] = Scalar(1);
  for (int d = 0; d <= d_max; ++d) {
    if (d > 0) {
      for (int j = std::min(d, k); j >= 1; --j) binom[j] = binom[j] + binom[j - 1];
      pw.push_back(pw.back() * c0);
    }
    if (c[d].is_zero()) continue;
    for (int j = 0; j <= std::min(d, k); ++j)
      acc[j] = acc[j] + RingOps<R>::mul_scalar(c[d] * pw[d - j], binom[j]);
  }
  return acc;
}

namespace detail {

// prefix of (b0 + eta)^m: binom(m,j) b0^{m-j}; exact zeros when b0 == 0
inline std::vector<Scalar> power_prefix(const Scalar& b0, long m, int k) {
  std::vector<Scalar> out(k + 1, Scalar());
  if (b0.is_zero()) {
    if (m <= k) out[m] = Scalar(1);
    return out;
  }
  Scalar binom(1);
  Scalar b_pow = pow_scalar(b0, m);
  Scalar b_inv = b0.inverse();
  for (long j = 0; j <= std::min<long>(k, m); ++j) {
    out[j] = binom * b_pow;
    binom = binom * Scalar(m - j) / Scalar(j + 1);
    b_pow = b_pow * b_inv;
  }
  return out;
}

inline std::vector<Scalar> convolve_prefix(const std::vector<Scalar>& a,
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

}  // namespace detail

// First k+1 Taylor coefficients of the factored function at c0, computed
// factor by factor; a root equal to c0 contributes an exact eta^m shift.
template <class R>
std::vector<R> taylor_prefix_fn(const ShearFn<R>& f, const R& c0, int k) {
  std::vector<R> acc = taylor_prefix(f.poly(), c0, k);
  if (f.plain()) return acc;

  Scalar c0s;
  bool c0_const = true;
  if constexpr (RingOps<R>::parametric) {
    if (!RingOps<R>::is_constant(c0)) c0_const = false;
    else c0s = RingOps<R>::const_term(c0);
  } else {
    c0s = c0;
  }
  if (!c0_const)
    throw Error("factored shear function expanded at a parametric anchor");

  std::vector<Scalar> fac(k + 1, Scalar());
  fac[0] = Scalar(1);
  for (const auto& [root, m] : f.roots())
    fac = detail::convolve_prefix(fac, detail::power_prefix(c0s - root, m, k), k);
  if (f.has_sep()) {
    // sep(c0 + eta) = s0 + s1 eta
    Scalar s1 = f.sep().coeff(1);
    Scalar s0 = f.sep().eval(c0s);
    if (s1.is_zero()) {
      fac = detail::convolve_prefix(fac, detail::power_prefix(s0, f.power(), k), k);
    } else {
      // (s0 + s1 eta)^P = s1^P (s0/s1 + eta)^P
      std::vector<Scalar> p = detail::power_prefix(s0 / s1, f.power(), k);
      Scalar scale = pow_scalar(s1, f.power());
      for (auto& x : p) x = x * scale;
      fac = detail::convolve_prefix(fac, p, k);
    }
  }
  std::vector<R> out(k + 1, R());
  for (int i = 0; i <= k; ++i) {
    if (acc[i].is_zero()) continue;
    for (int j = 0; i + j <= k; ++j) {
      if (fac[j].is_zero()) continue;
      out[i + j] = out[i + j] + RingOps<R>::mul_scalar(acc[i], fac[j]);
    }
  }
  return out;
}

}  // namespace shearforge
