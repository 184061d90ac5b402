#pragma once

#include <vector>

#include "shearforge/scalar.hpp"

namespace shearforge {

// One-variable polynomial over a coefficient ring R, low degree first.
// Trailing coefficients are trimmed only when exactly zero, so float
// pipelines never lose a deliberately tiny leading term.
template <class R>
class UniPoly {
 public:
  UniPoly() = default;
  UniPoly(long c) {
    if (c != 0) c_.push_back(R(c));
  }
  explicit UniPoly(std::vector<R> coeffs) : c_(std::move(coeffs)) { trim(); }

  static UniPoly constant(R c) {
    UniPoly p;
    if (!c.is_zero()) p.c_.push_back(std::move(c));
    return p;
  }
  static UniPoly monomial(int degree, R c) {
    UniPoly p;
    if (!c.is_zero()) {
      p.c_.assign(degree + 1, R());
      p.c_[degree] = std::move(c);
    }
    return p;
  }
  static UniPoly variable() { return monomial(1, R(1)); }

  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for 0
  const std::vector<R>& coeffs() const { return c_; }
  R coeff(int d) const {
    return (d >= 0 && d < static_cast<int>(c_.size())) ? c_[d] : R();
  }
  R leading() const { return c_.empty() ? R() : c_.back(); }

  UniPoly operator+(const UniPoly& o) const {
    std::vector<R> r(std::max(c_.size(), o.c_.size()), R());
    for (size_t i = 0; i < c_.size(); ++i) r[i] = r[i] + c_[i];
    for (size_t i = 0; i < o.c_.size(); ++i) r[i] = r[i] + o.c_[i];
    return UniPoly(std::move(r));
  }
  UniPoly operator-(const UniPoly& o) const { return *this + (-o); }
  UniPoly operator-() const {
    std::vector<R> r(c_);
    for (auto& x : r) x = -x;
    UniPoly p;
    p.c_ = std::move(r);
    return p;
  }
  UniPoly operator*(const UniPoly& o) const {
    if (is_zero() || o.is_zero()) return UniPoly();
    std::vector<R> r(c_.size() + o.c_.size() - 1, R());
    for (size_t i = 0; i < c_.size(); ++i)
      for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] = r[i + j] + c_[i] * o.c_[j];
    return UniPoly(std::move(r));
  }
  UniPoly scaled(const R& s) const {
    std::vector<R> r(c_);
    for (auto& x : r) x = x * s;
    return UniPoly(std::move(r));
  }

  bool operator==(const UniPoly& o) const {
    if (c_.size() != o.c_.size()) return false;
    for (size_t i = 0; i < c_.size(); ++i)
      if (!(c_[i] == o.c_[i])) return false;
    return true;
  }
  bool operator!=(const UniPoly& o) const { return !(*this == o); }

  R eval(const R& x) const {
    R acc;
    for (size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
    return acc;
  }

  UniPoly derivative() const {
    if (c_.size() <= 1) return UniPoly();
    std::vector<R> r(c_.size() - 1, R());
    for (size_t i = 1; i < c_.size(); ++i) r[i - 1] = c_[i] * R(static_cast<long>(i));
    return UniPoly(std::move(r));
  }

  // f(X + a), Horner in (X + a); exact in exact mode
  UniPoly taylor_shift(const R& a) const {
    UniPoly g;
    for (size_t i = c_.size(); i-- > 0;) {
      g = g.mul_linear(a);
      g = g + constant(c_[i]);
    }
    return g;
  }

  // f = (X - c) q + r
  std::pair<UniPoly, R> synthetic_div(const R& c) const {
    if (c_.empty()) return {UniPoly(), R()};
    std::vector<R> q(c_.size() - 1, R());
    R carry;
    for (size_t i = c_.size(); i-- > 1;) {
      carry = c_[i] + carry * c;
      q[i - 1] = carry;
    }
    R rem = c_[0] + carry * c;
    return {UniPoly(std::move(q)), rem};
  }

  UniPoly pow(int e) const {
    UniPoly r(1);
    for (int i = 0; i < e; ++i) r = r * *this;
    return r;
  }

 private:
  UniPoly mul_linear(const R& a) const {  // *(X + a)
    if (is_zero()) return UniPoly();
    std::vector<R> r(c_.size() + 1, R());
    for (size_t i = 0; i < c_.size(); ++i) {
      r[i + 1] = r[i + 1] + c_[i];
      r[i] = r[i] + c_[i] * a;
    }
    return UniPoly(std::move(r));
  }
  void trim() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
  }
  std::vector<R> c_;
};

// Polynomial functions of the family parameter.
using XPoly = UniPoly<Scalar>;

// Euclidean division over the scalar field: a = q b + r, deg r < deg b.
inline std::pair<UniPoly<Scalar>, UniPoly<Scalar>> divmod(const UniPoly<Scalar>& a,
                                                          const UniPoly<Scalar>& b) {
  if (b.is_zero()) throw SingularError("polynomial division by zero");
  UniPoly<Scalar> q, r = a;
  Scalar lead = b.leading();
  while (!r.is_zero() && r.degree() >= b.degree()) {
    int d = r.degree() - b.degree();
    Scalar c = r.leading() / lead;
    UniPoly<Scalar> t = UniPoly<Scalar>::monomial(d, c);
    q = q + t;
    r = r - t * b;
    if (r.degree() >= d + b.degree()) {
      // float leading term did not cancel exactly; force the cancellation
      std::vector<Scalar> rc(r.coeffs().begin(), r.coeffs().begin() + (d + b.degree()));
      r = UniPoly<Scalar>(std::move(rc));
    }
  }
  return {q, r};
}

// Specialize a parameter-polynomial object at x0.
inline Scalar specialize(const XPoly& p, const Scalar& x0) { return p.eval(x0); }

inline UniPoly<Scalar> specialize(const UniPoly<XPoly>& f, const Scalar& x0) {
  std::vector<Scalar> c;
  c.reserve(f.coeffs().size());
  for (const auto& xc : f.coeffs()) c.push_back(xc.eval(x0));
  return UniPoly<Scalar>(std::move(c));
}

}  // namespace shearforge
