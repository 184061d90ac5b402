#pragma once

#include "shearforge/scalar.hpp"
#include "shearforge/unipoly.hpp"

namespace shearforge {

// Uniform access to the two coefficient rings the library instantiates:
// plain scalars, and polynomials in the family parameter.
template <class R>
struct RingOps;

template <>
struct RingOps<Scalar> {
  static constexpr bool parametric = false;
  static Scalar lift(const Scalar& c) { return c; }
  static Scalar mul_scalar(const Scalar& a, const Scalar& c) { return a * c; }
  static Scalar const_term(const Scalar& a) { return a; }
  static bool is_constant(const Scalar&) { return true; }
  static double magnitude(const Scalar& a) { return a.magnitude(); }
};

template <>
struct RingOps<XPoly> {
  static constexpr bool parametric = true;
  static XPoly lift(const Scalar& c) { return XPoly::constant(c); }
  static XPoly mul_scalar(const XPoly& a, const Scalar& c) { return a.scaled(c); }
  static Scalar const_term(const XPoly& a) { return a.coeff(0); }
  static bool is_constant(const XPoly& a) { return a.degree() <= 0; }
  static double magnitude(const XPoly& a) {
    double m = 0;
    for (const auto& c : a.coeffs()) m = std::max(m, c.magnitude());
    return m;
  }
};

}  // namespace shearforge
