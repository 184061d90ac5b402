#pragma once

// Test-only brute-force multivariate polynomial arithmetic, independent of
// the library's truncated tables. Used as the oracle for jet operations.

#include <map>
#include <vector>

#include "shearforge/scalar.hpp"

namespace oracle {

using shearforge::Scalar;

struct NaivePoly {
  int n = 0;
  std::map<std::vector<int>, Scalar> terms;

  explicit NaivePoly(int dim = 0) : n(dim) {}

  static NaivePoly constant(int n, const Scalar& c) {
    NaivePoly p(n);
    if (!c.is_zero()) p.terms[std::vector<int>(n, 0)] = c;
    return p;
  }
  static NaivePoly var(int n, int i) {
    NaivePoly p(n);
    std::vector<int> e(n, 0);
    e[i] = 1;
    p.terms[e] = Scalar(1);
    return p;
  }

  void add_term(const std::vector<int>& e, const Scalar& c) {
    auto it = terms.find(e);
    Scalar s = (it == terms.end()) ? c : it->second + c;
    if (s.is_zero())
      terms.erase(e);
    else
      terms[e] = s;
  }

  NaivePoly operator+(const NaivePoly& o) const {
    NaivePoly r = *this;
    for (const auto& [e, c] : o.terms) r.add_term(e, c);
    return r;
  }
  NaivePoly operator*(const NaivePoly& o) const {
    NaivePoly r(n);
    for (const auto& [e1, c1] : terms)
      for (const auto& [e2, c2] : o.terms) {
        std::vector<int> e(n);
        for (int i = 0; i < n; ++i) e[i] = e1[i] + e2[i];
        r.add_term(e, c1 * c2);
      }
    return r;
  }
  NaivePoly scaled(const Scalar& s) const {
    NaivePoly r(n);
    for (const auto& [e, c] : terms) r.add_term(e, c * s);
    return r;
  }

  NaivePoly substitute(const std::vector<NaivePoly>& args) const {
    NaivePoly r(n);
    for (const auto& [e, c] : terms) {
      NaivePoly t = constant(n, Scalar(1));
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < e[i]; ++k) t = t * args[i];
      r = r + t.scaled(c);
    }
    return r;
  }

  NaivePoly drop_above(int maxdeg) const {
    NaivePoly r(n);
    for (const auto& [e, c] : terms) {
      int d = 0;
      for (int x : e) d += x;
      if (d <= maxdeg) r.add_term(e, c);
    }
    return r;
  }

  Scalar coeff(const std::vector<int>& e) const {
    auto it = terms.find(e);
    return it == terms.end() ? Scalar() : it->second;
  }
};

}  // namespace oracle
