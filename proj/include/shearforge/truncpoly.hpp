#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "shearforge/linalg.hpp"
#include "shearforge/ring.hpp"

namespace shearforge {

// Monomials of n variables with total degree 0..k, in graded lexicographic
// order: degree ascending, then exponent tuples descending lexicographically
// (within a degree, the pure z1 power comes first). This order is fixed for
// serialization and coefficient comparison.
class MonomialTable {
 public:
  static std::shared_ptr<const MonomialTable> get(int n, int k);

  int dim() const { return n_; }
  int order() const { return k_; }
  int size() const { return static_cast<int>(exps_.size()); }

  const std::vector<int>& exponents(int rank) const { return exps_[rank]; }
  int degree(int rank) const { return deg_[rank]; }
  int degree_begin(int d) const { return offset_[d]; }
  int degree_end(int d) const { return offset_[d + 1]; }

  // rank of a monomial, -1 if degree exceeds the order
  int rank_of(const std::vector<int>& e) const;
  // rank of the product of two monomials, -1 if truncated away
  int product_rank(int i, int j) const { return prod_[static_cast<size_t>(i) * exps_.size() + j]; }
  // rank after multiplying by variable v, -1 if truncated away
  int bump_rank(int rank, int v) const { return bump_[static_cast<size_t>(rank) * n_ + v]; }
  // some variable with positive exponent and the rank with it decremented
  // (rank 0 has none); used for incremental monomial evaluation
  std::pair<int, int> split(int rank) const { return split_[rank]; }

 private:
  MonomialTable(int n, int k);
  static std::string key(const std::vector<int>& e);

  int n_, k_;
  std::vector<std::vector<int>> exps_;
  std::vector<int> deg_;
  std::vector<int> offset_;
  std::unordered_map<std::string, int> rank_;
  std::vector<int> prod_;
  std::vector<int> bump_;
  std::vector<std::pair<int, int>> split_;
};

// Truncated multivariate polynomial (orders 0..k) over a coefficient ring.
template <class R>
class TruncPoly {
 public:
  TruncPoly() = default;
  TruncPoly(std::shared_ptr<const MonomialTable> tab)
      : tab_(std::move(tab)), c_(tab_->size(), R()) {}

  static TruncPoly zero(int n, int k) { return TruncPoly(MonomialTable::get(n, k)); }
  static TruncPoly constant(int n, int k, R v) {
    TruncPoly p = zero(n, k);
    p.c_[0] = std::move(v);
    return p;
  }
  // the coordinate monomial z_i
  static TruncPoly coordinate(int n, int k, int i) {
    TruncPoly p = zero(n, k);
    std::vector<int> e(n, 0);
    e[i] = 1;
    p.c_[p.tab_->rank_of(e)] = R(1);
    return p;
  }

  const MonomialTable& table() const { return *tab_; }
  std::shared_ptr<const MonomialTable> table_ptr() const { return tab_; }
  int dim() const { return tab_->dim(); }
  int order() const { return tab_->order(); }
  int size() const { return static_cast<int>(c_.size()); }

  const R& at(int rank) const { return c_[rank]; }
  R& at(int rank) { return c_[rank]; }
  const R& coeff(const std::vector<int>& e) const {
    int r = tab_->rank_of(e);
    if (r < 0) throw DimensionError("monomial outside truncation order");
    return c_[r];
  }
  void set(const std::vector<int>& e, R v) {
    int r = tab_->rank_of(e);
    if (r < 0) throw DimensionError("monomial outside truncation order");
    c_[r] = std::move(v);
  }

  bool is_zero() const {
    for (const auto& x : c_)
      if (!x.is_zero()) return false;
    return true;
  }
  bool zero_through(int d) const {  // no terms of degree <= d
    for (int r = 0; r < tab_->degree_end(d); ++r)
      if (!c_[r].is_zero()) return false;
    return true;
  }

  TruncPoly operator+(const TruncPoly& o) const {
    check(o);
    TruncPoly r = *this;
    for (int i = 0; i < size(); ++i) r.c_[i] = r.c_[i] + o.c_[i];
    return r;
  }
  TruncPoly operator-(const TruncPoly& o) const {
    check(o);
    TruncPoly r = *this;
    for (int i = 0; i < size(); ++i) r.c_[i] = r.c_[i] - o.c_[i];
    return r;
  }
  TruncPoly operator-() const {
    TruncPoly r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
  }
  TruncPoly operator*(const TruncPoly& o) const {
    check(o);
    TruncPoly r(tab_);
    for (int i = 0; i < size(); ++i) {
      if (c_[i].is_zero()) continue;
      for (int j = 0; j < size(); ++j) {
        if (o.c_[j].is_zero()) continue;
        int t = tab_->product_rank(i, j);
        if (t >= 0) r.c_[t] = r.c_[t] + c_[i] * o.c_[j];
      }
    }
    return r;
  }
  TruncPoly scaled(const R& s) const {
    TruncPoly r = *this;
    for (auto& x : r.c_) x = x * s;
    return r;
  }
  TruncPoly scaled_scalar(const Scalar& s) const {
    TruncPoly r = *this;
    for (auto& x : r.c_) x = RingOps<R>::mul_scalar(x, s);
    return r;
  }

  bool operator==(const TruncPoly& o) const {
    if (tab_->dim() != o.tab_->dim() || tab_->order() != o.tab_->order()) return false;
    for (int i = 0; i < size(); ++i)
      if (!(c_[i] == o.c_[i])) return false;
    return true;
  }

  TruncPoly truncated(int k) const {
    TruncPoly r = zero(dim(), k);
    int lim = std::min(size(), r.size());
    for (int i = 0; i < lim; ++i) r.c_[i] = c_[i];
    return r;
  }

  TruncPoly derivative(int var) const {
    TruncPoly r(tab_);
    for (int rank = 1; rank < size(); ++rank) {
      if (c_[rank].is_zero()) continue;
      const auto& e = tab_->exponents(rank);
      if (e[var] == 0) continue;
      std::vector<int> f = e;
      f[var] -= 1;
      int t = tab_->rank_of(f);
      r.c_[t] = r.c_[t] + c_[rank] * R(e[var]);
    }
    return r;
  }

  // evaluate at a point of the coefficient ring
  R eval(const std::vector<R>& z) const {
    if (static_cast<int>(z.size()) != dim()) throw DimensionError("eval dimension mismatch");
    std::vector<R> mono(size(), R());
    mono[0] = R(1);
    R acc = c_[0];
    for (int rank = 1; rank < size(); ++rank) {
      auto [var, below] = tab_->split(rank);
      mono[rank] = mono[below] * z[var];
      if (!c_[rank].is_zero()) acc = acc + c_[rank] * mono[rank];
    }
    return acc;
  }

  // substitute args (constant-term-free) for the variables, truncating
  TruncPoly substitute(const std::vector<TruncPoly>& args) const {
    if (static_cast<int>(args.size()) != dim())
      throw DimensionError("substitution arity mismatch");
    for (const auto& a : args)
      if (!a.at(0).is_zero())
        throw Error("substitution arguments must have zero constant term");
    const int k = order();
    // powers[i][e] = args[i]^e
    std::vector<std::vector<TruncPoly>> powers(dim());
    for (int i = 0; i < dim(); ++i) {
      powers[i].push_back(constant(dim(), k, R(1)));
      for (int e = 1; e <= k; ++e) powers[i].push_back(powers[i][e - 1] * args[i]);
    }
    TruncPoly r(tab_);
    r.c_[0] = c_[0];
    for (int rank = 1; rank < size(); ++rank) {
      if (c_[rank].is_zero()) continue;
      const auto& e = tab_->exponents(rank);
      TruncPoly term = constant(dim(), k, R(1));
      for (int i = 0; i < dim(); ++i)
        if (e[i] > 0) term = term * powers[i][e[i]];
      r = r + term.scaled(c_[rank]);
    }
    return r;
  }

 private:
  void check(const TruncPoly& o) const {
    if (!tab_ || !o.tab_ || tab_->dim() != o.tab_->dim() || tab_->order() != o.tab_->order())
      throw DimensionError("truncated polynomial shape mismatch");
  }
  std::shared_ptr<const MonomialTable> tab_;
  std::vector<R> c_;
};

}  // namespace shearforge
