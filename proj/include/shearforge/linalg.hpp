#pragma once

#include <vector>

#include "shearforge/ring.hpp"
#include "shearforge/scalar.hpp"

namespace shearforge {

using Vec = std::vector<Scalar>;

inline Vec vec_add(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionError("vector dimension mismatch");
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}
inline Vec vec_sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionError("vector dimension mismatch");
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}
inline Vec vec_scale(const Vec& a, const Scalar& s) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}
inline bool vec_is_zero(const Vec& a) {
  for (const auto& x : a)
    if (!x.is_zero()) return false;
  return true;
}
inline bool vec_equal(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!(a[i] == b[i])) return false;
  return true;
}
inline bool vec_close(const Vec& a, const Vec& b, double tol) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!a[i].close_to(b[i], tol)) return false;
  return true;
}
// Hermitian pairing <z,w> = sum z_i conj(w_i); holomorphic in z
inline Scalar herm(const Vec& z, const Vec& w) {
  if (z.size() != w.size()) throw DimensionError("pairing dimension mismatch");
  Scalar s;
  for (size_t i = 0; i < z.size(); ++i) s += z[i] * w[i].conj();
  return s;
}
inline Scalar norm2(const Vec& w) {
  Scalar s;
  for (const auto& x : w) s += x.abs2();
  return s;
}

// Complex-linear functional z -> sum coeffs_i z_i
struct LinForm {
  Vec coeffs;

  int dim() const { return static_cast<int>(coeffs.size()); }
  bool is_zero() const { return vec_is_zero(coeffs); }

  Scalar operator()(const Vec& z) const {
    if (z.size() != coeffs.size()) throw DimensionError("form dimension mismatch");
    Scalar s;
    for (size_t i = 0; i < z.size(); ++i) s += coeffs[i] * z[i];
    return s;
  }
  template <class R>
  R apply(const std::vector<R>& z) const {
    if (z.size() != coeffs.size()) throw DimensionError("form dimension mismatch");
    R s;
    for (size_t i = 0; i < z.size(); ++i) s = s + RingOps<R>::mul_scalar(z[i], coeffs[i]);
    return s;
  }
};

// Dense square matrix over a ring, row major.
template <class R>
class Matrix {
 public:
  Matrix() : n_(0) {}
  explicit Matrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, R()) {}

  static Matrix identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = R(1);
    return m;
  }

  int dim() const { return n_; }
  R& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  const R& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

  Matrix operator*(const Matrix& o) const {
    if (n_ != o.n_) throw DimensionError("matrix dimension mismatch");
    Matrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k)
        for (int j = 0; j < n_; ++j) r(i, j) = r(i, j) + (*this)(i, k) * o(k, j);
    return r;
  }
  std::vector<R> apply(const std::vector<R>& v) const {
    if (static_cast<int>(v.size()) != n_) throw DimensionError("matrix-vector mismatch");
    std::vector<R> r(n_, R());
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r[i] = r[i] + (*this)(i, j) * v[j];
    return r;
  }
  bool operator==(const Matrix& o) const {
    if (n_ != o.n_) return false;
    for (size_t i = 0; i < a_.size(); ++i)
      if (!(a_[i] == o.a_[i])) return false;
    return true;
  }

  // cofactor expansion; fine at the dimensions this library handles
  R det() const {
    if (n_ == 0) return R(1);
    if (n_ == 1) return a_[0];
    if (n_ == 2) return a_[0] * a_[3] - a_[1] * a_[2];
    R s;
    int sign = 1;
    for (int j = 0; j < n_; ++j) {
      if (!(*this)(0, j).is_zero()) {
        R term = (*this)(0, j) * minor_at(0, j).det();
        s = (sign > 0) ? s + term : s - term;
      }
      sign = -sign;
    }
    return s;
  }

  Matrix minor_at(int row, int col) const {
    Matrix m(n_ - 1);
    for (int i = 0, mi = 0; i < n_; ++i) {
      if (i == row) continue;
      for (int j = 0, mj = 0; j < n_; ++j) {
        if (j == col) continue;
        m(mi, mj) = (*this)(i, j);
        ++mj;
      }
      ++mi;
    }
    return m;
  }

  Matrix adjugate() const {
    Matrix adj(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        R c = minor_at(i, j).det();
        if (((i + j) & 1) != 0) c = -c;
        adj(j, i) = c;
      }
    return adj;
  }

 private:
  int n_;
  std::vector<R> a_;
};

using Mat = Matrix<Scalar>;
using PolyMat = Matrix<XPoly>;

// In-place Gaussian elimination of [A | rhs...]; RHS columns live in any ring.
// Exact entries pivot on exact nonzero; float entries use partial pivoting.
// Returns the determinant of A.
template <class R>
Scalar gauss_solve(Mat a, std::vector<std::vector<R>>& rhs) {
  const int n = a.dim();
  for (auto& col : rhs)
    if (static_cast<int>(col.size()) != n) throw DimensionError("rhs size mismatch");
  Scalar det(1);
  for (int k = 0; k < n; ++k) {
    int piv = -1;
    double best = 0;
    for (int i = k; i < n; ++i) {
      double m = a(i, k).magnitude();
      if (!a(i, k).is_zero() && (piv < 0 || m > best)) {
        piv = i;
        best = m;
      }
    }
    if (piv < 0) throw SingularError("singular system in gauss_solve");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (auto& col : rhs) std::swap(col[k], col[piv]);
      det = -det;
    }
    det = det * a(k, k);
    for (int i = k + 1; i < n; ++i) {
      if (a(i, k).is_zero()) continue;
      Scalar f = a(i, k) / a(k, k);
      for (int j = k; j < n; ++j) a(i, j) = a(i, j) - f * a(k, j);
      for (auto& col : rhs) col[i] = col[i] - RingOps<R>::mul_scalar(col[k], f);
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    Scalar inv = a(k, k).inverse();
    for (auto& col : rhs) {
      for (int i = 0; i < k; ++i)
        col[i] = col[i] - RingOps<R>::mul_scalar(col[k], a(i, k) / a(k, k));
      col[k] = RingOps<R>::mul_scalar(col[k], inv);
    }
    for (int i = 0; i < k; ++i) a(i, k) = Scalar();
  }
  return det;
}

inline Mat mat_inverse(const Mat& a) {
  const int n = a.dim();
  std::vector<std::vector<Scalar>> cols(n, std::vector<Scalar>(n));
  for (int j = 0; j < n; ++j) cols[j][j] = Scalar(1);
  gauss_solve(a, cols);
  Mat inv(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) inv(i, j) = cols[j][i];
  return inv;
}

// Inverse of a parameter-polynomial matrix; requires a constant nonzero
// determinant (adj / det stays polynomial exactly then).
inline PolyMat polymat_inverse(const PolyMat& a) {
  XPoly d = a.det();
  if (d.degree() > 0)
    throw SingularError("parametric matrix has non-constant determinant");
  Scalar c = d.coeff(0);
  if (c.is_zero()) throw SingularError("parametric matrix is singular");
  PolyMat adj = a.adjugate();
  Scalar inv = c.inverse();
  PolyMat r(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) r(i, j) = adj(i, j).scaled(inv);
  return r;
}

inline double mat_inf_norm(const Mat& a) {
  double best = 0;
  for (int i = 0; i < a.dim(); ++i) {
    double s = 0;
    for (int j = 0; j < a.dim(); ++j) s += a(i, j).magnitude();
    best = std::max(best, s);
  }
  return best;
}

// ||A||_inf * ||A^-1||_inf; used to reject ill-conditioned float bases
inline double condition_estimate(const Mat& a) {
  return mat_inf_norm(a) * mat_inf_norm(mat_inverse(a));
}

// Fraction-free (Bareiss) elimination for the exact path. Row-scales [A|rhs]
// to Gaussian integers first; every interior division is exact.
Scalar bareiss_solve(Mat a, std::vector<std::vector<Scalar>>& rhs);

}  // namespace shearforge
