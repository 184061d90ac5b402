#include "shearforge/linalg.hpp"

#include <cstdlib>

namespace shearforge {

namespace {

void lcm_den(mpz_t acc, const Rational& q) {
  mpz_lcm(acc, acc, mpq_denref(q.raw()));
}

Rational rational_of(const mpz_t m) {
  char* c = mpz_get_str(nullptr, 10, m);
  Rational r = Rational::parse(c);
  std::free(c);
  return r;
}

}  // namespace

Scalar bareiss_solve(Mat a, std::vector<std::vector<Scalar>>& rhs) {
  const int n = a.dim();
  for (auto& col : rhs)
    if (static_cast<int>(col.size()) != n) throw DimensionError("rhs size mismatch");
  // scale each row of [A | rhs] to Gaussian integers
  Rational scaling_product(1);
  for (int i = 0; i < n; ++i) {
    mpz_t d;
    mpz_init_set_ui(d, 1);
    for (int j = 0; j < n; ++j) {
      if (!a(i, j).is_exact()) throw ModeError("fraction-free solve needs exact entries");
      lcm_den(d, a(i, j).exact().re);
      lcm_den(d, a(i, j).exact().im);
    }
    for (auto& col : rhs) {
      if (!col[i].is_exact()) throw ModeError("fraction-free solve needs exact entries");
      lcm_den(d, col[i].exact().re);
      lcm_den(d, col[i].exact().im);
    }
    if (mpz_cmp_ui(d, 1) != 0) {
      Rational fr = rational_of(d);
      Scalar f = Scalar::rational(fr);
      for (int j = 0; j < n; ++j) a(i, j) = a(i, j) * f;
      for (auto& col : rhs) col[i] = col[i] * f;
      scaling_product = scaling_product * fr;
    }
    mpz_clear(d);
  }

  Scalar prev(1);
  int sign = 1;
  for (int k = 0; k < n; ++k) {
    if (a(k, k).is_zero()) {
      int piv = -1;
      for (int i = k + 1; i < n; ++i)
        if (!a(i, k).is_zero()) {
          piv = i;
          break;
        }
      if (piv < 0) throw SingularError("singular system in bareiss_solve");
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (auto& col : rhs) std::swap(col[k], col[piv]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j)
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
      for (auto& col : rhs)
        col[i] = (col[i] * a(k, k) - a(i, k) * col[k]) / prev;
      a(i, k) = Scalar();
    }
    prev = a(k, k);
  }

  for (auto& col : rhs) {
    for (int k = n - 1; k >= 0; --k) {
      Scalar s = col[k];
      for (int j = k + 1; j < n; ++j) s = s - a(k, j) * col[j];
      col[k] = s / a(k, k);
    }
  }

  Scalar det_scaled = a(n - 1, n - 1);
  if (sign < 0) det_scaled = -det_scaled;
  return det_scaled / Scalar::rational(scaling_product);
}

}  // namespace shearforge
