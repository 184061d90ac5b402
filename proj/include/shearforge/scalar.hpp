#pragma once

#include <gmp.h>
#include <mpfr.h>

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace shearforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// exp/log requested in exact mode, or incompatible scalar modes
struct ModeError : Error {
  using Error::Error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct SingularError : Error {
  using Error::Error;
};
// infeasible constraint set / budget exhausted in a constructive search
struct ConstraintError : Error {
  using Error::Error;
};

inline constexpr mpfr_prec_t kDefaultPrecision = 128;

// Comparison tolerance at a given mantissa precision: 2^-(bits-60).
double default_tolerance(mpfr_prec_t bits);

// Arbitrary-precision rational, canonical form (GMP mpq).
class Rational {
 public:
  Rational() { mpq_init(v_); }
  Rational(long num, long den = 1);
  Rational(const Rational& o) {
    mpq_init(v_);
    mpq_set(v_, o.v_);
  }
  Rational(Rational&& o) noexcept {
    mpq_init(v_);
    mpq_swap(v_, o.v_);
  }
  Rational& operator=(const Rational& o) {
    if (this != &o) mpq_set(v_, o.v_);
    return *this;
  }
  Rational& operator=(Rational&& o) noexcept {
    if (this != &o) mpq_swap(v_, o.v_);
    return *this;
  }
  ~Rational() { mpq_clear(v_); }

  // accepts "num", "num/den", optional leading '-'
  static Rational parse(const std::string& s);

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational operator-() const;

  bool operator==(const Rational& o) const { return mpq_equal(v_, o.v_) != 0; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const { return mpq_cmp(v_, o.v_) < 0; }
  bool operator<=(const Rational& o) const { return mpq_cmp(v_, o.v_) <= 0; }

  bool is_zero() const { return mpq_sgn(v_) == 0; }
  int sign() const { return mpq_sgn(v_); }
  Rational abs() const;

  // smallest convenient rational u with u*u >= *this (requires *this >= 0)
  Rational sqrt_upper() const;

  std::string str() const;
  double to_double() const { return mpq_get_d(v_); }

  const __mpq_struct* raw() const { return v_; }

 private:
  mpq_t v_;
};

// Arbitrary-precision binary float (MPFR), round-to-nearest everywhere.
class Float {
 public:
  explicit Float(mpfr_prec_t prec = kDefaultPrecision) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  Float(const Float& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Float(Float&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  Float& operator=(const Float& o);
  Float& operator=(Float&& o) noexcept {
    if (this != &o) mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Float() { mpfr_clear(v_); }

  static Float of(double x, mpfr_prec_t prec);
  static Float of(const Rational& x, mpfr_prec_t prec);
  static Float parse(const std::string& s, mpfr_prec_t prec);

  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

  Float operator+(const Float& o) const;
  Float operator-(const Float& o) const;
  Float operator*(const Float& o) const;
  Float operator/(const Float& o) const;
  Float operator-() const;

  bool operator==(const Float& o) const { return mpfr_equal_p(v_, o.v_) != 0; }
  bool operator<(const Float& o) const { return mpfr_less_p(v_, o.v_) != 0; }
  bool operator<=(const Float& o) const { return mpfr_lessequal_p(v_, o.v_) != 0; }

  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  Float abs() const;
  Float sqrt() const;
  Float exp() const;
  Float log() const;
  Float sin() const;
  Float cos() const;
  static Float atan2(const Float& y, const Float& x);

  std::string str() const;  // decimal, round-trips at same precision
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  Rational to_rational() const;  // exact dyadic value

  const __mpfr_struct* raw() const { return v_; }

 private:
  mpfr_t v_;
};

// Complex scalar in one of two modes: exact Gaussian rational, or
// arbitrary-precision float. Mixing promotes the exact side to float.
class Scalar {
 public:
  struct Exact {
    Rational re, im;
  };
  struct Approx {
    Float re, im;
  };

  Scalar() : v_(Exact{}) {}  // exact zero
  Scalar(long n) : v_(Exact{Rational(n), Rational()}) {}

  static Scalar rational(Rational re, Rational im = Rational()) {
    return Scalar(Exact{std::move(re), std::move(im)});
  }
  static Scalar rational(long num, long den) {
    return Scalar(Exact{Rational(num, den), Rational()});
  }
  static Scalar floating(double re, double im, mpfr_prec_t prec = kDefaultPrecision) {
    return Scalar(Approx{Float::of(re, prec), Float::of(im, prec)});
  }
  static Scalar floating(Float re, Float im) {
    return Scalar(Approx{std::move(re), std::move(im)});
  }

  bool is_exact() const { return std::holds_alternative<Exact>(v_); }
  // 0 for exact values
  mpfr_prec_t precision() const;

  const Exact& exact() const { return std::get<Exact>(v_); }
  const Approx& approx() const { return std::get<Approx>(v_); }

  Scalar to_float(mpfr_prec_t prec) const;

  Scalar real_part() const;
  Scalar imag_part() const;
  Scalar conj() const;

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator/(const Scalar& o) const;  // throws SingularError on 0
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  Scalar inverse() const;
  Scalar abs2() const;  // |z|^2, same mode, real
  // |z| as a float (exact input evaluated at `prec`)
  Float abs_float(mpfr_prec_t prec = kDefaultPrecision) const;
  // rational u >= |z| (exact mode only)
  Rational abs_upper() const;

  Scalar exp() const;  // float mode only
  Scalar log() const;  // float mode only, principal branch

  bool operator==(const Scalar& o) const;
  bool operator!=(const Scalar& o) const { return !(*this == o); }

  bool is_zero() const;
  // |this - o| <= tol * max(1, |this|, |o|), evaluated cheaply
  bool close_to(const Scalar& o, double tol) const;
  double magnitude() const;  // double estimate of |z|

  std::string str_re() const;
  std::string str_im() const;

 private:
  explicit Scalar(std::variant<Exact, Approx> v) : v_(std::move(v)) {}
  std::variant<Exact, Approx> v_;
};

Scalar operator*(long a, const Scalar& b);

}  // namespace shearforge
