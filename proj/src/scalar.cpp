#include "shearforge/scalar.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace shearforge {

double default_tolerance(mpfr_prec_t bits) {
  long e = static_cast<long>(bits) - 60;
  if (e < 8) e = 8;
  return std::ldexp(1.0, static_cast<int>(-e));
}

// ---------- Rational ----------

Rational::Rational(long num, long den) {
  if (den == 0) throw SingularError("rational with zero denominator");
  mpq_init(v_);
  mpq_set_si(v_, num, 1);
  if (den != 1) {
    mpq_t d;
    mpq_init(d);
    mpq_set_si(d, den, 1);
    mpq_div(v_, v_, d);
    mpq_clear(d);
  }
  mpq_canonicalize(v_);
}

Rational Rational::parse(const std::string& s) {
  Rational r;
  if (mpq_set_str(r.v_, s.c_str(), 10) != 0)
    throw Error("cannot parse rational: " + s);
  if (mpz_sgn(mpq_denref(r.v_)) == 0)
    throw SingularError("rational with zero denominator: " + s);
  mpq_canonicalize(r.v_);
  return r;
}

Rational Rational::operator+(const Rational& o) const {
  Rational r;
  mpq_add(r.v_, v_, o.v_);
  return r;
}
Rational Rational::operator-(const Rational& o) const {
  Rational r;
  mpq_sub(r.v_, v_, o.v_);
  return r;
}
Rational Rational::operator*(const Rational& o) const {
  Rational r;
  mpq_mul(r.v_, v_, o.v_);
  return r;
}
Rational Rational::operator/(const Rational& o) const {
  if (o.is_zero()) throw SingularError("rational division by zero");
  Rational r;
  mpq_div(r.v_, v_, o.v_);
  return r;
}
Rational Rational::operator-() const {
  Rational r;
  mpq_neg(r.v_, v_);
  return r;
}
Rational Rational::abs() const {
  Rational r;
  mpq_abs(r.v_, v_);
  return r;
}

Rational Rational::sqrt_upper() const {
  if (sign() < 0) throw Error("sqrt_upper of negative rational");
  if (is_zero()) return Rational();
  // u = ceil_sqrt(num*den)/den satisfies u^2 >= num/den
  mpz_t prod, root, rem;
  mpz_init(prod);
  mpz_init(root);
  mpz_init(rem);
  mpz_mul(prod, mpq_numref(v_), mpq_denref(v_));
  mpz_sqrtrem(root, rem, prod);
  if (mpz_sgn(rem) != 0) mpz_add_ui(root, root, 1);
  mpz_clear(rem);
  Rational r;
  mpq_set_z(r.v_, root);
  mpq_t den;
  mpq_init(den);
  mpq_set_z(den, mpq_denref(v_));
  mpq_div(r.v_, r.v_, den);
  mpq_clear(den);
  mpz_clear(prod);
  mpz_clear(root);
  mpq_canonicalize(r.v_);
  return r;
}

std::string Rational::str() const {
  char* c = mpq_get_str(nullptr, 10, v_);
  std::string s(c);
  std::free(c);
  return s;
}

// ---------- Float ----------

Float& Float::operator=(const Float& o) {
  if (this != &o) {
    mpfr_set_prec(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  return *this;
}

Float Float::of(double x, mpfr_prec_t prec) {
  Float f(prec);
  mpfr_set_d(f.v_, x, MPFR_RNDN);
  return f;
}

Float Float::of(const Rational& x, mpfr_prec_t prec) {
  Float f(prec);
  mpfr_set_q(f.v_, x.raw(), MPFR_RNDN);
  return f;
}

Float Float::parse(const std::string& s, mpfr_prec_t prec) {
  Float f(prec);
  if (mpfr_set_str(f.v_, s.c_str(), 10, MPFR_RNDN) != 0)
    throw Error("cannot parse float: " + s);
  return f;
}

namespace {
mpfr_prec_t join(const Float& a, const Float& b) {
  return std::max(a.precision(), b.precision());
}
}  // namespace

Float Float::operator+(const Float& o) const {
  Float r(join(*this, o));
  mpfr_add(const_cast<mpfr_ptr>(r.raw()), v_, o.v_, MPFR_RNDN);
  return r;
}
Float Float::operator-(const Float& o) const {
  Float r(join(*this, o));
  mpfr_sub(const_cast<mpfr_ptr>(r.raw()), v_, o.v_, MPFR_RNDN);
  return r;
}
Float Float::operator*(const Float& o) const {
  Float r(join(*this, o));
  mpfr_mul(const_cast<mpfr_ptr>(r.raw()), v_, o.v_, MPFR_RNDN);
  return r;
}
Float Float::operator/(const Float& o) const {
  if (o.is_zero()) throw SingularError("float division by zero");
  Float r(join(*this, o));
  mpfr_div(const_cast<mpfr_ptr>(r.raw()), v_, o.v_, MPFR_RNDN);
  return r;
}
Float Float::operator-() const {
  Float r(precision());
  mpfr_neg(const_cast<mpfr_ptr>(r.raw()), v_, MPFR_RNDN);
  return r;
}
Float Float::abs() const {
  Float r(precision());
  mpfr_abs(const_cast<mpfr_ptr>(r.raw()), v_, MPFR_RNDN);
  return r;
}
Float Float::sqrt() const {
  Float r(precision());
  mpfr_sqrt(const_cast<mpfr_ptr>(r.raw()), v_, MPFR_RNDN);
  return r;
}
Float Float::exp() const {
  Float r(precision());
  mpfr_exp(const_cast<mpfr_ptr>(r.raw()), v_, MPFR_RNDN);
  return r;
}
Float Float::log() const {
  Float r(precision());
  mpfr_log(const_cast<mpfr_ptr>(r.raw()), v_, MPFR_RNDN);
  return r;
}
Float Float::sin() const {
  Float r(precision());
  mpfr_sin(const_cast<mpfr_ptr>(r.raw()), v_, MPFR_RNDN);
  return r;
}
Float Float::cos() const {
  Float r(precision());
  mpfr_cos(const_cast<mpfr_ptr>(r.raw()), v_, MPFR_RNDN);
  return r;
}
Float Float::atan2(const Float& y, const Float& x) {
  Float r(join(y, x));
  mpfr_atan2(const_cast<mpfr_ptr>(r.raw()), y.v_, x.v_, MPFR_RNDN);
  return r;
}

std::string Float::str() const {
  if (mpfr_zero_p(v_)) return "0";
  if (!mpfr_number_p(v_)) throw Error("non-finite float in serialization");
  mpfr_exp_t e;
  char* c = mpfr_get_str(nullptr, &e, 10, 0, v_, MPFR_RNDN);
  std::string digits(c);
  mpfr_free_str(c);
  std::string sign;
  if (!digits.empty() && digits[0] == '-') {
    sign = "-";
    digits.erase(0, 1);
  }
  // digits form the fraction 0.DDDD * 10^e; emit d.ddd e(e-1)
  std::string out = sign + digits.substr(0, 1);
  if (digits.size() > 1) out += "." + digits.substr(1);
  out += "e" + std::to_string(static_cast<long>(e) - 1);
  return out;
}

Rational Float::to_rational() const {
  if (mpfr_zero_p(v_)) return Rational();
  if (!mpfr_number_p(v_)) throw Error("non-finite float in exact conversion");
  mpz_t z;
  mpz_init(z);
  mpfr_exp_t e = mpfr_get_z_2exp(z, v_);
  mpq_t q;
  mpq_init(q);
  mpq_set_z(q, z);
  if (e > 0) {
    mpq_mul_2exp(q, q, static_cast<mp_bitcnt_t>(e));
  } else if (e < 0) {
    mpq_div_2exp(q, q, static_cast<mp_bitcnt_t>(-e));
  }
  char* c = mpq_get_str(nullptr, 10, q);
  Rational r = Rational::parse(c);
  std::free(c);
  mpq_clear(q);
  mpz_clear(z);
  return r;
}

// ---------- Scalar ----------

namespace {

Scalar::Approx promote(const Scalar& s, mpfr_prec_t prec) {
  if (s.is_exact())
    return {Float::of(s.exact().re, prec), Float::of(s.exact().im, prec)};
  return s.approx();
}

}  // namespace

mpfr_prec_t Scalar::precision() const {
  if (is_exact()) return 0;
  return std::max(approx().re.precision(), approx().im.precision());
}

Scalar Scalar::to_float(mpfr_prec_t prec) const {
  auto a = promote(*this, prec);
  return Scalar::floating(std::move(a.re), std::move(a.im));
}

Scalar Scalar::real_part() const {
  if (is_exact()) return rational(exact().re);
  return floating(approx().re, Float(approx().re.precision()));
}
Scalar Scalar::imag_part() const {
  if (is_exact()) return rational(exact().im);
  return floating(approx().im, Float(approx().im.precision()));
}
Scalar Scalar::conj() const {
  if (is_exact()) return rational(exact().re, -exact().im);
  return floating(approx().re, -approx().im);
}

#define SHEARFORGE_BINOP(name, op)                                            \
  Scalar Scalar::operator op(const Scalar& o) const {                         \
    if (is_exact() && o.is_exact()) return name(exact(), o.exact());          \
    mpfr_prec_t p = std::max(precision(), o.precision());                     \
    return name##_f(promote(*this, p), promote(o, p));                        \
  }

namespace {

Scalar add(const Scalar::Exact& a, const Scalar::Exact& b) {
  return Scalar::rational(a.re + b.re, a.im + b.im);
}
Scalar add_f(const Scalar::Approx& a, const Scalar::Approx& b) {
  return Scalar::floating(a.re + b.re, a.im + b.im);
}
Scalar sub(const Scalar::Exact& a, const Scalar::Exact& b) {
  return Scalar::rational(a.re - b.re, a.im - b.im);
}
Scalar sub_f(const Scalar::Approx& a, const Scalar::Approx& b) {
  return Scalar::floating(a.re - b.re, a.im - b.im);
}
Scalar mul(const Scalar::Exact& a, const Scalar::Exact& b) {
  return Scalar::rational(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}
Scalar mul_f(const Scalar::Approx& a, const Scalar::Approx& b) {
  return Scalar::floating(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}
Scalar div(const Scalar::Exact& a, const Scalar::Exact& b) {
  Rational n = b.re * b.re + b.im * b.im;
  if (n.is_zero()) throw SingularError("scalar division by zero");
  return Scalar::rational((a.re * b.re + a.im * b.im) / n,
                          (a.im * b.re - a.re * b.im) / n);
}
Scalar div_f(const Scalar::Approx& a, const Scalar::Approx& b) {
  Float n = b.re * b.re + b.im * b.im;
  if (n.is_zero()) throw SingularError("scalar division by zero");
  return Scalar::floating((a.re * b.re + a.im * b.im) / n,
                          (a.im * b.re - a.re * b.im) / n);
}

}  // namespace

SHEARFORGE_BINOP(add, +)
SHEARFORGE_BINOP(sub, -)
SHEARFORGE_BINOP(mul, *)
SHEARFORGE_BINOP(div, /)
#undef SHEARFORGE_BINOP

Scalar Scalar::operator-() const {
  if (is_exact()) return rational(-exact().re, -exact().im);
  return floating(-approx().re, -approx().im);
}

Scalar Scalar::inverse() const { return Scalar(1) / *this; }

Scalar Scalar::abs2() const {
  if (is_exact())
    return rational(exact().re * exact().re + exact().im * exact().im);
  return floating(approx().re * approx().re + approx().im * approx().im,
                  Float(approx().re.precision()));
}

Float Scalar::abs_float(mpfr_prec_t prec) const {
  auto a = promote(*this, std::max(prec, precision()));
  return (a.re * a.re + a.im * a.im).sqrt();
}

Rational Scalar::abs_upper() const {
  if (!is_exact()) throw ModeError("abs_upper needs an exact scalar");
  return (exact().re * exact().re + exact().im * exact().im).sqrt_upper();
}

Scalar Scalar::exp() const {
  if (is_exact()) throw ModeError("exp of a scalar requires float mode");
  const auto& a = approx();
  Float m = a.re.exp();
  return floating(m * a.im.cos(), m * a.im.sin());
}

Scalar Scalar::log() const {
  if (is_exact()) throw ModeError("log of a scalar requires float mode");
  const auto& a = approx();
  Float n2 = a.re * a.re + a.im * a.im;
  if (n2.is_zero()) throw SingularError("log of zero");
  Float half = Float::of(0.5, n2.precision());
  return floating(n2.log() * half, Float::atan2(a.im, a.re));
}

bool Scalar::operator==(const Scalar& o) const {
  if (is_exact() && o.is_exact())
    return exact().re == o.exact().re && exact().im == o.exact().im;
  mpfr_prec_t p = std::max(precision(), o.precision());
  auto a = promote(*this, p), b = promote(o, p);
  return a.re == b.re && a.im == b.im;
}

bool Scalar::is_zero() const {
  if (is_exact()) return exact().re.is_zero() && exact().im.is_zero();
  return approx().re.is_zero() && approx().im.is_zero();
}

double Scalar::magnitude() const {
  double re, im;
  if (is_exact()) {
    re = exact().re.to_double();
    im = exact().im.to_double();
  } else {
    re = approx().re.to_double();
    im = approx().im.to_double();
  }
  return std::hypot(re, im);
}

bool Scalar::close_to(const Scalar& o, double tol) const {
  if (is_exact() && o.is_exact()) return *this == o;
  double d = (*this - o).magnitude();
  double scale = std::max({1.0, magnitude(), o.magnitude()});
  return d <= tol * scale;
}

std::string Scalar::str_re() const {
  return is_exact() ? exact().re.str() : approx().re.str();
}
std::string Scalar::str_im() const {
  return is_exact() ? exact().im.str() : approx().im.str();
}

Scalar operator*(long a, const Scalar& b) { return Scalar(a) * b; }

}  // namespace shearforge
