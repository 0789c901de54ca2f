#pragma once

// RAII wrappers around MPFR: a real number and a complex number at a fixed
// binary precision. Operators allocate temporaries, so hot loops should use
// the in-place helpers (see QuadraticStep in dynamics.hpp) instead.

#include <mpfr.h>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

#include "siegel/error.hpp"

namespace siegel {

using Precision = mpfr_prec_t;

inline constexpr Precision kDefaultPrecisionBits = 256;
inline constexpr Precision kMinPrecisionBits = 53;

class HPReal {
 public:
  explicit HPReal(Precision bits = kDefaultPrecisionBits) {
    mpfr_init2(v_, bits);
    mpfr_set_zero(v_, 1);
  }
  HPReal(double x, Precision bits) {
    mpfr_init2(v_, bits);
    mpfr_set_d(v_, x, MPFR_RNDN);
  }
  HPReal(long x, Precision bits) {
    mpfr_init2(v_, bits);
    mpfr_set_si(v_, x, MPFR_RNDN);
  }
  HPReal(int x, Precision bits) : HPReal(static_cast<long>(x), bits) {}
  HPReal(const boost::multiprecision::cpp_int& x, Precision bits) {
    mpfr_init2(v_, bits);
    const std::string digits = x.str();
    mpfr_set_str(v_, digits.c_str(), 10, MPFR_RNDN);
  }
  // Parses a decimal (or any mpfr_set_str base-10) literal.
  HPReal(std::string_view text, Precision bits) {
    mpfr_init2(v_, bits);
    const std::string s(text);
    if (mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0) {
      mpfr_clear(v_);
      throw DomainError("not a decimal number: '" + s + "'");
    }
  }

  HPReal(const HPReal& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  HPReal(HPReal&& other) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, other.v_);
  }
  HPReal& operator=(const HPReal& other) {
    if (this != &other) {
      if (mpfr_get_prec(v_) != mpfr_get_prec(other.v_)) mpfr_set_prec(v_, mpfr_get_prec(other.v_));
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }
  HPReal& operator=(HPReal&& other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }
  ~HPReal() { mpfr_clear(v_); }

  mpfr_ptr get() noexcept { return v_; }
  mpfr_srcptr get() const noexcept { return v_; }
  Precision precision() const noexcept { return mpfr_get_prec(v_); }

  // Same value rounded to a different precision.
  HPReal rounded(Precision bits) const {
    HPReal r(bits);
    mpfr_set(r.v_, v_, MPFR_RNDN);
    return r;
  }

  double to_double() const noexcept { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_finite() const noexcept { return mpfr_number_p(v_) != 0; }
  bool is_zero() const noexcept { return mpfr_zero_p(v_) != 0; }
  int sign() const noexcept { return mpfr_sgn(v_); }

  // Decimal digits needed to round-trip this precision.
  int full_digits() const noexcept {
    return static_cast<int>(std::ceil(static_cast<double>(precision()) * 0.30102999566398120)) + 1;
  }

  // Scientific-notation decimal string; digits == 0 means full precision.
  std::string to_string(int digits = 0) const {
    if (digits <= 0) digits = full_digits();
    if (mpfr_nan_p(v_)) return "nan";
    if (mpfr_inf_p(v_)) return mpfr_sgn(v_) > 0 ? "inf" : "-inf";
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Rg", digits, v_);
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
  }

  HPReal& operator+=(const HPReal& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  HPReal& operator-=(const HPReal& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  HPReal& operator*=(const HPReal& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  HPReal& operator/=(const HPReal& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }

  friend HPReal operator-(const HPReal& a) {
    HPReal r(a.precision());
    mpfr_neg(r.v_, a.v_, MPFR_RNDN);
    return r;
  }

#define SIEGEL_HP_BINOP(op, fn)                                               \
  friend HPReal operator op(const HPReal& a, const HPReal& b) {               \
    HPReal r(std::max(a.precision(), b.precision()));                         \
    fn(r.v_, a.v_, b.v_, MPFR_RNDN);                                          \
    return r;                                                                 \
  }                                                                           \
  friend HPReal operator op(const HPReal& a, double b) {                      \
    HPReal r(a.precision());                                                  \
    fn##_d(r.v_, a.v_, b, MPFR_RNDN);                                         \
    return r;                                                                 \
  }
  SIEGEL_HP_BINOP(+, mpfr_add)
  SIEGEL_HP_BINOP(-, mpfr_sub)
  SIEGEL_HP_BINOP(*, mpfr_mul)
  SIEGEL_HP_BINOP(/, mpfr_div)
#undef SIEGEL_HP_BINOP

  friend HPReal operator-(double a, const HPReal& b) {
    HPReal r(b.precision());
    mpfr_d_sub(r.v_, a, b.v_, MPFR_RNDN);
    return r;
  }
  friend HPReal operator/(double a, const HPReal& b) {
    HPReal r(b.precision());
    mpfr_d_div(r.v_, a, b.v_, MPFR_RNDN);
    return r;
  }

  friend bool operator<(const HPReal& a, const HPReal& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const HPReal& a, const HPReal& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
  friend bool operator<=(const HPReal& a, const HPReal& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>=(const HPReal& a, const HPReal& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
  friend bool operator==(const HPReal& a, const HPReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend bool operator<(const HPReal& a, double b) { return mpfr_cmp_d(a.v_, b) < 0; }
  friend bool operator>(const HPReal& a, double b) { return mpfr_cmp_d(a.v_, b) > 0; }

  friend std::ostream& operator<<(std::ostream& os, const HPReal& x) { return os << x.to_string(); }

 private:
  mpfr_t v_;
};

namespace hp {

#define SIEGEL_HP_UNARY(name, fn)                  \
  inline HPReal name(const HPReal& x) {            \
    HPReal r(x.precision());                       \
    fn(r.get(), x.get(), MPFR_RNDN);               \
    return r;                                      \
  }
SIEGEL_HP_UNARY(sqrt, mpfr_sqrt)
SIEGEL_HP_UNARY(log, mpfr_log)
SIEGEL_HP_UNARY(exp, mpfr_exp)
SIEGEL_HP_UNARY(abs, mpfr_abs)
SIEGEL_HP_UNARY(sin, mpfr_sin)
SIEGEL_HP_UNARY(cos, mpfr_cos)
SIEGEL_HP_UNARY(ceil, mpfr_rint_ceil)
SIEGEL_HP_UNARY(floor, mpfr_rint_floor)
#undef SIEGEL_HP_UNARY

inline HPReal pi(Precision bits) {
  HPReal r(bits);
  mpfr_const_pi(r.get(), MPFR_RNDN);
  return r;
}

inline HPReal atan2(const HPReal& y, const HPReal& x) {
  HPReal r(std::max(x.precision(), y.precision()));
  mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
  return r;
}

inline HPReal hypot(const HPReal& x, const HPReal& y) {
  HPReal r(std::max(x.precision(), y.precision()));
  mpfr_hypot(r.get(), x.get(), y.get(), MPFR_RNDN);
  return r;
}

// 2^e at the given precision.
inline HPReal pow2(long e, Precision bits) {
  HPReal r(bits);
  mpfr_set_ui_2exp(r.get(), 1, e, MPFR_RNDN);
  return r;
}

}  // namespace hp

// Complex number whose parts share one precision.
class HPComplex {
 public:
  explicit HPComplex(Precision bits = kDefaultPrecisionBits) : re_(bits), im_(bits) {}
  HPComplex(HPReal re, HPReal im) : re_(std::move(re)), im_(std::move(im)) {
    const Precision bits = std::max(re_.precision(), im_.precision());
    if (re_.precision() != bits) re_ = re_.rounded(bits);
    if (im_.precision() != bits) im_ = im_.rounded(bits);
  }
  HPComplex(std::complex<double> z, Precision bits) : re_(z.real(), bits), im_(z.imag(), bits) {}

  const HPReal& re() const noexcept { return re_; }
  const HPReal& im() const noexcept { return im_; }
  HPReal& re() noexcept { return re_; }
  HPReal& im() noexcept { return im_; }
  Precision precision_bits() const noexcept { return re_.precision(); }

  std::complex<double> to_std() const noexcept { return {re_.to_double(), im_.to_double()}; }
  bool is_finite() const noexcept { return re_.is_finite() && im_.is_finite(); }

  HPComplex rounded(Precision bits) const { return {re_.rounded(bits), im_.rounded(bits)}; }

  friend HPComplex operator+(const HPComplex& a, const HPComplex& b) { return {a.re_ + b.re_, a.im_ + b.im_}; }
  friend HPComplex operator-(const HPComplex& a, const HPComplex& b) { return {a.re_ - b.re_, a.im_ - b.im_}; }
  friend HPComplex operator-(const HPComplex& a) { return {-a.re_, -a.im_}; }
  friend HPComplex operator*(const HPComplex& a, const HPComplex& b) {
    return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
  }
  friend HPComplex operator*(const HPComplex& a, const HPReal& s) { return {a.re_ * s, a.im_ * s}; }
  friend HPComplex operator*(const HPComplex& a, double s) { return {a.re_ * s, a.im_ * s}; }
  friend HPComplex operator/(const HPComplex& a, const HPComplex& b) {
    const HPReal den = b.re_ * b.re_ + b.im_ * b.im_;
    return {(a.re_ * b.re_ + a.im_ * b.im_) / den, (a.im_ * b.re_ - a.re_ * b.im_) / den};
  }
  friend bool operator==(const HPComplex& a, const HPComplex& b) { return a.re_ == b.re_ && a.im_ == b.im_; }

 private:
  HPReal re_;
  HPReal im_;
};

inline HPComplex conj(const HPComplex& z) { return {z.re(), -z.im()}; }
inline HPReal norm(const HPComplex& z) { return z.re() * z.re() + z.im() * z.im(); }
inline HPReal abs(const HPComplex& z) { return hp::hypot(z.re(), z.im()); }
inline HPReal arg(const HPComplex& z) { return hp::atan2(z.im(), z.re()); }

// e^{2 i pi t}.
inline HPComplex unit_circle(const HPReal& turns) {
  const Precision bits = turns.precision();
  HPReal angle = hp::pi(bits + 16) * turns.rounded(bits + 16) * 2.0;
  HPReal c(bits), s(bits);
  mpfr_sin_cos(s.get(), c.get(), angle.get(), MPFR_RNDN);
  return {std::move(c), std::move(s)};
}

}  // namespace siegel
