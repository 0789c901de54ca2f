#pragma once

// Exact arithmetic in a real quadratic field: values (p + q*sqrt(d)) / r with
// arbitrary-size integers. Rationals are the q == 0 case (stored with d == 1).

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>

#include "siegel/error.hpp"
#include "siegel/hp.hpp"

namespace siegel {

using BigInt = boost::multiprecision::cpp_int;

namespace detail {

inline BigInt isqrt(const BigInt& n) { return boost::multiprecision::sqrt(n); }

inline bool is_perfect_square(const BigInt& n) {
  if (n < 0) return false;
  const BigInt s = isqrt(n);
  return s * s == n;
}

inline int sign(const BigInt& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

// Writes n = root^2 * core with core squarefree. Trial division removes every
// prime up to cbrt(n); the cofactor then has at most two prime factors, so it
// is either a square or squarefree.
inline std::pair<BigInt, BigInt> split_square(BigInt n) {
  BigInt root = 1;
  BigInt core = 1;
  for (std::uint64_t k = 2;; ++k) {
    const BigInt kk(k);
    if (kk * kk * kk > n) break;
    while (n % kk == 0) {
      n /= kk;
      if (n % kk == 0) {
        n /= kk;
        root *= kk;
      } else {
        core *= kk;
        break;
      }
    }
  }
  if (n > 1 && is_perfect_square(n)) {
    root *= isqrt(n);
  } else {
    core *= n;
  }
  return {root, core};
}

}  // namespace detail

class QuadraticSurd {
 public:
  QuadraticSurd() = default;

  // (p + q*sqrt(d)) / r, brought to canonical form: d squarefree (d == 1 for
  // rationals), r > 0 and gcd(p, q, r) == 1.
  QuadraticSurd(BigInt p, BigInt q, BigInt d, BigInt r)
      : p_(std::move(p)), q_(std::move(q)), d_(std::move(d)), r_(std::move(r)) {
    if (r_ == 0) throw DomainError("surd with zero denominator");
    if (d_ < 0) throw DomainError("surd with negative radicand");
    normalize();
  }

  static QuadraticSurd rational(BigInt num, BigInt den = 1) {
    return QuadraticSurd(std::move(num), 0, 1, std::move(den));
  }

  const BigInt& p() const noexcept { return p_; }
  const BigInt& q() const noexcept { return q_; }
  const BigInt& d() const noexcept { return d_; }
  const BigInt& r() const noexcept { return r_; }
  bool is_rational() const noexcept { return q_ == 0; }
  bool is_zero() const noexcept { return p_ == 0 && q_ == 0; }

  int sign() const {
    const int sp = detail::sign(p_);
    const int sq = detail::sign(q_);
    if (sq == 0) return sp;
    if (sp == 0 || sp == sq) return sq;
    // Opposite signs: p^2 == q^2 d is impossible for squarefree d > 1.
    return p_ * p_ > q_ * q_ * d_ ? sp : sq;
  }

  // Largest integer <= value.
  BigInt floor() const {
    if (q_ == 0) return floor_div(p_, r_);
    // q*sqrt(d) lies strictly between consecutive integers, so the numerator
    // lies in (m, m+1) and floor(value) == floor(m / r).
    const BigInt s = detail::isqrt(q_ * q_ * d_);
    const BigInt m = q_ > 0 ? BigInt(p_ + s) : BigInt(p_ - s - 1);
    return floor_div(m, r_);
  }

  QuadraticSurd reciprocal() const {
    if (is_zero()) throw DomainError("reciprocal of zero surd");
    // r / (p + q sqrt d) = r (p - q sqrt d) / (p^2 - q^2 d)
    const BigInt norm = p_ * p_ - q_ * q_ * d_;
    return QuadraticSurd(r_ * p_, -r_ * q_, d_, norm);
  }

  friend QuadraticSurd operator+(const QuadraticSurd& a, const QuadraticSurd& b) {
    const BigInt d = common_radicand(a, b);
    return QuadraticSurd(a.p_ * b.r_ + b.p_ * a.r_, a.q_ * b.r_ + b.q_ * a.r_, d, a.r_ * b.r_);
  }
  friend QuadraticSurd operator-(const QuadraticSurd& a) {
    return QuadraticSurd(-a.p_, -a.q_, a.d_, a.r_);
  }
  friend QuadraticSurd operator-(const QuadraticSurd& a, const QuadraticSurd& b) { return a + (-b); }
  friend QuadraticSurd operator*(const QuadraticSurd& a, const QuadraticSurd& b) {
    const BigInt d = common_radicand(a, b);
    return QuadraticSurd(a.p_ * b.p_ + a.q_ * b.q_ * d, a.p_ * b.q_ + a.q_ * b.p_, d, a.r_ * b.r_);
  }
  friend QuadraticSurd operator/(const QuadraticSurd& a, const QuadraticSurd& b) {
    return a * b.reciprocal();
  }

  friend bool operator==(const QuadraticSurd& a, const QuadraticSurd& b) {
    return a.p_ == b.p_ && a.q_ == b.q_ && a.d_ == b.d_ && a.r_ == b.r_;
  }
  friend bool operator<(const QuadraticSurd& a, const QuadraticSurd& b) { return (a - b).sign() < 0; }
  friend bool operator>(const QuadraticSurd& a, const QuadraticSurd& b) { return (a - b).sign() > 0; }

  // Value at `bits` of precision. Uses the conjugate form when p and q*sqrt(d)
  // have opposite signs so that small values keep full relative accuracy.
  HPReal to_hp(Precision bits) const {
    const Precision work = bits + 32;
    HPReal num(work);
    if (q_ == 0) {
      num = HPReal(p_, work);
    } else {
      const HPReal root = hp::sqrt(HPReal(d_, work));
      if (detail::sign(p_) * detail::sign(q_) >= 0) {
        num = HPReal(p_, work) + HPReal(q_, work) * root;
      } else {
        const BigInt norm = p_ * p_ - q_ * q_ * d_;
        num = HPReal(norm, work) / (HPReal(p_, work) - HPReal(q_, work) * root);
      }
    }
    return (num / HPReal(r_, work)).rounded(bits);
  }

  double to_double() const { return to_hp(64).to_double(); }

  // "(p + q*sqrt(d))/r", or "p/r" for rationals.
  std::string to_string() const {
    if (q_ == 0) return r_ == 1 ? p_.str() : p_.str() + "/" + r_.str();
    std::string out = "(" + p_.str() + (q_ < 0 ? " - " : " + ");
    const BigInt aq = q_ < 0 ? BigInt(-q_) : q_;
    if (aq != 1) out += aq.str() + "*";
    out += "sqrt(" + d_.str() + "))";
    if (r_ != 1) out += "/" + r_.str();
    return out;
  }

  friend std::ostream& operator<<(std::ostream& os, const QuadraticSurd& s) { return os << s.to_string(); }

 private:
  static BigInt floor_div(const BigInt& a, const BigInt& b) {
    // b > 0
    BigInt quot = a / b;
    if (a % b != 0 && a < 0) quot -= 1;
    return quot;
  }

  static BigInt common_radicand(const QuadraticSurd& a, const QuadraticSurd& b) {
    if (a.q_ == 0) return b.d_;
    if (b.q_ == 0) return a.d_;
    if (a.d_ != b.d_) throw DomainError("surds from different quadratic fields");
    return a.d_;
  }

  void normalize() {
    if (q_ != 0 && d_ != 1) {
      auto [root, core] = detail::split_square(d_);
      q_ *= root;
      d_ = core;
    }
    if (q_ != 0 && (d_ == 1 || d_ == 0)) {
      p_ += d_ == 1 ? q_ : BigInt(0);
      q_ = 0;
    }
    if (q_ == 0) d_ = 1;
    if (r_ < 0) {
      p_ = -p_;
      q_ = -q_;
      r_ = -r_;
    }
    BigInt g = boost::multiprecision::gcd(boost::multiprecision::gcd(p_, q_), r_);
    if (g < 0) g = -g;
    if (g > 1) {
      p_ /= g;
      q_ /= g;
      r_ /= g;
    }
  }

  BigInt p_ = 0;
  BigInt q_ = 0;
  BigInt d_ = 1;
  BigInt r_ = 1;
};

// Representative of x mod 1 in ]-1/2, 1/2].
inline QuadraticSurd nearest_frac(const QuadraticSurd& x) {
  // x - ceil(x - 1/2), with ceil(y) = -floor(-y)
  const QuadraticSurd shifted = QuadraticSurd::rational(1, 2) - x;
  const BigInt ceil_val = -shifted.floor();
  return x - QuadraticSurd::rational(ceil_val);
}

}  // namespace siegel
