#pragma once

// Preperiodic continued fractions theta = [a_1, a_2, ...] in (0, 1), their
// convergents p_n/q_n, tails theta_i = [a_i, a_{i+1}, ...], the rotation
// self-similarity constant alpha, and checks of
//   {q_{n+s} theta} = (-1)^s alpha {q_n theta}.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "siegel/error.hpp"
#include "siegel/hp.hpp"
#include "siegel/surd.hpp"

namespace siegel {

using Digit = std::int64_t;

class QuadraticIrrational {
 public:
  // Canonical form of a surd in (0, 1): minimal preperiod and primitive period.
  static QuadraticIrrational from_surd(const QuadraticSurd& value) {
    if (value.is_rational()) throw NotQuadraticError("rational value has a finite continued fraction");
    if (value.sign() <= 0 || (value - QuadraticSurd::rational(1)).sign() >= 0)
      throw DomainError("continued fraction value must lie in (0, 1): " + value.to_string());

    constexpr std::size_t kMaxSteps = 100000;
    std::vector<QuadraticSurd> states;
    std::vector<Digit> digits;
    QuadraticSurd x = value;
    for (std::size_t step = 0; step < kMaxSteps; ++step) {
      for (std::size_t j = 0; j < states.size(); ++j) {
        if (states[j] == x) {
          QuadraticIrrational out;
          out.preperiod_.assign(digits.begin(), digits.begin() + static_cast<std::ptrdiff_t>(j));
          out.period_.assign(digits.begin() + static_cast<std::ptrdiff_t>(j), digits.end());
          out.value_ = value;
          return out;
        }
      }
      states.push_back(x);
      const QuadraticSurd inv = x.reciprocal();
      const BigInt a = inv.floor();
      if (a > BigInt(INT64_MAX)) throw DomainError("continued fraction digit does not fit in 64 bits");
      digits.push_back(static_cast<Digit>(a));
      x = inv - QuadraticSurd::rational(a);
    }
    throw NotQuadraticError("continued fraction expansion did not become periodic");
  }

  const std::vector<Digit>& preperiod() const noexcept { return preperiod_; }
  const std::vector<Digit>& period() const noexcept { return period_; }
  const QuadraticSurd& value() const noexcept { return value_; }

  // N: first index of the periodic part (a_{n+s} = a_n for n >= N).
  std::size_t first_periodic_index() const noexcept { return preperiod_.size() + 1; }
  // s
  std::size_t period_length() const noexcept { return period_.size(); }

  // a_n, 1-based.
  Digit digit(std::size_t n) const {
    if (n == 0) throw DomainError("continued fraction digits are 1-indexed");
    if (n <= preperiod_.size()) return preperiod_[n - 1];
    return period_[(n - preperiod_.size() - 1) % period_.size()];
  }

  // `[a1,a2;b1,...,bs]`
  std::string to_string() const {
    std::string out = "[";
    for (std::size_t i = 0; i < preperiod_.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(preperiod_[i]);
    }
    out += ";";
    for (std::size_t i = 0; i < period_.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(period_[i]);
    }
    return out + "]";
  }

  friend bool operator==(const QuadraticIrrational& a, const QuadraticIrrational& b) {
    return a.preperiod_ == b.preperiod_ && a.period_ == b.period_;
  }

 private:
  QuadraticIrrational() = default;

  std::vector<Digit> preperiod_;
  std::vector<Digit> period_;
  QuadraticSurd value_;
};

namespace detail {

// z -> 1/(b + z) as the integer matrix [[0, 1], [1, b]].
struct Mobius {
  BigInt a = 1, b = 0, c = 0, d = 1;

  void compose_digit(Digit digit) {
    // this * [[0,1],[1,digit]]
    BigInt na = b, nb = a + b * digit;
    BigInt nc = d, nd = c + d * digit;
    a = std::move(na);
    b = std::move(nb);
    c = std::move(nc);
    d = std::move(nd);
  }

  QuadraticSurd apply(const QuadraticSurd& z) const {
    return (QuadraticSurd::rational(a) * z + QuadraticSurd::rational(b)) /
           (QuadraticSurd::rational(c) * z + QuadraticSurd::rational(d));
  }
};

inline void check_digits(std::span<const Digit> digits, const char* part) {
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] < 1)
      throw InvalidDigitError(std::string(part) + " digit " + std::to_string(i + 1) + " is " +
                              std::to_string(digits[i]) + "; digits must be >= 1");
  }
}

}  // namespace detail

// theta = [pre..., period, period, ...], solved exactly: the periodic tail is
// the positive fixed point of its Mobius map, the preperiod is applied on top.
inline QuadraticIrrational parse_cf(std::span<const Digit> preperiod, std::span<const Digit> period) {
  detail::check_digits(preperiod, "preperiod");
  detail::check_digits(period, "period");
  if (period.empty()) throw NotQuadraticError("empty period: finite continued fractions are rational");

  detail::Mobius cycle;
  for (Digit b : period) cycle.compose_digit(b);
  // t = (A t + B) / (C t + D)  =>  C t^2 + (D - A) t - B = 0, C > 0, B >= 0.
  const BigInt diff = cycle.d - cycle.a;
  const BigInt disc = diff * diff + 4 * cycle.b * cycle.c;
  const QuadraticSurd tail(-diff, 1, disc, 2 * cycle.c);

  detail::Mobius head;
  for (Digit a : preperiod) head.compose_digit(a);
  return QuadraticIrrational::from_surd(head.apply(tail));
}

inline QuadraticIrrational parse_cf(std::initializer_list<Digit> preperiod,
                                    std::initializer_list<Digit> period) {
  return parse_cf(std::span<const Digit>(preperiod.begin(), preperiod.size()),
                  std::span<const Digit>(period.begin(), period.size()));
}

// Grammar (whitespace allowed between tokens):
//   cf     := '[' list? ';' list? ']'
//   list   := digit (',' digit)*
//   digit  := [0-9]+
inline QuadraticIrrational parse_cf_text(std::string_view text) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' || text[pos] == '\r'))
      ++pos;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (pos >= text.size()) throw CfParseError(std::string("expected '") + c + "' but input ended", pos);
    if (text[pos] != c)
      throw CfParseError(std::string("expected '") + c + "' but found '" + text[pos] + "'", pos);
    ++pos;
  };
  auto parse_list = [&](char terminator) {
    std::vector<Digit> out;
    skip_ws();
    if (pos < text.size() && text[pos] == terminator) return out;
    for (;;) {
      skip_ws();
      const std::size_t start = pos;
      if (pos < text.size() && text[pos] == '-') {
        throw InvalidDigitError("negative digit at byte " + std::to_string(pos));
      }
      BigInt value = 0;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        value = value * 10 + (text[pos] - '0');
        ++pos;
      }
      if (pos == start) {
        if (pos >= text.size()) throw CfParseError("expected a digit but input ended", pos);
        throw CfParseError(std::string("expected a digit but found '") + text[pos] + "'", pos);
      }
      if (value > BigInt(INT64_MAX)) throw CfParseError("digit too large", start);
      if (value == 0) throw InvalidDigitError("zero digit at byte " + std::to_string(start));
      out.push_back(static_cast<Digit>(value));
      skip_ws();
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      return out;
    }
  };

  expect('[');
  const std::vector<Digit> pre = parse_list(';');
  expect(';');
  const std::vector<Digit> per = parse_list(']');
  expect(']');
  skip_ws();
  if (pos != text.size()) throw CfParseError("trailing characters after ']'", pos);
  return parse_cf(pre, per);
}

struct Convergent {
  std::size_t index = 0;  // n >= 1
  BigInt p;
  BigInt q;
};

// p_n/q_n = [a_1, ..., a_n] for n = 1..count, seeded with p_{-1}/q_{-1} = 1/0
// and p_0/q_0 = 0/1.
inline std::vector<Convergent> convergents(const QuadraticIrrational& theta, std::size_t count) {
  if (count < 1) throw DomainError("convergents: count must be >= 1");
  std::vector<Convergent> out;
  out.reserve(count);
  BigInt p_prev = 1, q_prev = 0, p = 0, q = 1;
  for (std::size_t n = 1; n <= count; ++n) {
    const BigInt a = theta.digit(n);
    BigInt p_next = a * p + p_prev;
    BigInt q_next = a * q + q_prev;
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = std::move(p_next);
    q = std::move(q_next);
    out.push_back({n, p, q});
  }
  return out;
}

// theta_i = [a_i, a_{i+1}, ...], 1-based; theta_1 = theta.
inline QuadraticSurd tail(const QuadraticIrrational& theta, std::size_t i) {
  if (i == 0) throw DomainError("tails are 1-indexed");
  const std::size_t n0 = theta.first_periodic_index();
  if (i > n0) i = n0 + (i - n0) % theta.period_length();
  QuadraticSurd x = theta.value();
  for (std::size_t k = 1; k < i; ++k) {
    x = x.reciprocal() - QuadraticSurd::rational(theta.digit(k));
  }
  return x;
}

struct SelfSimilarityConstant {
  QuadraticSurd alpha;
  std::size_t s = 0;
  std::size_t N = 0;
};

// alpha = theta_{N+1} * ... * theta_{N+s}. Any s consecutive tails with index
// >= N give the same product, since the tails from N on cycle with period s.
inline SelfSimilarityConstant self_similarity_constant(const QuadraticIrrational& theta) {
  const std::size_t n0 = theta.first_periodic_index();
  const std::size_t s = theta.period_length();
  QuadraticSurd product = QuadraticSurd::rational(1);
  for (std::size_t i = n0 + 1; i <= n0 + s; ++i) product = product * tail(theta, i);
  return {product, s, n0};
}

inline HPReal nearest_frac(const HPReal& x) {
  // x - ceil(x - 1/2)
  return x - hp::ceil(x - 0.5);
}

// {q_n theta} as an exact surd.
inline QuadraticSurd rotation_offset(const QuadraticIrrational& theta, const BigInt& q) {
  return nearest_frac(QuadraticSurd::rational(q) * theta.value());
}

// alpha recovered from the identity itself: (-1)^s {q_{N+s} theta} / {q_N theta}.
inline QuadraticSurd alpha_from_identity(const QuadraticIrrational& theta) {
  const std::size_t n0 = theta.first_periodic_index();
  const std::size_t s = theta.period_length();
  const auto conv = convergents(theta, n0 + s);
  QuadraticSurd ratio = rotation_offset(theta, conv[n0 + s - 1].q) / rotation_offset(theta, conv[n0 - 1].q);
  return s % 2 ? -ratio : ratio;
}

struct ExactRotationResidual {
  std::size_t n = 0;
  QuadraticSurd residual;  // {q_{n+s} theta} - (-1)^s alpha {q_n theta}
};

struct FloatRotationResidual {
  std::size_t n = 0;
  double residual = 0.0;   // absolute value
  double tolerance = 0.0;  // 2^-(P-40)
};

// The identity holds for every n >= max(1, N-2); callers normally start at N.
inline std::vector<ExactRotationResidual> verify_rotation_identity_exact(const QuadraticIrrational& theta,
                                                                         std::size_t n_first,
                                                                         std::size_t n_last) {
  if (n_first < 1 || n_last < n_first) throw DomainError("verify_rotation_identity: bad index range");
  const auto ssc = self_similarity_constant(theta);
  const auto conv = convergents(theta, n_last + ssc.s);
  const QuadraticSurd signed_alpha = ssc.s % 2 ? -ssc.alpha : ssc.alpha;
  std::vector<ExactRotationResidual> out;
  for (std::size_t n = n_first; n <= n_last; ++n) {
    const QuadraticSurd lhs = rotation_offset(theta, conv[n + ssc.s - 1].q);
    const QuadraticSurd rhs = signed_alpha * rotation_offset(theta, conv[n - 1].q);
    out.push_back({n, lhs - rhs});
  }
  return out;
}

// Same identity in P-bit floating point. The 2^-(P-40) tolerance budgets 40 bits
// for the product q*theta, so q_{n+s} must stay below 2^38.
inline std::vector<FloatRotationResidual> verify_rotation_identity(const QuadraticIrrational& theta,
                                                                   std::size_t n_first, std::size_t n_last,
                                                                   Precision bits) {
  if (bits < kMinPrecisionBits) throw InsufficientPrecisionError("precision must be at least 53 bits");
  if (n_first < 1 || n_last < n_first) throw DomainError("verify_rotation_identity: bad index range");
  const auto ssc = self_similarity_constant(theta);
  const auto conv = convergents(theta, n_last + ssc.s);
  const BigInt q_limit = BigInt(1) << 38;
  const HPReal value = theta.value().to_hp(bits);
  HPReal signed_alpha = ssc.alpha.to_hp(bits);
  if (ssc.s % 2) signed_alpha = -signed_alpha;
  const double tolerance = std::ldexp(1.0, -static_cast<int>(bits - 40));
  std::vector<FloatRotationResidual> out;
  for (std::size_t n = n_first; n <= n_last; ++n) {
    const BigInt& q_far = conv[n + ssc.s - 1].q;
    if (q_far >= q_limit)
      throw InsufficientPrecisionError("q_" + std::to_string(n + ssc.s) + " = " + q_far.str() +
                                       " is too large to resolve {q theta} within 2^-(P-40)");
    const HPReal lhs = nearest_frac(HPReal(q_far, bits) * value);
    const HPReal rhs = signed_alpha * nearest_frac(HPReal(conv[n - 1].q, bits) * value);
    out.push_back({n, hp::abs(lhs - rhs).to_double(), tolerance});
  }
  return out;
}

}  // namespace siegel
