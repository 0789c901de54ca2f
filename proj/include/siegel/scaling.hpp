#pragma once

// Scaling ratio lambda of the Siegel boundary at the critical point, the
// modulus M = -pi / log(alpha^2), and the verdicts built from them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "siegel/dynamics.hpp"
#include "siegel/error.hpp"
#include "siegel/hp.hpp"

namespace siegel {

enum class Tri { yes, no, inconclusive };

inline const char* to_string(Tri t) {
  switch (t) {
    case Tri::yes: return "true";
    case Tri::no: return "false";
    case Tri::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct Verdict {
  Tri value = Tri::inconclusive;
  double margin = 0.0;  // signed distance from the decision boundary
};

inline HPReal modulus_M(const HPReal& alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw DomainError("modulus_M: alpha must lie in (0, 1)");
  const Precision bits = alpha.precision();
  const HPReal log_sq = hp::log(alpha * alpha);
  return -hp::pi(bits) / log_sq;
}

inline Verdict triangle_criterion(const HPReal& M) {
  if (!M.is_finite() || !(M > 0.0)) throw DomainError("triangle_criterion: M must be finite and positive");
  const double margin = (M - 0.5).to_double();
  return {M > 0.5 ? Tri::yes : Tri::no, margin};
}

struct LambdaLevel {
  std::size_t n = 0;
  HPComplex lambda;
};

struct LambdaEstimate {
  std::vector<LambdaLevel> levels;
  HPComplex estimate;
  double err = 0.0;           // max pairwise distance of the last 3 levels
  double previous_err = 0.0;  // same, one level earlier (0 if unavailable)
  bool dispersion_jump = false;
  bool converged = false;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultLambdaTolerance = 1e-3;

// Number of consecutive levels n = N, N+1, ... for which both delta_n and
// delta_{n+s} were recorded.
inline std::size_t available_levels(const OrbitRecord& orbit, std::size_t s, std::size_t N) {
  std::size_t count = 0;
  while (orbit.find_return(N + count) && orbit.find_return(N + count + s)) ++count;
  return count;
}

namespace detail {

inline double max_pairwise(std::span<const LambdaLevel> tail) {
  double worst = 0.0;
  for (std::size_t i = 0; i < tail.size(); ++i)
    for (std::size_t j = i + 1; j < tail.size(); ++j)
      worst = std::max(worst, abs(tail[i].lambda - tail[j].lambda).to_double());
  return worst;
}

}  // namespace detail

// lambda_n = delta_{n+s} / delta_n (s even) or delta_{n+s} / conj(delta_n)
// (s odd) for n = N .. N+levels-1; the last one is the estimate.
inline LambdaEstimate estimate_lambda(const OrbitRecord& orbit, std::size_t s, std::size_t N, std::size_t levels,
                                      double tolerance = kDefaultLambdaTolerance) {
  if (levels < 3) throw TooFewLevelsError("estimate_lambda needs at least 3 levels");
  LambdaEstimate out;
  for (std::size_t n = N; n < N + levels; ++n) {
    const ClosestReturn* near = orbit.find_return(n);
    const ClosestReturn* far = orbit.find_return(n + s);
    if (!near || !far) {
      throw TooFewLevelsError("orbit has no closest return for n = " + std::to_string(near ? n + s : n) +
                              " (need levels up to n = " + std::to_string(N + levels - 1 + s) +
                              "); raise max_q or lower the level count");
    }
    HPComplex ratio = s % 2 ? far->delta / conj(near->delta) : far->delta / near->delta;
    out.levels.push_back({n, std::move(ratio)});
  }
  out.estimate = out.levels.back().lambda;
  const std::span<const LambdaLevel> all(out.levels);
  out.err = detail::max_pairwise(all.last(3));
  if (levels >= 4) {
    out.previous_err = detail::max_pairwise(all.subspan(levels - 4, 3));
    // Spreads at rounding level carry no signal.
    const HPReal mag = abs(out.estimate);
    const double noise = std::ldexp(mag.to_double(), -static_cast<int>(mag.precision()) + 20);
    out.dispersion_jump = out.err > 10.0 * out.previous_err && out.err > noise;
    if (out.dispersion_jump) out.warnings.push_back("lambda estimates disperse: last-3 spread grew more than tenfold");
  }
  if (!(out.err < tolerance)) out.warnings.push_back("lambda_err above convergence tolerance");
  out.converged = out.err < tolerance && !out.dispersion_jump;
  return out;
}

// alpha + err < |lambda| < 1 - err; `no` when the estimate clearly violates
// the bound, `inconclusive` when the error bar straddles it.
inline Verdict check_bound(const HPReal& alpha, const HPReal& lambda_abs, double err) {
  const HPReal lo = lambda_abs - err;
  const HPReal hi = lambda_abs + err;
  const double margin = std::min((lambda_abs - alpha).to_double(), (1.0 - lambda_abs).to_double()) - err;
  if (alpha < lo && hi < 1.0) return {Tri::yes, margin};
  if (lo >= HPReal(1.0, lo.precision()) || hi < alpha) return {Tri::no, margin};
  return {Tri::inconclusive, margin};
}

namespace detail {

// -2 pi / log(x^2) = -pi / log(x) on (0, 1); +inf at 1^-, 0 at 0^+.
inline HPReal torus_bound(const HPReal& x) {
  if (!(x > 0.0)) return HPReal(0.0, x.precision());
  if (!(x < 1.0)) {
    HPReal inf(x.precision());
    mpfr_set_inf(inf.get(), 1);
    return inf;
  }
  return -hp::pi(x.precision()) / hp::log(x);
}

}  // namespace detail

inline constexpr double kTorusRelativeTolerance = 1e-12;

// 2M <= -2 pi / log(|lambda|^2), evaluated at the pessimistic end of the
// error bar. Algebraically the same statement as check_bound's lower half.
inline Verdict torus_inequality(const HPReal& M, const HPReal& lambda_abs, double err = 0.0,
                                double rel_tol = kTorusRelativeTolerance) {
  const HPReal two_m = M * 2.0;
  const HPReal slack = two_m * rel_tol;
  const HPReal lo = lambda_abs - err;
  const HPReal hi = lambda_abs + err;
  const HPReal rhs_lo = detail::torus_bound(lo);
  const double margin = rhs_lo.is_finite() ? (rhs_lo - two_m).to_double() : INFINITY;
  if (hi < 1.0 && two_m <= rhs_lo + slack) return {Tri::yes, margin};
  if (!(lo < 1.0)) return {Tri::no, margin};
  if (hi < 1.0 && two_m > detail::torus_bound(hi) + slack) return {Tri::no, margin};
  return {Tri::inconclusive, margin};
}

enum class Spiral { not_applicable, real_within_tol, nonreal, inconclusive };

inline const char* to_string(Spiral s) {
  switch (s) {
    case Spiral::not_applicable: return "not-applicable";
    case Spiral::real_within_tol: return "real-within-tol";
    case Spiral::nonreal: return "nonreal";
    case Spiral::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct SpiralVerdict {
  Spiral value = Spiral::inconclusive;
  double arg = 0.0;             // arg(lambda_est) in (-pi, pi]
  double distance_to_real = 0.0;  // min(|arg|, pi - |arg|)
  double arg_dispersion = 0.0;  // max pairwise arg difference of the last 3 levels
};

inline constexpr double kDefaultSpiralTolerance = 1e-2;

inline SpiralVerdict spiral_test(const HPComplex& lambda_est, double arg_dispersion, std::size_t s,
                                 double tol_arg = kDefaultSpiralTolerance) {
  SpiralVerdict v;
  v.arg = arg(lambda_est).to_double();
  v.distance_to_real = std::min(std::abs(v.arg), std::numbers::pi - std::abs(v.arg));
  v.arg_dispersion = arg_dispersion;
  if (s % 2) {
    // Lambda^2 scales by lambda * conj(lambda) > 0, so no spiral is possible.
    v.value = Spiral::not_applicable;
  } else if (v.distance_to_real <= tol_arg) {
    v.value = Spiral::real_within_tol;
  } else if (v.distance_to_real > 3.0 * arg_dispersion) {
    v.value = Spiral::nonreal;
  } else {
    v.value = Spiral::inconclusive;
  }
  return v;
}

inline double arg_dispersion(const LambdaEstimate& est, std::size_t last = 3) {
  const std::size_t k = std::min(last, est.levels.size());
  std::vector<double> args;
  for (std::size_t i = est.levels.size() - k; i < est.levels.size(); ++i)
    args.push_back(arg(est.levels[i].lambda).to_double());
  double worst = 0.0;
  for (std::size_t i = 0; i < args.size(); ++i)
    for (std::size_t j = i + 1; j < args.size(); ++j) {
      double d = std::abs(args[i] - args[j]);
      d = std::min(d, 2.0 * std::numbers::pi - d);
      worst = std::max(worst, d);
    }
  return worst;
}

inline SpiralVerdict spiral_test(const LambdaEstimate& est, std::size_t s, double tol_arg = kDefaultSpiralTolerance) {
  return spiral_test(est.estimate, arg_dispersion(est), s, tol_arg);
}

}  // namespace siegel
