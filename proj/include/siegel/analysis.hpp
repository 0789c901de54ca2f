#pragma once

// End-to-end analysis of one angle (continued fraction -> critical orbit ->
// lambda -> verdicts -> blow-up decay) and the [;a] family sweep, with their
// JSON reports. Real numbers in reports are decimal strings.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "siegel/cfrac.hpp"
#include "siegel/dynamics.hpp"
#include "siegel/error.hpp"
#include "siegel/geometry.hpp"
#include "siegel/hp.hpp"
#include "siegel/scaling.hpp"

#ifndef SIEGEL_VERSION
#define SIEGEL_VERSION "0.0.0"
#endif

namespace siegel {

inline constexpr const char* kReportSchemaVersion = "1.0.0";

inline std::string decimal(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string decimal(const HPReal& x) { return x.to_string(); }

inline nlohmann::json complex_json(const HPComplex& z) {
  return {{"re", decimal(z.re())}, {"im", decimal(z.im())}, {"abs", decimal(abs(z))}, {"arg", decimal(arg(z))}};
}

inline nlohmann::json verdict_json(const Verdict& v) {
  return {{"value", to_string(v.value)}, {"margin", decimal(v.margin)}};
}

struct AnalysisConfig {
  std::string theta_cf;
  Precision precision_bits = kDefaultPrecisionBits;
  std::uint64_t max_q = 2'000'000;
  std::size_t lambda_levels = 0;  // 0: every level the orbit supports
  int decay_levels = 4;           // 0 skips the blow-up experiment
  double lambda_tolerance = kDefaultLambdaTolerance;
  double spiral_tolerance = kDefaultSpiralTolerance;
  bool precision_ladder = true;  // rerun at +64 bits
  unsigned threads = 0;

  nlohmann::json to_json() const {
    return {{"theta_cf", theta_cf},
            {"precision_bits", precision_bits},
            {"max_q", max_q},
            {"lambda_levels", lambda_levels},
            {"decay_levels", decay_levels},
            {"lambda_tolerance", decimal(lambda_tolerance)},
            {"spiral_tolerance", decimal(spiral_tolerance)},
            {"precision_ladder", precision_ladder}};
  }
};

// Convergents up to and including the first one with q_n > max_q.
inline std::vector<Convergent> convergents_through(const QuadraticIrrational& theta, std::uint64_t max_q) {
  std::size_t count = 16;
  for (;;) {
    auto convs = convergents(theta, count);
    if (convs.back().q > BigInt(max_q)) {
      while (convs.size() >= 2 && convs[convs.size() - 2].q > BigInt(max_q)) convs.pop_back();
      return convs;
    }
    count *= 2;
  }
}

// Critical orbit up to the largest q_n <= max_q, recording every delta_n.
inline OrbitRecord orbit_for(const QuadraticIrrational& theta, Precision bits, std::uint64_t max_q,
                             const OrbitOptions& opt = {}) {
  const auto convs = convergents_through(theta, max_q);
  std::uint64_t last = 1;
  for (const auto& c : convs)
    if (c.q <= BigInt(max_q)) last = static_cast<std::uint64_t>(c.q);
  return critical_orbit(make_params(theta, bits), last, convs, opt);
}

inline void validate(const AnalysisConfig& cfg, const QuadraticIrrational& theta) {
  if (cfg.precision_bits < kMinPrecisionBits) throw ConfigError("precision must be at least 53 bits");
  if (cfg.precision_bits > 1 << 16) throw ConfigError("precision above 65536 bits is not supported");
  if (cfg.lambda_levels != 0 && cfg.lambda_levels < 3) throw ConfigError("levels must be 0 (auto) or >= 3");
  if (cfg.decay_levels < 0) throw ConfigError("decay levels must be >= 0");
  if (!(cfg.lambda_tolerance > 0.0)) throw ConfigError("lambda tolerance must be positive");
  if (!(cfg.spiral_tolerance > 0.0)) throw ConfigError("spiral tolerance must be positive");
  const std::size_t need = theta.first_periodic_index() + theta.period_length();
  const auto convs = convergents(theta, need);
  if (convs.back().q > BigInt(cfg.max_q))
    throw ConfigError("max_q must be at least q_{N+s} = " + convs.back().q.str());
}

struct StabilityCheck {
  bool performed = false;
  double shift = 0.0;      // |lambda_est(reference) - lambda_est(extended)|
  double reference_err = 0.0;
  bool stable = false;
};

struct AnalysisResult {
  AnalysisConfig config;
  std::string theta;
  std::size_t s = 0;
  std::size_t N = 0;
  HPReal alpha;
  HPReal M;
  OrbitRecord orbit;
  std::optional<LambdaEstimate> lambda;
  bool converged = false;
  Verdict triangle;
  Verdict bound;
  Verdict torus;
  SpiralVerdict spiral;
  double ladder_delta_change = 0.0;
  bool ladder_reliable = true;
  StabilityCheck precision_stability;
  StabilityCheck level_stability;
  std::optional<DecayFit> decay;
  std::string decay_status = "skipped";
  std::vector<std::string> warnings;
  nlohmann::json report;
};

namespace detail {

inline StabilityCheck compare_estimates(const LambdaEstimate& reference, const LambdaEstimate& extended) {
  StabilityCheck c;
  c.performed = true;
  c.shift = abs(reference.estimate - extended.estimate.rounded(reference.estimate.precision_bits())).to_double();
  c.reference_err = reference.err;
  c.stable = c.shift <= reference.err;
  return c;
}

inline nlohmann::json stability_json(const StabilityCheck& c) {
  if (!c.performed) return {{"performed", false}};
  return {{"performed", true},
          {"shift", decimal(c.shift)},
          {"reference_err", decimal(c.reference_err)},
          {"stable", c.stable}};
}

inline nlohmann::json build_report(const AnalysisResult& r, const QuadraticIrrational& theta,
                                   const SelfSimilarityConstant& ssc) {
  using nlohmann::json;
  json rep;
  rep["schema_version"] = kReportSchemaVersion;
  rep["artifact"] = {{"name", "siegel"}, {"version", SIEGEL_VERSION}};
  rep["config"] = r.config.to_json();
  json digits_pre = json::array(), digits_per = json::array();
  for (Digit d : theta.preperiod()) digits_pre.push_back(d);
  for (Digit d : theta.period()) digits_per.push_back(d);
  rep["theta"] = {{"cf", r.theta},
                  {"preperiod", digits_pre},
                  {"period", digits_per},
                  {"surd", theta.value().to_string()},
                  {"value", decimal(theta.value().to_hp(r.config.precision_bits))}};
  rep["s"] = r.s;
  rep["N"] = r.N;
  rep["alpha"] = {{"surd", ssc.alpha.to_string()}, {"value", decimal(r.alpha)}};
  rep["M"] = decimal(r.M);

  json levels = json::array();
  if (r.lambda) {
    for (const auto& l : r.lambda->levels) {
      json item = complex_json(l.lambda);
      item["n"] = l.n;
      levels.push_back(std::move(item));
    }
  }
  rep["lambda_levels"] = levels;
  rep["lambda_est"] = r.lambda ? complex_json(r.lambda->estimate) : json(nullptr);
  rep["lambda_err"] = r.lambda ? json(decimal(r.lambda->err)) : json(nullptr);
  rep["converged"] = r.converged;

  json spiral = {{"value", to_string(r.spiral.value)},
                 {"arg", decimal(r.spiral.arg)},
                 {"distance_to_real", decimal(r.spiral.distance_to_real)},
                 {"arg_dispersion", decimal(r.spiral.arg_dispersion)},
                 {"tolerance", decimal(r.config.spiral_tolerance)}};
  rep["verdicts"] = {{"bound_ok", verdict_json(r.bound)},
                     {"triangle_ok", verdict_json(r.triangle)},
                     {"torus_ineq_ok", verdict_json(r.torus)},
                     {"spiral", spiral}};

  json returns = json::array();
  for (const auto& cr : r.orbit.closest_returns)
    returns.push_back({{"n", cr.n}, {"q", cr.q}, {"abs_delta", decimal(abs(cr.delta))}});
  json diag;
  diag["orbit"] = {{"max_index", r.orbit.max_index},
                   {"stride", r.orbit.stride},
                   {"samples", r.orbit.samples.size()},
                   {"records_verified_through", r.orbit.verified_through},
                   {"records_match_convergents", r.orbit.records_match_convergents}};
  diag["closest_returns"] = returns;
  diag["precision_ladder"] = {{"performed", r.config.precision_ladder},
                              {"bits", r.config.precision_bits + 64},
                              {"max_relative_delta_change", decimal(r.ladder_delta_change)},
                              {"reliable", r.ladder_reliable},
                              {"lambda", stability_json(r.precision_stability)}};
  diag["level_stability"] = stability_json(r.level_stability);
  if (r.lambda) {
    diag["lambda_previous_err"] = decimal(r.lambda->previous_err);
    diag["lambda_dispersion_jump"] = r.lambda->dispersion_jump;
  }
  diag["warnings"] = r.warnings;
  rep["diagnostics"] = diag;

  json decay = {{"status", r.decay_status}};
  if (r.decay) {
    const DecayFit& f = *r.decay;
    json dist = json::array();
    for (const auto& [n, d] : f.distances) dist.push_back({{"n", n}, {"d", decimal(d)}});
    decay["distances"] = dist;
    decay["samples_in_window"] = f.samples_in_window;
    decay["window_radius"] = decimal(f.window_radius);
    decay["slope"] = decimal(f.slope);
    decay["intercept"] = decimal(f.intercept);
    decay["residual"] = decimal(f.residual);
    decay["eventually_decreasing"] = f.eventually_decreasing;
    decay["decay_ok"] = verdict_json(f.decay_ok);
    decay["metric"] = "proxy min(|x-y|, 1/|x-omega| + 1/|y-omega|); may violate the triangle inequality";
  }
  rep["decay"] = decay;
  rep["status"] = r.converged ? "complete" : "non-convergence";
  return rep;
}

}  // namespace detail

// Runs the whole pipeline. Non-convergence is reported in the result (and its
// verdicts made inconclusive) rather than thrown; precision exhaustion and
// configuration errors throw.
inline AnalysisResult run_analysis(const AnalysisConfig& cfg) {
  const QuadraticIrrational theta = parse_cf_text(cfg.theta_cf);
  validate(cfg, theta);
  const SelfSimilarityConstant ssc = self_similarity_constant(theta);

  AnalysisResult r;
  r.config = cfg;
  r.theta = theta.to_string();
  r.s = ssc.s;
  r.N = ssc.N;
  r.alpha = ssc.alpha.to_hp(cfg.precision_bits);
  r.M = modulus_M(r.alpha);
  r.triangle = triangle_criterion(r.M);

  r.orbit = orbit_for(theta, cfg.precision_bits, cfg.max_q);
  if (!r.orbit.records_match_convergents)
    r.warnings.push_back("record minima of |z_k - omega| do not fall exactly on the convergent denominators");

  const std::size_t available = available_levels(r.orbit, r.s, r.N);
  const std::size_t levels = cfg.lambda_levels ? cfg.lambda_levels : available;
  try {
    r.lambda = estimate_lambda(r.orbit, r.s, r.N, levels, cfg.lambda_tolerance);
    for (const auto& w : r.lambda->warnings) r.warnings.push_back(w);
    r.converged = r.lambda->converged;
  } catch (const TooFewLevelsError& e) {
    r.warnings.push_back(e.what());
    r.converged = false;
  }

  if (r.lambda && levels >= 5) {
    const LambdaEstimate shorter = estimate_lambda(r.orbit, r.s, r.N, levels - 2, cfg.lambda_tolerance);
    r.level_stability = detail::compare_estimates(shorter, *r.lambda);
    if (!r.level_stability.stable) r.warnings.push_back("lambda estimate moved by more than lambda_err over 2 more levels");
  }

  if (cfg.precision_ladder) {
    const OrbitRecord hi = orbit_for(theta, cfg.precision_bits + 64, cfg.max_q);
    r.ladder_delta_change = max_relative_delta_change(r.orbit, hi);
    r.ladder_reliable = r.ladder_delta_change < std::ldexp(1.0, -40);
    if (!r.ladder_reliable) r.warnings.push_back("closest returns changed by >= 2^-40 (relative) at +64 bits");
    if (r.lambda) {
      const LambdaEstimate hi_est = estimate_lambda(hi, r.s, r.N, levels, cfg.lambda_tolerance);
      r.precision_stability = detail::compare_estimates(*r.lambda, hi_est);
      if (!r.precision_stability.stable) r.warnings.push_back("lambda estimate moved by more than lambda_err at +64 bits");
    }
  }

  if (r.converged) {
    const HPReal lam_abs = abs(r.lambda->estimate);
    r.bound = check_bound(r.alpha, lam_abs, r.lambda->err);
    r.torus = torus_inequality(r.M, lam_abs, r.lambda->err);
    r.spiral = spiral_test(*r.lambda, r.s, cfg.spiral_tolerance);
    if (r.bound.value == Tri::no) r.warnings.push_back("bound alpha < |lambda| < 1 violated: pipeline error");
    if (r.bound.value != r.torus.value) r.warnings.push_back("check_bound and torus_inequality disagree");
  } else {
    r.bound = {Tri::inconclusive, 0.0};
    r.torus = {Tri::inconclusive, 0.0};
    if (r.lambda) {
      r.spiral = spiral_test(*r.lambda, r.s, cfg.spiral_tolerance);
      if (r.s % 2 == 0) r.spiral.value = Spiral::inconclusive;
    } else {
      r.spiral.value = r.s % 2 ? Spiral::not_applicable : Spiral::inconclusive;
    }
  }

  if (cfg.decay_levels > 0) {
    if (!r.converged) {
      r.decay_status = "skipped-non-convergence";
    } else {
      try {
        DecayOptions dopt;
        dopt.threads = cfg.threads;
        r.decay = decay_experiment(r.orbit, r.lambda->estimate.to_std(), r.lambda->err, r.s, r.N, cfg.decay_levels, dopt);
        r.decay_status = "complete";
      } catch (const InsufficientSamplesError& e) {
        r.decay_status = "insufficient-samples";
        r.warnings.push_back(e.what());
      }
    }
  }

  r.report = detail::build_report(r, theta, ssc);
  return r;
}

struct SweepRow {
  std::int64_t a = 0;
  std::string alpha_surd;
  std::string alpha;
  std::string M;
  Verdict triangle;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<std::int64_t> flip_after;  // last a before the verdict changes
};

// theta = [;a] for a in [a_min, a_max].
inline SweepResult sweep(std::int64_t a_min, std::int64_t a_max, Precision bits = kDefaultPrecisionBits) {
  if (a_min < 1 || a_max < a_min) throw ConfigError("sweep needs 1 <= a_min <= a_max");
  SweepResult out;
  for (std::int64_t a = a_min; a <= a_max; ++a) {
    const QuadraticIrrational theta = parse_cf({}, {a});
    const SelfSimilarityConstant ssc = self_similarity_constant(theta);
    const HPReal alpha = ssc.alpha.to_hp(bits);
    const HPReal M = modulus_M(alpha);
    SweepRow row{a, ssc.alpha.to_string(), decimal(alpha), decimal(M), triangle_criterion(M)};
    if (!out.rows.empty() && out.rows.back().triangle.value != row.triangle.value && !out.flip_after)
      out.flip_after = out.rows.back().a;
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline nlohmann::json sweep_json(const SweepResult& s, Precision bits) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"a", r.a},
                    {"alpha_surd", r.alpha_surd},
                    {"alpha", r.alpha},
                    {"M", r.M},
                    {"triangle_ok", verdict_json(r.triangle)}});
  return {{"schema_version", kReportSchemaVersion},
          {"artifact", {{"name", "siegel"}, {"version", SIEGEL_VERSION}}},
          {"precision_bits", bits},
          {"rows", rows},
          {"flip_after", s.flip_after ? nlohmann::json(*s.flip_after) : nlohmann::json(nullptr)}};
}

inline std::string sweep_table(const SweepResult& s, int digits = 12) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%4s  %-22s  %-*s  %-*s  %s\n", "a", "alpha (exact)", digits + 3, "alpha",
                digits + 3, "M", "triangle");
  os << buf;
  for (const auto& r : s.rows) {
    const std::string alpha = r.alpha.substr(0, static_cast<std::size_t>(digits + 2));
    const std::string M = r.M.substr(0, static_cast<std::size_t>(digits + 2));
    std::snprintf(buf, sizeof buf, "%4lld  %-22s  %-*s  %-*s  %s\n", static_cast<long long>(r.a), r.alpha_surd.c_str(),
                  digits + 3, alpha.c_str(), digits + 3, M.c_str(), to_string(r.triangle.value));
    os << buf;
  }
  if (s.flip_after) os << "verdict flips between a=" << *s.flip_after << " and a=" << *s.flip_after + 1 << "\n";
  return os.str();
}

}  // namespace siegel
