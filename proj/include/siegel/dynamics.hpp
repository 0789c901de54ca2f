#pragma once

// Iteration of P(z) = e^{2 i pi theta} z + z^2 at configurable precision: the
// critical orbit with its closest returns, and escape-time classification.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "siegel/cfrac.hpp"
#include "siegel/error.hpp"
#include "siegel/hp.hpp"
#include "siegel/surd.hpp"

namespace siegel {

struct PolynomialParams {
  std::optional<QuadraticIrrational> theta;  // empty for rational test angles
  QuadraticSurd angle;                       // theta as an exact value
  HPComplex rotation;                        // e^{2 i pi theta}
  HPComplex critical_point;                  // omega = -rotation / 2
  Precision precision_bits = kDefaultPrecisionBits;

  std::string label() const { return theta ? theta->to_string() : angle.to_string(); }
};

inline PolynomialParams make_params_for_angle(const QuadraticSurd& angle, Precision bits) {
  if (bits < kMinPrecisionBits) throw InsufficientPrecisionError("precision must be at least 53 bits");
  HPComplex rotation = unit_circle(angle.to_hp(bits + 16)).rounded(bits);
  // Multiplying by -1/2 is exact in binary floating point.
  HPComplex omega = rotation * -0.5;
  return PolynomialParams{std::nullopt, angle, std::move(rotation), std::move(omega), bits};
}

inline PolynomialParams make_params(const QuadraticIrrational& theta, Precision bits = kDefaultPrecisionBits) {
  PolynomialParams params = make_params_for_angle(theta.value(), bits);
  params.theta = theta;
  return params;
}

// In-place z <- z * (rotation + z) with preallocated temporaries.
class QuadraticStep {
 public:
  explicit QuadraticStep(Precision bits) : wr_(bits), wi_(bits), tr_(bits), ti_(bits) {}

  void operator()(const HPComplex& rotation, HPComplex& z) {
    mpfr_add(wr_.get(), rotation.re().get(), z.re().get(), MPFR_RNDN);
    mpfr_add(wi_.get(), rotation.im().get(), z.im().get(), MPFR_RNDN);
    // re = zr*wr - zi*wi, im = zr*wi + zi*wr
    mpfr_mul(tr_.get(), z.im().get(), wi_.get(), MPFR_RNDN);
    mpfr_fms(tr_.get(), z.re().get(), wr_.get(), tr_.get(), MPFR_RNDN);
    mpfr_mul(ti_.get(), z.im().get(), wr_.get(), MPFR_RNDN);
    mpfr_fma(ti_.get(), z.re().get(), wi_.get(), ti_.get(), MPFR_RNDN);
    mpfr_swap(tr_.get(), z.re().get());
    mpfr_swap(ti_.get(), z.im().get());
  }

 private:
  HPReal wr_, wi_, tr_, ti_;
};

// P^count(z) by repeated application.
inline HPComplex iterate(const PolynomialParams& params, const HPComplex& z, std::uint64_t count) {
  HPComplex w = z.rounded(params.precision_bits);
  QuadraticStep step(params.precision_bits);
  for (std::uint64_t k = 1; k <= count; ++k) {
    step(params.rotation, w);
    if (!w.is_finite()) throw DivergenceError("orbit overflowed", k);
  }
  return w;
}

struct OrbitSample {
  std::uint64_t k = 0;
  std::complex<double> z;
};

struct ClosestReturn {
  std::size_t n = 0;    // convergent index
  std::uint64_t q = 0;  // q_n
  HPComplex delta;      // z_{q_n} - omega at full precision
};

struct OrbitOptions {
  // Keep every stride-th iterate for geometry and rendering; 0 picks the
  // smallest stride that keeps at most max_samples points.
  std::uint64_t stride = 0;
  std::size_t max_samples = 2'000'000;
  // Brute-force record scan of |z_k - omega| runs for k <= verify_limit.
  std::uint64_t verify_limit = UINT64_MAX;
};

struct OrbitRecord {
  std::complex<double> origin;  // omega
  std::vector<OrbitSample> samples;
  std::vector<ClosestReturn> closest_returns;
  // k >= 1 at which |z_k - omega| reaches a new strict minimum.
  std::vector<std::uint64_t> record_indices;
  std::uint64_t verified_through = 0;
  bool records_match_convergents = false;
  std::uint64_t max_index = 0;
  std::uint64_t stride = 1;
  Precision precision_bits = kDefaultPrecisionBits;

  const ClosestReturn* find_return(std::size_t n) const {
    for (const auto& cr : closest_returns)
      if (cr.n == n) return &cr;
    return nullptr;
  }
};

namespace detail {

inline std::uint64_t to_u64(const BigInt& x) {
  if (x > BigInt(UINT64_MAX)) return UINT64_MAX;
  return static_cast<std::uint64_t>(x);
}

}  // namespace detail

// Closest returns below 2^-(P-20) are dominated by accumulated roundoff.
inline bool below_precision_floor(const HPReal& abs_delta, Precision bits) {
  return abs_delta < hp::pow2(-(static_cast<long>(bits) - 20), 53);
}

// Iterates z_0 = omega, z_{k+1} = P(z_k) up to max_index. Records the closest
// returns delta_n = z_{q_n} - omega for every supplied convergent with
// q_n <= max_index, and checks that the record minima of |z_k - omega| fall
// exactly on {1} U {q_n} (q_0 = 1).
inline OrbitRecord critical_orbit(const PolynomialParams& params, std::uint64_t max_index,
                                  std::span<const Convergent> convs, const OrbitOptions& options = {}) {
  const Precision bits = params.precision_bits;
  OrbitRecord rec;
  rec.origin = params.critical_point.to_std();
  rec.max_index = max_index;
  rec.precision_bits = bits;
  rec.stride = options.stride;
  if (rec.stride == 0) {
    const std::size_t cap = std::max<std::size_t>(options.max_samples, 1);
    rec.stride = std::max<std::uint64_t>(1, (max_index + cap) / cap);
  }

  std::vector<std::pair<std::size_t, std::uint64_t>> wanted;  // (n, q_n)
  std::uint64_t last_q = 0;
  for (const auto& c : convs) {
    const std::uint64_t q = detail::to_u64(c.q);
    last_q = std::max(last_q, q);
    if (q <= max_index) wanted.emplace_back(c.index, q);
  }
  std::sort(wanted.begin(), wanted.end(), [](auto& a, auto& b) { return a.second < b.second; });

  const std::uint64_t verify_to = std::min({options.verify_limit, max_index, last_q});
  rec.verified_through = verify_to;

  HPComplex z = params.critical_point;
  QuadraticStep step(bits);
  HPReal dr(bits), di(bits);
  double best = INFINITY;
  std::size_t next = 0;

  rec.samples.push_back({0, rec.origin});
  for (std::uint64_t k = 1; k <= max_index; ++k) {
    step(params.rotation, z);
    if (!z.is_finite()) throw DivergenceError("critical orbit overflowed", k);

    const bool at_q = next < wanted.size() && wanted[next].second == k;
    if (k <= verify_to || at_q) {
      mpfr_sub(dr.get(), z.re().get(), params.critical_point.re().get(), MPFR_RNDN);
      mpfr_sub(di.get(), z.im().get(), params.critical_point.im().get(), MPFR_RNDN);
    }
    if (k <= verify_to) {
      const double dist = std::hypot(dr.to_double(), di.to_double());
      if (dist < best) {
        best = dist;
        rec.record_indices.push_back(k);
      }
    }
    if (k % rec.stride == 0 || at_q) rec.samples.push_back({k, z.to_std()});
    while (next < wanted.size() && wanted[next].second == k) {
      HPComplex delta(dr, di);
      if (below_precision_floor(abs(delta), bits)) {
        throw PrecisionExhaustedError("|delta_" + std::to_string(wanted[next].first) + "| fell below 2^-(" +
                                      std::to_string(bits) + "-20); raise the precision");
      }
      rec.closest_returns.push_back({wanted[next].first, k, std::move(delta)});
      ++next;
    }
  }

  std::vector<std::uint64_t> expected{1};
  for (const auto& w : wanted)
    if (w.second <= verify_to && w.second != expected.back()) expected.push_back(w.second);
  if (verify_to == 0) expected.clear();
  rec.records_match_convergents = rec.record_indices == expected;
  return rec;
}

// Largest relative change of |delta_n| between two runs of the same orbit.
inline double max_relative_delta_change(const OrbitRecord& a, const OrbitRecord& b) {
  double worst = 0.0;
  for (const auto& ca : a.closest_returns) {
    const ClosestReturn* cb = b.find_return(ca.n);
    if (!cb) continue;
    const Precision bits = std::max(ca.delta.precision_bits(), cb->delta.precision_bits());
    const HPReal ra = abs(ca.delta.rounded(bits));
    const HPReal rb = abs(cb->delta.rounded(bits));
    worst = std::max(worst, hp::abs((ra - rb) / ra).to_double());
  }
  return worst;
}

struct EscapeResult {
  bool escaped = false;
  std::uint64_t step = 0;  // first k with |z_k| > radius, when escaped
};

inline constexpr double kDefaultEscapeRadius = 2.0;

// |z_k| is tested before each application of P, for k = 0 .. max_iter-1.
inline EscapeResult escape_time(std::complex<double> rotation, std::complex<double> z, std::uint64_t max_iter,
                                double escape_radius = kDefaultEscapeRadius) {
  const double r2 = escape_radius * escape_radius;
  for (std::uint64_t k = 0; k < max_iter; ++k) {
    if (std::norm(z) > r2) return {true, k};
    z = z * (rotation + z);
  }
  return {false, max_iter};
}

inline EscapeResult escape_time(const PolynomialParams& params, const HPComplex& z0, std::uint64_t max_iter,
                                double escape_radius = kDefaultEscapeRadius) {
  if (escape_radius < 2.0) throw DomainError("escape radius must be >= 2");
  if (max_iter < 1) throw DomainError("max_iter must be >= 1");
  HPComplex z = z0.rounded(params.precision_bits);
  QuadraticStep step(params.precision_bits);
  const HPReal r2(escape_radius * escape_radius, params.precision_bits);
  for (std::uint64_t k = 0; k < max_iter; ++k) {
    if (norm(z) > r2) return {true, k};
    step(params.rotation, z);
  }
  return {false, max_iter};
}

// Orbit dump: '#'-prefixed header lines, then one "k re im" triple per line
// with 17 significant digits. Readers skip every line starting with '#'.
struct OrbitDumpHeader {
  std::string theta;
  std::complex<double> origin;
  int level = 0;
};

inline void write_orbit_dump(std::ostream& os, const OrbitDumpHeader& header, std::span<const OrbitSample> samples) {
  char buf[128];
  os << "# siegel orbit dump v1\n";
  if (!header.theta.empty()) os << "# theta " << header.theta << "\n";
  std::snprintf(buf, sizeof buf, "# origin %.17g %.17g\n", header.origin.real(), header.origin.imag());
  os << buf << "# level " << header.level << "\n";
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%llu %.17g %.17g\n", static_cast<unsigned long long>(s.k), s.z.real(),
                  s.z.imag());
    os << buf;
  }
}

inline std::vector<OrbitSample> read_orbit_dump(std::istream& is, OrbitDumpHeader* header = nullptr) {
  std::vector<OrbitSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header) {
        std::istringstream hs(line.substr(1));
        std::string key;
        hs >> key;
        if (key == "theta") {
          hs >> header->theta;
        } else if (key == "origin") {
          double re = 0, im = 0;
          hs >> re >> im;
          header->origin = {re, im};
        } else if (key == "level") {
          hs >> header->level;
        }
      }
      continue;
    }
    std::istringstream ls(line);
    unsigned long long k = 0;
    double re = 0, im = 0;
    if (!(ls >> k >> re >> im)) throw Error("orbit dump: malformed line " + std::to_string(line_no));
    out.push_back({k, {re, im}});
  }
  return out;
}

}  // namespace siegel
