#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "siegel/cfrac.hpp"
#include "siegel/geometry.hpp"

using namespace siegel;

namespace {

std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n, Point center, double spread) {
  std::normal_distribution<double> g(0.0, spread);
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(center.real() + g(rng), center.imag() + g(rng));
  return out;
}

// Points on a wiggly curve through the origin, denser far from it.
std::vector<Point> curve_points(std::mt19937_64& rng, std::size_t n, Point origin) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = u(rng);
    const double r = t * std::abs(t);
    out.push_back(origin + Point(r, 0.2 * std::sin(5.0 * r) * r));
  }
  return out;
}

}  // namespace

TEST(Geometry, SphericalProxy) {
  const Point w(0.3, 0.2);
  EXPECT_EQ(spherical_dist(w + 1.0, w + 1.0, w), 0.0);
  EXPECT_DOUBLE_EQ(spherical_dist(w + 1.0, w + 2.0, w), 1.0);
  const Point far1 = w + Point(1e6, 0.0), far2 = w + Point(0.0, -2e6);
  EXPECT_NEAR(spherical_dist(far1, far2, w), 1.5e-6, 1e-12);
  // A point at the origin falls back to the plain distance.
  EXPECT_DOUBLE_EQ(spherical_dist(w, w + Point(0.0, 3.0), w), 3.0);
  EXPECT_EQ(spherical_dist(w + 2.0, w + Point(0, 1), w), spherical_dist(w + Point(0, 1), w + 2.0, w));
}

TEST(Geometry, BlowUpDefinitions) {
  const Point w(0.37, 0.34), lam(0.09, 0.74);
  const PointCloud one{{w + lam}, w, 0};
  EXPECT_EQ(blow_up(one, lam, 2, 0).points, one.points);
  const PointCloud up = blow_up(one, lam, 2, 1);
  EXPECT_NEAR(std::abs(up.points[0] - (w + 1.0)), 0.0, 1e-15);
  EXPECT_EQ(up.level, 1);
  // Odd period: omega + conj((z - omega) / lambda).
  const PointCloud odd = blow_up(one, lam, 1, 1);
  EXPECT_NEAR(std::abs(odd.points[0] - (w + 1.0)), 0.0, 1e-15);
  const Point z = w + Point(0.1, 0.05);
  EXPECT_NEAR(std::abs(blow_up({{z}, w, 0}, lam, 1, 1).points[0] - (w + std::conj((z - w) / lam))), 0.0, 1e-15);
  EXPECT_THROW(blow_up(one, Point(0, 0), 1, 1), DomainError);
  EXPECT_THROW(blow_up(one, lam, 1, -1), DomainError);
}

TEST(GeometryProperty, ScalingInvertsBlowUp) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Point w(u(rng), u(rng));
    const Point lam = std::polar(0.2 + 0.7 * (u(rng) + 1.0) / 2.0, 3.0 * u(rng));
    const Point z(u(rng), u(rng));
    for (std::size_t s : {1u, 2u, 3u}) {
      const Point back = scale_forward(scale_inverse(z, w, lam, s), w, lam, s);
      EXPECT_NEAR(std::abs(back - z), 0.0, 1e-14);
    }
  }
}

TEST(Geometry, HausdorffBasics) {
  const Point w(0.1, -0.2);
  const PointCloud a{{w + 1.0, w + Point(0, 1), w - 0.5}, w, 0};
  EXPECT_EQ(hausdorff(a, a), 0.0);
  const PointCloud p{{w + 1.0}, w, 0}, q{{w + 2.0}, w, 0};
  EXPECT_DOUBLE_EQ(hausdorff(p, q), 1.0);
  EXPECT_THROW(hausdorff(PointCloud{{}, w, 0}, p), DomainError);
}

TEST(Geometry, NearestIndexMatchesBruteForce) {
  std::mt19937_64 rng(31);
  const auto pts = random_points(rng, 2000, {0.0, 0.0}, 1.0);
  const NearestIndex index(pts);
  EXPECT_EQ(index.points().size(), pts.size());
  for (const Point& a : random_points(rng, 500, {0.3, 0.0}, 1.5)) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& p : pts) best = std::min(best, std::abs(a - p));
    EXPECT_EQ(index.nearest(a), best);
    Point hint = pts[7];
    EXPECT_EQ(index.nearest(a, &hint), best);
    EXPECT_EQ(std::abs(a - hint), best);
  }
  EXPECT_TRUE(std::isinf(NearestIndex(std::vector<Point>{}).nearest({0, 0})));
}

// Exact equality with brute force, not a tolerance.
TEST(GeometryProperty, AcceleratedHausdorffEqualsBruteForce) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    std::mt19937_64 rng(seed);
    const Point w(0.37, 0.34);
    const auto a = seed % 2 ? random_points(rng, 1000, w, 0.8) : curve_points(rng, 1000, w);
    const auto b = seed % 2 ? random_points(rng, 1000, w + 0.1, 0.8) : curve_points(rng, 1000, w + 0.02);
    const double brute = hausdorff_brute(a, b, w);
    for (unsigned threads : {1u, 3u})
      EXPECT_EQ(hausdorff({a, w, 0}, {b, w, 0}, {threads}), brute) << "seed " << seed;
    for (double radius : {0.05, 0.3, 1.0, 10.0}) {
      const double wb = hausdorff_windowed_brute(a, b, w, radius);
      EXPECT_EQ(hausdorff_windowed(a, b, w, radius, {1}), wb) << "seed " << seed << " radius " << radius;
      EXPECT_EQ(hausdorff_windowed(a, b, w, radius, {4}), wb);
    }
  }
}

TEST(Geometry, WindowedHausdorffIgnoresOutsidePoints) {
  const Point w(0.0, 0.0);
  const std::vector<Point> a{{0.1, 0.0}, {5.0, 0.0}}, b{{0.1, 0.0}, {-5.0, 3.0}};
  EXPECT_EQ(hausdorff_windowed(a, b, w, 1.0), 0.0);
  EXPECT_GT(hausdorff_brute(a, b, w), 0.0);
}

TEST(Geometry, LogLinearFit) {
  DecayFit fit;
  for (int n = 0; n < 6; ++n) fit.distances.emplace_back(n, 0.3 * std::pow(0.5, n));
  fit_log_linear(fit);
  EXPECT_NEAR(fit.slope, std::log(0.5), 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(0.3), 1e-12);
  EXPECT_LT(fit.residual, 1e-12);
}

TEST(Geometry, DecayNeedsSamplesInWindow) {
  const auto theta = parse_cf({}, {1});
  const auto conv = convergents(theta, 12);
  const OrbitRecord rec = critical_orbit(make_params(theta, 128), 144, conv);
  DecayOptions opt;
  opt.min_samples = 100000;
  EXPECT_THROW(decay_experiment(rec, {0.09, 0.74}, 1e-3, 1, 1, 3, opt), InsufficientSamplesError);
  // Fewer than two distances: no fit, inconclusive.
  opt.min_samples = 1;
  const DecayFit one = decay_experiment(rec, {0.09, 0.74}, 1e-3, 1, 1, 1, opt);
  EXPECT_EQ(one.distances.size(), 1u);
  EXPECT_EQ(one.decay_ok.value, Tri::inconclusive);
  EXPECT_THROW(decay_experiment(rec, {0.09, 0.74}, 1e-3, 1, 1, -1, opt), DomainError);
}

TEST(Geometry, DecayOnExactlySelfSimilarCloud) {
  // A cloud invariant under z -> omega + lambda (z - omega) makes every
  // consecutive blow-up distance small and the window keeps enough points.
  const Point w(0.2, 0.1), lam(0.5, 0.0);
  OrbitRecord rec;
  rec.origin = w;
  std::uint64_t k = 0;
  for (int level = 0; level < 40; ++level)
    for (int i = -50; i <= 50; ++i)
      rec.samples.push_back({k++, w + std::pow(0.5, level) * Point(i / 50.0, 0.0)});
  rec.closest_returns.push_back({1, 1, HPComplex(Point(0.5, 0.0), 128)});
  const DecayFit fit = decay_experiment(rec, lam, 0.0, 2, 1, 3, {});
  EXPECT_EQ(fit.distances.size(), 3u);
  EXPECT_NEAR(fit.window_radius, 1.0, 1e-15);
  for (const auto& [n, d] : fit.distances) EXPECT_LT(d, 0.03);
}
