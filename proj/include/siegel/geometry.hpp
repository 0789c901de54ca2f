#pragma once

// Blow-ups S_n = Lambda^{-n}(boundary samples), the spherical-distance proxy
// centred at the critical point, and Hausdorff distances between finite clouds.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <thread>
#include <vector>

#include "siegel/dynamics.hpp"
#include "siegel/error.hpp"
#include "siegel/scaling.hpp"

namespace siegel {

using Point = std::complex<double>;

struct PointCloud {
  std::vector<Point> points;
  Point origin;
  int level = 0;
};

// min(|x - y|, 1/|x - origin| + 1/|y - origin|). A point at the origin makes
// the second term +inf, so the proxy falls back to |x - y|.
inline double spherical_dist(Point x, Point y, Point origin) {
  const double direct = std::abs(x - y);
  const double via_infinity = 1.0 / std::abs(x - origin) + 1.0 / std::abs(y - origin);
  return std::min(direct, via_infinity);
}

// One application of Lambda: omega + lambda (z - omega), conjugated for odd s.
inline Point scale_forward(Point z, Point origin, Point lambda, std::size_t s) {
  const Point u = z - origin;
  return origin + lambda * (s % 2 ? std::conj(u) : u);
}

// One application of Lambda^{-1}.
inline Point scale_inverse(Point z, Point origin, Point lambda, std::size_t s) {
  const Point u = (z - origin) / lambda;
  return origin + (s % 2 ? std::conj(u) : u);
}

inline PointCloud blow_up(const PointCloud& cloud, Point lambda, std::size_t s, int steps) {
  if (lambda == Point(0.0, 0.0)) throw DomainError("blow_up: lambda must be nonzero");
  if (steps < 0) throw DomainError("blow_up: steps must be >= 0");
  PointCloud out{cloud.points, cloud.origin, cloud.level + steps};
  for (int i = 0; i < steps; ++i)
    for (Point& z : out.points) z = scale_inverse(z, cloud.origin, lambda, s);
  return out;
}

// Static 2-d tree answering exact Euclidean nearest-neighbour distance.
// Boundary samples are very unevenly spread (sparse near the critical point),
// which rules out a uniform bucket grid.
class NearestIndex {
 public:
  explicit NearestIndex(std::span<const Point> points)
      : pts_(points.begin(), points.end()), axis_(pts_.size(), 0), box_(pts_.size()) {
    build(0, pts_.size());
  }

  bool empty() const noexcept { return pts_.empty(); }

  // Points in tree order; consecutive entries are spatially close.
  std::span<const Point> points() const noexcept { return pts_; }

  // min over points of |a - p|; +inf when empty. `hint`, when given, seeds the
  // search with a nearby point and receives the nearest one.
  double nearest(Point a, Point* hint = nullptr) const {
    double best = std::numeric_limits<double>::infinity();
    Point arg{};
    if (hint && !pts_.empty()) {
      best = std::abs(a - *hint);
      arg = *hint;
    }
    search(0, pts_.size(), a, best, arg);
    if (hint) *hint = arg;
    return best;
  }

 private:
  static constexpr std::size_t kLeaf = 8;

  struct Box {
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;

    double distance(Point a) const {
      const double dx = std::max({xmin - a.real(), 0.0, a.real() - xmax});
      const double dy = std::max({ymin - a.imag(), 0.0, a.imag() - ymax});
      return std::hypot(dx, dy);
    }
  };

  static double coord(Point p, std::uint8_t axis) { return axis ? p.imag() : p.real(); }

  void build(std::size_t lo, std::size_t hi) {
    if (hi - lo <= kLeaf) return;
    Box b{pts_[lo].real(), pts_[lo].real(), pts_[lo].imag(), pts_[lo].imag()};
    for (std::size_t i = lo; i < hi; ++i) {
      b.xmin = std::min(b.xmin, pts_[i].real());
      b.xmax = std::max(b.xmax, pts_[i].real());
      b.ymin = std::min(b.ymin, pts_[i].imag());
      b.ymax = std::max(b.ymax, pts_[i].imag());
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::uint8_t axis = (b.ymax - b.ymin) > (b.xmax - b.xmin) ? 1 : 0;
    axis_[mid] = axis;
    box_[mid] = b;
    std::nth_element(pts_.begin() + static_cast<std::ptrdiff_t>(lo), pts_.begin() + static_cast<std::ptrdiff_t>(mid),
                     pts_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [axis](Point u, Point v) { return coord(u, axis) < coord(v, axis); });
    build(lo, mid);
    build(mid + 1, hi);
  }

  // Slack keeps box pruning safe against rounding in the box distance.
  static bool may_improve(double box_distance, double best) { return box_distance <= best * (1.0 + 1e-9); }

  void consider(std::size_t i, Point a, double& best, Point& arg) const {
    const double d = std::abs(a - pts_[i]);
    if (d < best) {
      best = d;
      arg = pts_[i];
    }
  }

  void search(std::size_t lo, std::size_t hi, Point a, double& best, Point& arg) const {
    if (hi - lo <= kLeaf) {
      for (std::size_t i = lo; i < hi; ++i) consider(i, a, best, arg);
      return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    if (!may_improve(box_[mid].distance(a), best)) return;
    consider(mid, a, best, arg);
    if (coord(a, axis_[mid]) < coord(pts_[mid], axis_[mid])) {
      search(lo, mid, a, best, arg);
      search(mid + 1, hi, a, best, arg);
    } else {
      search(mid + 1, hi, a, best, arg);
      search(lo, mid, a, best, arg);
    }
  }

  std::vector<Point> pts_;
  std::vector<std::uint8_t> axis_;
  std::vector<Box> box_;
};

struct HausdorffOptions {
  unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

template <typename Fn>
double parallel_max(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count / 4096, 1)));
  std::vector<double> partial(threads, 0.0);
  auto work = [&](unsigned t) {
    const std::size_t begin = count * t / threads, end = count * (t + 1) / threads;
    partial[t] = fn(begin, end);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  return *std::max_element(partial.begin(), partial.end());
}

inline double min_inverse_radius(std::span<const Point> pts, Point origin) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point& p : pts) best = std::min(best, 1.0 / std::abs(p - origin));
  return best;
}

// sup over the `from` points selected by `keep` of inf over all of `to`.
template <typename Keep>
double directed(std::span<const Point> from, std::span<const Point> to, Point origin, Keep&& keep,
                const NearestIndex& index, double index_reach, unsigned threads) {
  std::vector<Point> kept;
  for (const Point& a : from)
    if (keep(a)) kept.push_back(a);
  if (kept.empty()) return 0.0;
  // Visiting queries in tree order keeps the warm-start hint close.
  const NearestIndex order(kept);
  const std::span<const Point> queries = order.points();
  const double to_inv = min_inverse_radius(to, origin);
  return parallel_max(queries.size(), threads, [&](std::size_t begin, std::size_t end) {
    double local = 0.0;
    Point hint = index.empty() ? Point{} : index.points()[0];
    for (std::size_t i = begin; i < end; ++i) {
      const Point a = queries[i];
      double direct = index.empty() ? std::numeric_limits<double>::infinity() : index.nearest(a, &hint);
      // Points left out of the index are farther than index_reach from a.
      if (!(direct <= index_reach)) {
        direct = std::numeric_limits<double>::infinity();
        for (const Point& b : to) direct = std::min(direct, std::abs(a - b));
      }
      local = std::max(local, std::min(direct, 1.0 / std::abs(a - origin) + to_inv));
    }
    return local;
  });
}

}  // namespace detail

inline double hausdorff_brute(std::span<const Point> a, std::span<const Point> b, Point origin) {
  auto directed = [&](std::span<const Point> from, std::span<const Point> to) {
    double worst = 0.0;
    for (const Point& x : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Point& y : to) best = std::min(best, spherical_dist(x, y, origin));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

// Hausdorff distance under spherical_dist; equal to hausdorff_brute.
inline double hausdorff(const PointCloud& a, const PointCloud& b, const HausdorffOptions& opt = {}) {
  if (a.points.empty() || b.points.empty()) throw DomainError("hausdorff: clouds must be nonempty");
  const Point origin = a.origin;
  const NearestIndex index_a(a.points), index_b(b.points);
  const double inf = std::numeric_limits<double>::infinity();
  auto all = [](Point) { return true; };
  return std::max(detail::directed(a.points, b.points, origin, all, index_b, inf, opt.threads),
                  detail::directed(b.points, a.points, origin, all, index_a, inf, opt.threads));
}

// Hausdorff distance seen from a disk: each directed sup runs over the points
// of one cloud inside |z - origin| <= radius, the inf over the whole other cloud.
inline double hausdorff_windowed_brute(std::span<const Point> a, std::span<const Point> b, Point origin,
                                       double radius) {
  auto directed = [&](std::span<const Point> from, std::span<const Point> to) {
    double worst = 0.0;
    for (const Point& x : from) {
      if (!(std::abs(x - origin) <= radius)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const Point& y : to) best = std::min(best, spherical_dist(x, y, origin));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

inline double hausdorff_windowed(std::span<const Point> a, std::span<const Point> b, Point origin, double radius,
                                 const HausdorffOptions& opt = {}) {
  auto inside = [&](Point z) { return std::abs(z - origin) <= radius; };
  auto near_window = [&](std::span<const Point> pts) {
    std::vector<Point> out;
    for (const Point& p : pts)
      if (std::abs(p - origin) <= 2.0 * radius) out.push_back(p);
    return out;
  };
  const std::vector<Point> a_near = near_window(a), b_near = near_window(b);
  const NearestIndex index_a(a_near), index_b(b_near);
  // Anything outside the 2R disk is more than R away from a query in the R disk.
  return std::max(detail::directed(a, b, origin, inside, index_b, radius, opt.threads),
                  detail::directed(b, a, origin, inside, index_a, radius, opt.threads));
}

struct DecayOptions {
  double window_radius = 0.0;    // 0: |delta_N| / |lambda|
  std::size_t min_samples = 100;  // at the deepest level, inside the window
  double max_residual = 0.5;      // RMS of the log-linear fit
  unsigned threads = 0;
};

struct DecayFit {
  std::vector<std::pair<int, double>> distances;  // (n, d_H(S_n, S_{n+1}))
  std::vector<std::size_t> samples_in_window;     // per level 0..max_level
  double window_radius = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  bool eventually_decreasing = false;
  Verdict decay_ok;
  Point lambda;
  double lambda_err = 0.0;
};

// Least-squares fit of log d against n; residual is the RMS misfit in log space.
inline void fit_log_linear(DecayFit& fit) {
  const std::size_t m = fit.distances.size();
  if (m < 2) return;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, d] : fit.distances) {
    const double y = std::log(std::max(d, 1e-300));
    sx += n;
    sy += y;
    sxx += static_cast<double>(n) * n;
    sxy += n * y;
  }
  const double dm = static_cast<double>(m);
  fit.slope = (dm * sxy - sx * sy) / (dm * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / dm;
  double ss = 0;
  for (const auto& [n, d] : fit.distances) {
    const double e = std::log(std::max(d, 1e-300)) - (fit.intercept + fit.slope * n);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / dm);
}

// d_H(S_n, S_{n+1}) for n < max_level inside the window around omega, with the
// critical orbit samples standing in for the Siegel boundary.
inline DecayFit decay_experiment(const OrbitRecord& orbit, Point lambda, double lambda_err, std::size_t s,
                                 std::size_t N, int max_level, const DecayOptions& opt = {}) {
  if (max_level < 0) throw DomainError("decay_experiment: max_level must be >= 0");
  DecayFit fit;
  fit.lambda = lambda;
  fit.lambda_err = lambda_err;
  fit.window_radius = opt.window_radius;
  if (fit.window_radius <= 0.0) {
    const ClosestReturn* base = orbit.find_return(N);
    if (!base) throw InsufficientSamplesError("decay_experiment: orbit lacks delta_N for the default window");
    fit.window_radius = abs(base->delta).to_double() / std::abs(lambda);
  }

  PointCloud level0{{}, orbit.origin, 0};
  level0.points.reserve(orbit.samples.size());
  for (const auto& smp : orbit.samples) level0.points.push_back(smp.z);

  std::vector<PointCloud> clouds;
  clouds.push_back(level0);
  for (int n = 1; n <= max_level; ++n) clouds.push_back(blow_up(clouds.back(), lambda, s, 1));
  for (const auto& c : clouds) {
    std::size_t inside = 0;
    for (const Point& p : c.points) inside += std::abs(p - c.origin) <= fit.window_radius;
    fit.samples_in_window.push_back(inside);
  }
  if (max_level > 0 && fit.samples_in_window.back() < opt.min_samples) {
    throw InsufficientSamplesError("decay_experiment: only " + std::to_string(fit.samples_in_window.back()) +
                                   " samples inside the window at level " + std::to_string(max_level) +
                                   " (need " + std::to_string(opt.min_samples) + ")");
  }

  const HausdorffOptions hopt{opt.threads};
  for (int n = 0; n < max_level; ++n) {
    const double d = hausdorff_windowed(clouds[n].points, clouds[n + 1].points, orbit.origin, fit.window_radius, hopt);
    fit.distances.emplace_back(n, d);
  }

  if (fit.distances.size() < 2) {
    fit.decay_ok = {Tri::inconclusive, 0.0};
    return fit;
  }
  fit_log_linear(fit);
  const std::size_t m = fit.distances.size();
  fit.eventually_decreasing = fit.distances[m - 1].second < fit.distances[m - 2].second;
  const bool ok = fit.slope < 0.0 && fit.residual < opt.max_residual;
  fit.decay_ok = {ok ? Tri::yes : Tri::no, -fit.slope};
  return fit;
}

}  // namespace siegel
