#pragma once

// Deterministic raster figures: filled Julia sets, critical-orbit boundary
// plots, log-chart views and blow-up overlays. Output is binary PPM (P6) with
// the regeneration metadata as a JSON comment line.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "siegel/dynamics.hpp"
#include "siegel/error.hpp"
#include "siegel/geometry.hpp"

#ifndef SIEGEL_VERSION
#define SIEGEL_VERSION "0.0.0"
#endif

namespace siegel {

using Json = nlohmann::json;

struct Window {
  Point center;
  double width = 0.0;
  double height = 0.0;

  void validate() const {
    if (!(std::isfinite(center.real()) && std::isfinite(center.imag())))
      throw DomainError("window center must be finite");
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height))
      throw DomainError("window must have positive finite width and height");
  }
};

struct Resolution {
  int width_px = 0;
  int height_px = 0;

  void validate() const {
    if (width_px < 1 || height_px < 1) throw DomainError("resolution must be at least 1x1");
    if (static_cast<long long>(width_px) * height_px > (1LL << 28)) throw DomainError("resolution too large");
  }
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RasterImage {
  int width_px = 0;
  int height_px = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB, top row first
  Json meta = Json::object();

  RasterImage() = default;
  RasterImage(int w, int h, Rgb fill) : width_px(w), height_px(h), pixels(std::size_t(w) * h * 3) {
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
      pixels[i] = fill.r;
      pixels[i + 1] = fill.g;
      pixels[i + 2] = fill.b;
    }
  }

  Rgb at(int i, int j) const {
    const std::size_t o = (std::size_t(j) * width_px + i) * 3;
    return {pixels[o], pixels[o + 1], pixels[o + 2]};
  }
  void set(int i, int j, Rgb c) {
    const std::size_t o = (std::size_t(j) * width_px + i) * 3;
    pixels[o] = c.r;
    pixels[o + 1] = c.g;
    pixels[o + 2] = c.b;
  }
};

// Palette version 1. Bounded pixels are black; escaped pixels use a 256-entry
// ramp from white (escape at step 0) towards blue, indexed by
// floor(255 * log(1+k) / log(1+max_iter)). Every channel is non-increasing in
// k, and no ramp entry is black. Orbit plots draw black on white; overlays use
// the fixed level table below.
namespace palette {

inline constexpr int kVersion = 1;
inline constexpr Rgb kFill{0, 0, 0};
inline constexpr Rgb kBackground{255, 255, 255};
inline constexpr Rgb kMark{0, 0, 0};

inline constexpr std::array<Rgb, 10> kLevels{{
    {31, 119, 180},
    {255, 127, 14},
    {44, 160, 44},
    {214, 39, 40},
    {148, 103, 189},
    {140, 86, 75},
    {227, 119, 194},
    {127, 127, 127},
    {188, 189, 34},
    {23, 190, 207},
}};

inline Rgb ramp(int index) {
  index = std::clamp(index, 0, 255);
  // Integer arithmetic keeps the table identical on every platform.
  auto ch = [&](int lo) { return static_cast<std::uint8_t>(255 - ((255 - lo) * index) / 255); };
  return {ch(55), ch(85), ch(195)};
}

inline int escape_index(std::uint64_t step, std::uint64_t max_iter) {
  if (max_iter == 0) return 0;
  const double t = std::log1p(double(step)) / std::log1p(double(max_iter));
  return std::clamp(static_cast<int>(std::floor(255.0 * t)), 0, 255);
}

inline Rgb escape_shade(std::uint64_t step, std::uint64_t max_iter) { return ramp(escape_index(step, max_iter)); }

inline Json to_json(Rgb c) { return Json::array({c.r, c.g, c.b}); }

}  // namespace palette

// Pixel (i, j) samples the point at its center:
//   x = cx - w/2 + (i + 1/2) w / W,   y = cy + h/2 - (j + 1/2) h / H.
inline Point pixel_center(const Window& win, const Resolution& res, int i, int j) {
  const double x = win.center.real() + ((i + 0.5) / res.width_px - 0.5) * win.width;
  const double y = win.center.imag() + (0.5 - (j + 0.5) / res.height_px) * win.height;
  return {x, y};
}

// Inverse mapping: i = floor(((x - cx)/w + 1/2) W), j = floor((1/2 - (y - cy)/h) H).
inline std::optional<std::pair<int, int>> pixel_of(const Window& win, const Resolution& res, Point z) {
  const double u = ((z.real() - win.center.real()) / win.width + 0.5) * res.width_px;
  const double v = (0.5 - (z.imag() - win.center.imag()) / win.height) * res.height_px;
  if (!(u >= 0.0 && u < res.width_px && v >= 0.0 && v < res.height_px)) return std::nullopt;
  return std::pair{static_cast<int>(std::floor(u)), static_cast<int>(std::floor(v))};
}

namespace detail {

inline Json base_meta(const char* figure, const std::string& theta, const Window& win, const Resolution& res,
                      Precision bits) {
  Json m;
  m["artifact"] = "siegel";
  m["version"] = SIEGEL_VERSION;
  m["figure"] = figure;
  m["theta"] = theta;
  m["window"] = {{"cx", win.center.real()}, {"cy", win.center.imag()}, {"width", win.width}, {"height", win.height}};
  m["resolution"] = {res.width_px, res.height_px};
  m["precision"] = bits;
  m["palette_version"] = palette::kVersion;
  return m;
}

inline unsigned worker_count(unsigned requested, int rows) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::clamp<unsigned>(t, 1, static_cast<unsigned>(std::max(rows, 1)));
}

}  // namespace detail

struct JuliaOptions {
  std::uint64_t max_iter = 10'000;
  double escape_radius = kDefaultEscapeRadius;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Escape time per pixel center in double precision. Rows are interleaved over
// threads; each pixel is a pure function of its coordinates, so the output
// does not depend on the thread count.
inline RasterImage render_filled_julia(const PolynomialParams& params, const Window& win, const Resolution& res,
                                       const JuliaOptions& opt = {}) {
  win.validate();
  res.validate();
  if (opt.max_iter < 1) throw DomainError("max_iter must be >= 1");
  if (!(opt.escape_radius >= 2.0)) throw DomainError("escape radius must be >= 2");
  RasterImage img(res.width_px, res.height_px, palette::kFill);
  const std::complex<double> rotation = params.rotation.to_std();
  std::vector<std::uint64_t> bounded_rows(res.height_px, 0);

  auto work = [&](unsigned t, unsigned nthreads) {
    for (int j = static_cast<int>(t); j < res.height_px; j += static_cast<int>(nthreads)) {
      for (int i = 0; i < res.width_px; ++i) {
        const EscapeResult e = escape_time(rotation, pixel_center(win, res, i, j), opt.max_iter, opt.escape_radius);
        if (e.escaped) {
          img.set(i, j, palette::escape_shade(e.step, opt.max_iter));
        } else {
          ++bounded_rows[j];
        }
      }
    }
  };
  const unsigned nthreads = detail::worker_count(opt.threads, res.height_px);
  if (nthreads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(work, t, nthreads);
  }

  std::uint64_t bounded = 0;
  for (auto b : bounded_rows) bounded += b;
  img.meta = detail::base_meta("filled-julia", params.label(), win, res, params.precision_bits);
  img.meta["max_iter"] = opt.max_iter;
  img.meta["escape_radius"] = opt.escape_radius;
  img.meta["bounded_pixels"] = bounded;
  img.meta["bounded_fraction"] = double(bounded) / (double(res.width_px) * res.height_px);
  return img;
}

namespace detail {

// Marks every point that lands in the window; returns the number of distinct
// marked pixels and fills `mask` when given.
inline std::uint64_t plot_points(RasterImage& img, const Window& win, const Resolution& res, std::span<const Point> pts,
                                 Rgb color, std::vector<std::uint8_t>* mask = nullptr, std::uint64_t* hits = nullptr) {
  std::vector<std::uint8_t> local;
  std::vector<std::uint8_t>& m = mask ? *mask : local;
  m.assign(std::size_t(res.width_px) * res.height_px, 0);
  std::uint64_t distinct = 0, in_window = 0;
  for (const Point& z : pts) {
    const auto px = pixel_of(win, res, z);
    if (!px) continue;
    ++in_window;
    img.set(px->first, px->second, color);
    auto& cell = m[std::size_t(px->second) * res.width_px + px->first];
    if (!cell) {
      cell = 1;
      ++distinct;
    }
  }
  if (hits) *hits = in_window;
  return distinct;
}

}  // namespace detail

inline std::vector<Point> sample_points(const OrbitRecord& orbit) {
  std::vector<Point> pts;
  pts.reserve(orbit.samples.size());
  for (const auto& s : orbit.samples) pts.push_back(s.z);
  return pts;
}

inline RasterImage render_boundary_orbit(const PolynomialParams& params, const OrbitRecord& orbit, const Window& win,
                                         const Resolution& res) {
  win.validate();
  res.validate();
  if (orbit.samples.empty()) throw DomainError("render_boundary_orbit: orbit has no samples");
  RasterImage img(res.width_px, res.height_px, palette::kBackground);
  const std::vector<Point> pts = sample_points(orbit);
  std::uint64_t hits = 0;
  const std::uint64_t marked = detail::plot_points(img, win, res, pts, palette::kMark, nullptr, &hits);
  img.meta = detail::base_meta("boundary", params.label(), win, res, orbit.precision_bits);
  img.meta["max_index"] = orbit.max_index;
  img.meta["stride"] = orbit.stride;
  img.meta["samples"] = pts.size();
  img.meta["samples_in_window"] = hits;
  img.meta["marked_pixels"] = marked;
  return img;
}

// Circular extent of a set of angles in (-pi, pi]: 2 pi minus the largest gap
// between cyclically consecutive angles.
struct AngleSpread {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double largest_gap = 2.0 * std::numbers::pi;
  double occupied = 0.0;
};

inline AngleSpread angle_spread(std::vector<double> angles) {
  AngleSpread out;
  out.count = angles.size();
  if (angles.empty()) return out;
  std::sort(angles.begin(), angles.end());
  out.min = angles.front();
  out.max = angles.back();
  double gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) gap = std::max(gap, angles[i] - angles[i - 1]);
  out.largest_gap = gap;
  out.occupied = 2.0 * std::numbers::pi - gap;
  return out;
}

// chi(z) = log(z - omega) on the principal branch, Im chi in (-pi, pi].
inline std::optional<Point> log_chart(Point z, Point origin) {
  const Point u = z - origin;
  if (u == Point(0.0, 0.0)) return std::nullopt;
  double im = std::arg(u);
  if (im <= -std::numbers::pi) im = std::numbers::pi;
  return Point(std::log(std::abs(u)), im);
}

// Im chi spread of the samples with 0 < |z - omega| <= radius.
inline AngleSpread log_chart_spread(std::span<const OrbitSample> samples, Point origin, double radius) {
  std::vector<double> angles;
  for (const auto& s : samples) {
    if (std::abs(s.z - origin) > radius) continue;
    if (auto c = log_chart(s.z, origin)) angles.push_back(c->imag());
  }
  return angle_spread(std::move(angles));
}

inline Json to_json(const AngleSpread& a) {
  return {{"count", a.count},     {"im_min", a.min},        {"im_max", a.max},
          {"largest_gap", a.largest_gap}, {"occupied", a.occupied}, {"margin", 2.0 * std::numbers::pi - a.occupied}};
}

inline RasterImage render_log_chart(const PolynomialParams& params, const OrbitRecord& orbit, const Window& band,
                                    const Resolution& res) {
  band.validate();
  res.validate();
  RasterImage img(res.width_px, res.height_px, palette::kBackground);
  const Point origin = params.critical_point.to_std();
  std::vector<Point> chart;
  std::vector<double> plotted_im;
  std::uint64_t skipped = 0;
  for (const auto& s : orbit.samples) {
    const auto c = log_chart(s.z, origin);
    if (!c) {
      ++skipped;
      continue;
    }
    chart.push_back(*c);
    if (pixel_of(band, res, *c)) plotted_im.push_back(c->imag());
  }
  std::uint64_t hits = 0;
  const std::uint64_t marked = detail::plot_points(img, band, res, chart, palette::kMark, nullptr, &hits);
  img.meta = detail::base_meta("log-chart", params.label(), band, res, orbit.precision_bits);
  img.meta["max_index"] = orbit.max_index;
  img.meta["stride"] = orbit.stride;
  img.meta["skipped_at_origin"] = skipped;
  img.meta["samples_in_window"] = hits;
  img.meta["marked_pixels"] = marked;
  img.meta["im_chi_spread"] = to_json(angle_spread(std::move(plotted_im)));
  return img;
}

inline double jaccard(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::uint64_t both = 0, either = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    both += a[i] && b[i];
    either += a[i] || b[i];
  }
  return either ? double(both) / double(either) : 1.0;
}

// Levels are drawn in order, so later levels cover earlier ones where they
// coincide. Per-level pixel sets are recorded independently of the drawing.
inline RasterImage render_blowup_overlay(std::span<const PointCloud> clouds, const Window& win, const Resolution& res,
                                         const std::string& theta = {}, Precision bits = kDefaultPrecisionBits) {
  win.validate();
  res.validate();
  if (clouds.empty()) throw DomainError("render_blowup_overlay needs at least one cloud");
  if (clouds.size() > palette::kLevels.size())
    throw DomainError("render_blowup_overlay supports at most " + std::to_string(palette::kLevels.size()) + " levels");
  RasterImage img(res.width_px, res.height_px, palette::kBackground);
  std::vector<std::vector<std::uint8_t>> masks(clouds.size());
  Json legend = Json::array();
  for (std::size_t l = 0; l < clouds.size(); ++l) {
    const std::uint64_t marked = detail::plot_points(img, win, res, clouds[l].points, palette::kLevels[l], &masks[l]);
    legend.push_back({{"level", clouds[l].level},
                      {"palette_index", l},
                      {"color", palette::to_json(palette::kLevels[l])},
                      {"marked_pixels", marked}});
  }
  Json overlaps = Json::array();
  for (std::size_t l = 1; l < clouds.size(); ++l) overlaps.push_back(jaccard(masks[l - 1], masks[l]));
  img.meta = detail::base_meta("blowup-overlay", theta, win, res, bits);
  img.meta["legend"] = std::move(legend);
  img.meta["jaccard_consecutive"] = std::move(overlaps);
  return img;
}

// P6 with one comment line holding the metadata as compact ASCII JSON.
inline std::string encode_ppm(const RasterImage& img) {
  std::string out = "P6\n# " + img.meta.dump(-1, ' ', true) + "\n";
  out += std::to_string(img.width_px) + " " + std::to_string(img.height_px) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

inline RasterImage decode_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  auto fail = [](const char* what) -> RasterImage { throw Error(std::string("ppm: ") + what); };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) return -1;
    return std::stol(bytes.substr(start, pos - start));
  };
  if (bytes.compare(0, 2, "P6") != 0) return fail("missing P6 magic");
  pos = 2;
  Json meta = Json::object();
  const std::size_t comment = bytes.find("\n# ", pos);
  if (comment == pos) {
    const std::size_t end = bytes.find('\n', comment + 1);
    if (end == std::string::npos) return fail("unterminated comment");
    meta = Json::parse(bytes.substr(comment + 3, end - comment - 3));
  }
  const long w = read_int(), h = read_int(), maxval = read_int();
  if (w < 1 || h < 1 || maxval != 255) return fail("bad header");
  ++pos;
  const std::size_t n = std::size_t(w) * h * 3;
  if (bytes.size() < pos + n) return fail("truncated pixel data");
  RasterImage img;
  img.width_px = static_cast<int>(w);
  img.height_px = static_cast<int>(h);
  img.pixels.assign(bytes.begin() + pos, bytes.begin() + pos + n);
  img.meta = std::move(meta);
  return img;
}

// Writes to a sibling temporary file, then renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

inline void write_ppm(const std::filesystem::path& path, const RasterImage& img) {
  write_file_atomic(path, encode_ppm(img));
}

}  // namespace siegel
