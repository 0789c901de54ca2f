// siegel: analyze an angle end to end, sweep the [;a] family, render figures.
//
// Exit codes: 0 success (including inconclusive verdicts), 1 other failure,
// 2 parse or configuration error, 3 precision exhaustion, 4 non-convergence
// (the partial report is still written), 5 output not writable.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "siegel/analysis.hpp"
#include "siegel/png.hpp"
#include "siegel/render.hpp"

namespace fs = std::filesystem;
using namespace siegel;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kPrecision = 3, kNonConvergence = 4, kUnwritable = 5 };

Window parse_window(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw ConfigError("");
    } catch (const std::exception&) {
      throw ConfigError("--window expects cx,cy,w,h; bad number '" + item + "'");
    }
  }
  if (v.size() != 4) throw ConfigError("--window expects four comma-separated numbers cx,cy,w,h");
  Window w{{v[0], v[1]}, v[2], v[3]};
  try {
    w.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("--window: ") + e.what());
  }
  return w;
}

Resolution parse_resolution(const std::string& text) {
  int w = 0, h = 0;
  char x = 0, extra = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || (x != 'x' && x != 'X'))
    throw ConfigError("--res expects WxH, got '" + text + "'");
  Resolution r{w, h};
  try {
    r.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("--res: ") + e.what());
  }
  return r;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  write_file_atomic(path, text);
}

struct AnalyzeOpts {
  AnalysisConfig cfg;
  std::string out_dir = ".";
  bool no_ladder = false;
};

int cmd_analyze(AnalyzeOpts& o) {
  o.cfg.precision_ladder = !o.no_ladder;
  const AnalysisResult r = run_analysis(o.cfg);
  const fs::path dir(o.out_dir);
  ensure_dir(dir);
  write_text(dir / "report.json", r.report.dump(2) + "\n");

  std::printf("theta      %s  (N=%zu, s=%zu)\n", r.theta.c_str(), r.N, r.s);
  std::printf("alpha      %s\n", r.alpha.to_string(20).c_str());
  std::printf("M          %s\n", r.M.to_string(20).c_str());
  if (r.lambda) {
    std::printf("lambda     %s %+.*e i  |lambda| = %s\n", r.lambda->estimate.re().to_string(15).c_str(), 14,
                r.lambda->estimate.im().to_double(), abs(r.lambda->estimate).to_string(15).c_str());
    std::printf("lambda_err %.3e over %zu levels\n", r.lambda->err, r.lambda->levels.size());
  }
  std::printf("triangle   %s\nbound      %s\ntorus      %s\nspiral     %s\n", to_string(r.triangle.value),
              to_string(r.bound.value), to_string(r.torus.value), to_string(r.spiral.value));
  if (r.decay)
    std::printf("decay      %s (slope %.4f, residual %.4f)\n", to_string(r.decay->decay_ok.value), r.decay->slope,
                r.decay->residual);
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("report     %s\n", (dir / "report.json").string().c_str());
  return r.converged ? kOk : kNonConvergence;
}

struct SweepOpts {
  std::int64_t a_min = 1;
  std::int64_t a_max = 1;
  Precision bits = kDefaultPrecisionBits;
  std::string json_path;
};

int cmd_sweep(const SweepOpts& o) {
  if (o.bits < kMinPrecisionBits) throw ConfigError("precision must be at least 53 bits");
  const SweepResult s = sweep(o.a_min, o.a_max, o.bits);
  std::fputs(sweep_table(s).c_str(), stdout);
  if (!o.json_path.empty()) write_text(o.json_path, sweep_json(s, o.bits).dump(2) + "\n");
  return kOk;
}

struct RenderOpts {
  std::string cf;
  std::string figure;
  std::string window;
  std::string res;
  std::uint64_t max_iter = 10'000;
  std::uint64_t max_q = 200'000;
  int levels = 4;
  Precision bits = kDefaultPrecisionBits;
  unsigned threads = 0;
  std::string out;
  bool png = false;
};

Window default_window(const std::string& figure, const PolynomialParams& params) {
  const Point w = params.critical_point.to_std();
  if (figure == "log-chart") return {{-4.0, 0.0}, 8.0, 2.0 * std::numbers::pi};
  if (figure == "blowup-overlay") return {w, 1.0, 1.0};
  if (figure == "boundary") return {w, 2.0, 2.0};
  return {{0.0, 0.0}, 3.2, 3.2};
}

int cmd_render(const RenderOpts& o) {
  const QuadraticIrrational theta = parse_cf_text(o.cf);
  const Resolution res = parse_resolution(o.res);
  if (o.bits < kMinPrecisionBits) throw ConfigError("precision must be at least 53 bits");
  if (o.max_iter < 1) throw ConfigError("--max-iter must be >= 1");
  if (o.max_q < 1) throw ConfigError("--max-q must be >= 1");
  const PolynomialParams params = make_params(theta, o.bits);
  const Window win = o.window.empty() ? default_window(o.figure, params) : parse_window(o.window);

  RasterImage img;
  if (o.figure == "filled-julia") {
    img = render_filled_julia(params, win, res, {o.max_iter, kDefaultEscapeRadius, o.threads});
  } else if (o.figure == "boundary" || o.figure == "log-chart") {
    const OrbitRecord orbit = orbit_for(theta, o.bits, o.max_q);
    img = o.figure == "boundary" ? render_boundary_orbit(params, orbit, win, res)
                                 : render_log_chart(params, orbit, win, res);
    img.meta["max_q"] = o.max_q;
  } else if (o.figure == "blowup-overlay") {
    if (o.levels < 1 || o.levels > static_cast<int>(palette::kLevels.size()))
      throw ConfigError("--levels must be between 1 and " + std::to_string(palette::kLevels.size()));
    const OrbitRecord orbit = orbit_for(theta, o.bits, o.max_q);
    const std::size_t s = theta.period_length(), N = theta.first_periodic_index();
    const LambdaEstimate est = estimate_lambda(orbit, s, N, available_levels(orbit, s, N));
    std::vector<PointCloud> clouds{{sample_points(orbit), orbit.origin, 0}};
    for (int l = 1; l < o.levels; ++l) clouds.push_back(blow_up(clouds.back(), est.estimate.to_std(), s, 1));
    img = render_blowup_overlay(clouds, win, res, theta.to_string(), o.bits);
    img.meta["max_q"] = o.max_q;
    img.meta["lambda"] = complex_json(est.estimate);
    img.meta["lambda_err"] = decimal(est.err);
  } else {
    throw ConfigError("unknown figure '" + o.figure + "'");
  }

  const fs::path out = o.out.empty() ? fs::path(o.figure + ".ppm") : fs::path(o.out);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  write_ppm(out, img);
  std::printf("wrote %s (%dx%d)\n", out.string().c_str(), img.width_px, img.height_px);
  if (o.png) {
    fs::path png_path = out;
    png_path.replace_extension(".png");
    write_png(png_path, img);
    std::printf("wrote %s\n", png_path.string().c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-similarity of Siegel disks of e^{2 i pi theta} z + z^2", "siegel"};
  app.set_version_flag("--version", std::string(SIEGEL_VERSION));
  app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");
  app.require_subcommand(1);

  AnalyzeOpts an;
  auto* analyze = app.add_subcommand("analyze", "Estimate lambda and evaluate the verdicts for one angle");
  analyze->add_option("cf", an.cfg.theta_cf, "Continued fraction, e.g. \"[;1]\" or \"[1,2;3]\"")->required();
  analyze->add_option("--precision", an.cfg.precision_bits, "Working precision in bits")->capture_default_str();
  analyze->add_option("--max-q", an.cfg.max_q, "Largest orbit index (q_n cap)")->capture_default_str();
  analyze->add_option("--levels", an.cfg.lambda_levels, "Lambda levels (0: all available)")->capture_default_str();
  analyze->add_option("--decay-levels", an.cfg.decay_levels, "Blow-up levels for the decay fit (0: skip)")
      ->capture_default_str();
  analyze->add_option("--tolerance", an.cfg.lambda_tolerance, "Convergence tolerance for lambda_err")
      ->capture_default_str();
  analyze->add_option("--spiral-tolerance", an.cfg.spiral_tolerance, "Spiral test tolerance on arg lambda (rad)")
      ->capture_default_str();
  analyze->add_flag("--no-ladder", an.no_ladder, "Skip the +64-bit rerun");
  analyze->add_option("--threads", an.cfg.threads, "Worker threads (0: all cores)");
  analyze->add_option("--out", an.out_dir, "Directory for report.json")->capture_default_str();

  SweepOpts sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Modulus and triangle verdict for theta = [;a], a_min <= a <= a_max");
  sweep_cmd->add_option("a_min", sw.a_min)->required();
  sweep_cmd->add_option("a_max", sw.a_max)->required();
  sweep_cmd->add_option("--precision", sw.bits, "Working precision in bits")->capture_default_str();
  sweep_cmd->add_option("--json", sw.json_path, "Also write the rows as JSON");

  RenderOpts rd;
  auto* render = app.add_subcommand("render", "Render a figure to binary PPM");
  render->add_option("cf", rd.cf, "Continued fraction")->required();
  render->add_option("--figure", rd.figure, "Figure kind")
      ->required()
      ->check(CLI::IsMember({"filled-julia", "boundary", "log-chart", "blowup-overlay"}));
  render->add_option("--window", rd.window,
                     "cx,cy,w,h (log-chart: in (log|z-omega|, arg) coordinates); default depends on --figure");
  render->add_option("--res", rd.res, "WxH in pixels")->required();
  render->add_option("--max-iter", rd.max_iter, "Escape-time iterations")->capture_default_str();
  render->add_option("--max-q", rd.max_q, "Critical orbit length for orbit figures")->capture_default_str();
  render->add_option("--levels", rd.levels, "Blow-up levels drawn by blowup-overlay")->capture_default_str();
  render->add_option("--precision", rd.bits, "Working precision in bits")->capture_default_str();
  render->add_option("--threads", rd.threads, "Worker threads (0: all cores); output does not depend on it");
  render->add_option("--out", rd.out, "Output .ppm path (default <figure>.ppm)");
  render->add_flag("--png", rd.png, "Also write a PNG next to the PPM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*analyze) return cmd_analyze(an);
    if (*sweep_cmd) return cmd_sweep(sw);
    if (*render) return cmd_render(rd);
  } catch (const CfParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const InvalidDigitError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const NotQuadraticError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const PrecisionExhaustedError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kPrecision;
  } catch (const InsufficientPrecisionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kPrecision;
  } catch (const TooFewLevelsError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNonConvergence;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUnwritable;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
