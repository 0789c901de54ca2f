#include <gtest/gtest.h>

#include "siegel/analysis.hpp"

using namespace siegel;

TEST(Sweep, ThresholdBetween23And24) {
  const SweepResult s = sweep(1, 24);
  ASSERT_EQ(s.rows.size(), 24u);
  for (const auto& r : s.rows) EXPECT_EQ(r.triangle.value, r.a <= 23 ? Tri::yes : Tri::no) << r.a;
  ASSERT_TRUE(s.flip_after.has_value());
  EXPECT_EQ(*s.flip_after, 23);
  for (std::size_t i = 1; i < s.rows.size(); ++i) EXPECT_EQ(s.rows[i].a, s.rows[i - 1].a + 1);
  EXPECT_EQ(s.rows[22].alpha_surd, "(-23 + sqrt(533))/2");
  EXPECT_EQ(s.rows[23].alpha_surd, "(-12 + sqrt(145))");
}

TEST(Sweep, SingleRows) {
  const SweepResult one = sweep(1, 1);
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_NEAR(std::stod(one.rows[0].M), 3.264251306, 1e-8);
  EXPECT_FALSE(one.flip_after.has_value());
  const SweepResult t23 = sweep(23, 23);
  EXPECT_NEAR(std::stod(t23.rows[0].M), 0.5006714845, 1e-8);
  EXPECT_EQ(t23.rows[0].triangle.value, Tri::yes);
}

TEST(Sweep, VerdictFlipsAtMostOnce) {
  const SweepResult s = sweep(1, 80, 128);
  int flips = 0;
  for (std::size_t i = 1; i < s.rows.size(); ++i) flips += s.rows[i].triangle.value != s.rows[i - 1].triangle.value;
  EXPECT_EQ(flips, 1);
}

TEST(Sweep, RejectsBadRange) {
  EXPECT_THROW(sweep(0, 3), ConfigError);
  EXPECT_THROW(sweep(5, 3), ConfigError);
}

TEST(Sweep, JsonAndTable) {
  const SweepResult s = sweep(22, 25);
  const auto j = sweep_json(s, 256);
  EXPECT_EQ(j["rows"].size(), 4u);
  EXPECT_EQ(j["flip_after"], 23);
  EXPECT_EQ(j["rows"][1]["triangle_ok"]["value"], "true");
  EXPECT_EQ(j["rows"][2]["triangle_ok"]["value"], "false");
  const std::string table = sweep_table(s);
  EXPECT_NE(table.find("flips between a=23 and a=24"), std::string::npos);
}

TEST(Analysis, ConfigValidation) {
  AnalysisConfig cfg;
  cfg.theta_cf = "[;1]";
  cfg.precision_bits = 40;
  EXPECT_THROW(run_analysis(cfg), ConfigError);
  cfg.precision_bits = 128;
  cfg.max_q = 1;
  EXPECT_THROW(run_analysis(cfg), ConfigError);
  cfg.max_q = 1000;
  cfg.lambda_levels = 2;
  EXPECT_THROW(run_analysis(cfg), ConfigError);
  cfg.theta_cf = "[;x]";
  EXPECT_THROW(run_analysis(cfg), CfParseError);
}

TEST(Analysis, SmallGoldenRun) {
  AnalysisConfig cfg;
  cfg.theta_cf = "[1;1]";
  cfg.precision_bits = 128;
  cfg.max_q = 20000;
  cfg.decay_levels = 0;
  const AnalysisResult r = run_analysis(cfg);
  EXPECT_EQ(r.theta, "[;1]");
  EXPECT_TRUE(r.orbit.records_match_convergents);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.bound.value, Tri::yes);
  EXPECT_EQ(r.torus.value, Tri::yes);
  EXPECT_EQ(r.triangle.value, Tri::yes);
  EXPECT_EQ(r.spiral.value, Spiral::not_applicable);
  EXPECT_TRUE(r.ladder_reliable);
  EXPECT_TRUE(r.precision_stability.stable);
  EXPECT_TRUE(r.level_stability.stable);
  const auto& rep = r.report;
  EXPECT_EQ(rep["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(rep["status"], "complete");
  EXPECT_EQ(rep["verdicts"]["bound_ok"]["value"], "true");
  EXPECT_EQ(rep["decay"]["status"], "skipped");
  EXPECT_TRUE(rep["M"].is_string());
  EXPECT_EQ(rep["M"].get<std::string>().substr(0, 12), "3.2642513026");
  EXPECT_EQ(rep["lambda_levels"].size(), r.lambda->levels.size());
}

TEST(Analysis, NonConvergenceIsReportedNotThrown) {
  AnalysisConfig cfg;
  cfg.theta_cf = "[;2]";
  cfg.precision_bits = 128;
  cfg.max_q = 200;
  cfg.precision_ladder = false;
  const AnalysisResult r = run_analysis(cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.bound.value, Tri::inconclusive);
  EXPECT_EQ(r.torus.value, Tri::inconclusive);
  EXPECT_EQ(r.triangle.value, Tri::yes);
  EXPECT_EQ(r.report["status"], "non-convergence");
  EXPECT_EQ(r.report["decay"]["status"], "skipped-non-convergence");
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Analysis, TooFewLevelsIsNonConvergence) {
  AnalysisConfig cfg;
  cfg.theta_cf = "[;3]";
  cfg.precision_bits = 128;
  cfg.max_q = 12;  // q = 3, 10: a single level
  cfg.precision_ladder = false;
  const AnalysisResult r = run_analysis(cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.lambda.has_value());
  EXPECT_TRUE(r.report["lambda_est"].is_null());
}

TEST(Analysis, ConvergentsThroughCap) {
  const auto theta = parse_cf({}, {1});
  const auto convs = convergents_through(theta, 100);
  EXPECT_EQ(convs.back().q, 144);
  EXPECT_EQ(convs[convs.size() - 2].q, 89);
}
