// SPDX-License-Identifier: Apache-2.0
#include "marisa/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace marisa;

namespace {

SystemConfig quick_config() {
  SystemConfig c;
  c.chi_max = 2;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TrialRecord record(double value, int trial, Scheme s, bool ok, double rate) {
  TrialRecord r;
  r.param = "N";
  r.value = value;
  r.trial = trial;
  r.scheme = s;
  r.ok = ok;
  r.sum_rate = rate;
  return r;
}

}  // namespace

TEST(Scenario, ReproducibleFromSeedAndTrial) {
  const SystemConfig c;
  const Scenario a = make_scenario(c, 7, 3), b = make_scenario(c, 7, 3), d = make_scenario(c, 7, 4);
  EXPECT_EQ(realization_to_json(a.realization).dump(), realization_to_json(b.realization).dump());
  EXPECT_NE(realization_to_json(a.realization).dump(), realization_to_json(d.realization).dump());
  Rng ra = a.rng, rb = b.rng;
  EXPECT_EQ(ra(), rb());
}

TEST(SweepSpec, ParametersAndValidation) {
  const SystemConfig c;
  EXPECT_EQ(with_param(c, "N", 16).N, 16);
  EXPECT_EQ(with_param(c, "L", 6).L, 6);
  EXPECT_EQ(with_param(c, "P_t", 25).P_t, 25.0);
  EXPECT_EQ(with_param(c, "rho", 0.05).rho, 0.05);
  const SystemConfig lp = with_param(c, "L_p", 2);
  EXPECT_EQ(lp.L_t, 2);
  EXPECT_EQ(lp.L_r, 2);
  EXPECT_THROW(with_param(c, "N", 8.5), ConfigError);
  EXPECT_THROW(with_param(c, "sigma2", 1.0), ConfigError);
  EXPECT_THROW(default_sweep("bogus"), ConfigError);

  const SweepSpec s = sweep_from_json({{"param", "N"}, {"trials", 3}, {"schemes", {"FPA"}}});
  EXPECT_EQ(s.values, (std::vector<double>{8, 16, 32}));
  EXPECT_EQ(s.trials, 3);
  ASSERT_EQ(s.schemes.size(), 1u);
  EXPECT_EQ(s.schemes[0], Scheme::Fpa);
  EXPECT_EQ(sweep_from_json(sweep_to_json(s)).values, s.values);
  EXPECT_THROW(sweep_from_json({{"param", "N"}, {"values", nlohmann::json::array()}}), ConfigError);
  EXPECT_THROW(sweep_from_json({{"param", "N"}, {"trials", 0}}), ConfigError);
  EXPECT_THROW(sweep_from_json({{"param", "N"}, {"colour", 1}}), ConfigError);
  EXPECT_THROW(sweep_from_json({{"param", "N"}, {"schemes", {"MA"}}}), ConfigError);
}

TEST(Summarize, MeanStdAndFlagging) {
  std::vector<TrialRecord> recs;
  // 10 trials, 2 failures: not flagged (exactly 20%).
  for (int t = 0; t < 10; ++t) recs.push_back(record(8, t, Scheme::MaRis, t >= 2, t));
  // 10 trials, 3 failures: flagged.
  for (int t = 0; t < 10; ++t) recs.push_back(record(16, t, Scheme::MaRis, t >= 3, 1.0));
  const auto cells = summarize(recs);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].failures, 2);
  EXPECT_FALSE(cells[0].flagged);
  EXPECT_DOUBLE_EQ(cells[0].mean, 5.5);  // 2..9
  EXPECT_NEAR(cells[0].stddev, std::sqrt(6.0), 1e-12);
  EXPECT_TRUE(cells[1].flagged);
  EXPECT_EQ(cells[1].stddev, 0.0);
}

TEST(Summarize, PairedMeansAndStageTimes) {
  SweepResult r;
  r.spec = default_sweep("N");
  r.spec.values = {8, 16};
  r.spec.trials = 3;
  r.records = {record(8, 0, Scheme::MaRis, true, 1), record(8, 1, Scheme::MaRis, true, 2),
               record(8, 2, Scheme::MaRis, true, 3), record(16, 0, Scheme::MaRis, true, 4),
               record(16, 1, Scheme::MaRis, false, 0), record(16, 2, Scheme::MaRis, true, 6)};
  AOIteration it;
  it.p6_solve_ms = {3.0, 1.0, 2.0};
  r.records[0].trace.iterations.push_back(it);
  it.p6_solve_ms = {10.0};
  r.records[1].trace.iterations.push_back(it);
  int n = 0;
  const auto means = paired_means(r, Scheme::MaRis, &n);
  EXPECT_EQ(n, 2);  // trial 1 failed at N = 16
  EXPECT_DOUBLE_EQ(means[0], 2.0);
  EXPECT_DOUBLE_EQ(means[1], 5.0);
  EXPECT_DOUBLE_EQ(stage2_median_ms(r, 8), 2.5);
  EXPECT_TRUE(std::isnan(stage2_median_ms(r, 16)));
}

TEST(RunSweep, SingleCellGivesOneRow) {
  SweepSpec s = default_sweep("N");
  s.values = {8};
  s.trials = 1;
  s.schemes = {Scheme::MaRis};
  const SweepResult r = run_sweep(s, quick_config(), 1);
  ASSERT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_TRUE(r.records[0].ok) << r.records[0].error;
  const std::string csv = cells_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "param,value,trial,seed,scheme,sum_rate,iterations,wallclock_ms,status");
}

TEST(RunSweep, FpaUsesSameRealizationWithStageThreeOff) {
  SystemConfig c = quick_config();
  const Scenario s = make_scenario(c, 3, 0);
  const TrialRecord fpa = run_trial(s, Scheme::Fpa);
  ASSERT_TRUE(fpa.ok) << fpa.error;
  Scenario off = s;
  off.config.enable_positions = false;
  const TrialRecord direct = run_trial(off, Scheme::MaRis);
  ASSERT_TRUE(direct.ok);
  EXPECT_EQ(fpa.sum_rate, direct.sum_rate);
  EXPECT_EQ(fpa.trace.to_csv(false), direct.trace.to_csv(false));
}

TEST(RunSweep, NoRoomToMoveMatchesFpa) {
  SystemConfig c = quick_config();
  c.L = 1;
  c.A = 1e-9;
  const Scenario s = make_scenario(c, 2, 0);
  const TrialRecord ma = run_trial(s, Scheme::MaRis), fpa = run_trial(s, Scheme::Fpa);
  ASSERT_TRUE(ma.ok && fpa.ok) << ma.error << fpa.error;
  EXPECT_NEAR(ma.sum_rate, fpa.sum_rate, 1e-6);
}

TEST(RunSweep, BitExactAcrossRunsAndJobCounts) {
  SweepSpec s = default_sweep("P_t");
  s.values = {5, 15};
  s.trials = 2;
  SystemConfig c = quick_config();
  c.chi_max = 1;
  const SweepResult a = run_sweep(s, c, 11);
  SweepOptions par;
  par.jobs = 3;
  const SweepResult b = run_sweep(s, c, 11, par);
  EXPECT_EQ(cells_csv(a, false), cells_csv(b, false));
  EXPECT_EQ(summary_csv(a), summary_csv(b));
  ASSERT_EQ(a.records.size(), 8u);
  for (std::size_t i = 0; i < a.records.size(); ++i)
    EXPECT_EQ(a.records[i].trace.to_csv(false), b.records[i].trace.to_csv(false));
}

TEST(RunSweep, FailuresAreRecordedAndFlagged) {
  SweepSpec s = default_sweep("N");
  s.values = {8};
  s.trials = 2;
  SystemConfig c = quick_config();
  c.R_min = 1e3;
  const SweepResult r = run_sweep(s, c, 1);
  ASSERT_EQ(r.records.size(), 4u);
  for (const auto& x : r.records) {
    EXPECT_FALSE(x.ok);
    EXPECT_TRUE(x.infeasible);
  }
  for (const auto& cell : r.cells) {
    EXPECT_TRUE(cell.flagged);
    EXPECT_TRUE(std::isnan(cell.mean));
  }
  EXPECT_NE(cells_csv(r).find("infeasible"), std::string::npos);
}

TEST(WriteSweep, FilesAndMeta) {
  SweepSpec s = default_sweep("rho");
  s.values = {0.01};
  s.trials = 2;
  s.schemes = {Scheme::Fpa};
  SystemConfig c = quick_config();
  c.chi_max = 1;
  const SweepResult r = run_sweep(s, c, 5);
  const auto dir = std::filesystem::temp_directory_path() / "marisa_test_write_sweep";
  std::filesystem::remove_all(dir);
  write_sweep(r, c, dir, false);
  EXPECT_EQ(slurp(dir / "cells.csv"), cells_csv(r, false));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "traces" / "FPA_rho=0.01" / "trace_0.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "traces" / "FPA_rho=0.01" / "trace_1.csv"));
  const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
  EXPECT_EQ(meta["seed"], 5);
  EXPECT_EQ(meta["sweep"]["param"], "rho");
  EXPECT_EQ(config_from_json(meta["config"]).chi_max, 1);
  EXPECT_FALSE(meta["git_revision"].get<std::string>().empty());
  std::filesystem::remove_all(dir);

  const auto ts = timestamped_dir("results", "rho");
  EXPECT_EQ(ts.parent_path(), std::filesystem::path("results") / "rho");
}
