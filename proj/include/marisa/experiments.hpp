// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/config.hpp"
#include "marisa/driver.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace marisa {

// One channel draw, reproducible from (config, seed, trial) alone. `rng` is
// the stream state right after sampling; optimizer runs start from a copy.
struct Scenario {
  SystemConfig config;
  std::uint64_t seed = 1;
  int trial = 0;
  ChannelRealization realization;
  Rng rng;
};

Scenario make_scenario(const SystemConfig& c, std::uint64_t seed, int trial);

enum class Scheme { MaRis, Fpa };
std::string to_string(Scheme s);  // "MA-RIS", "FPA"
Scheme scheme_from_string(const std::string& s);

struct SweepSpec {
  std::string name;
  std::string param;  // N, L, P_t, L_p or rho
  std::vector<double> values;
  int trials = 20;
  std::vector<Scheme> schemes{Scheme::MaRis, Scheme::Fpa};

  // Throws ConfigError.
  void validate() const;
};

// Desk-scale sweep for a parameter name (N, L, P_t, L_p, rho).
SweepSpec default_sweep(const std::string& param);
// {"name", "param", "values", "trials", "schemes"}; missing keys take the
// defaults of default_sweep(param).
SweepSpec sweep_from_json(const nlohmann::json& j);
nlohmann::json sweep_to_json(const SweepSpec& s);

// Copy of c with the swept parameter set. P_t is in watts.
SystemConfig with_param(const SystemConfig& c, const std::string& param, double value);

struct TrialRecord {
  std::string param;
  double value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::MaRis;
  bool ok = false;
  bool infeasible = false;  // failed with InfeasibleScenario
  std::string error;
  double sum_rate = 0.0;
  int iterations = 0;
  bool converged = false;
  double wallclock_ms = 0.0;
  AOTrace trace;
};

// Runs one scheme on the scenario; never throws for optimization failures.
TrialRecord run_trial(const Scenario& s, Scheme scheme);

struct CellSummary {
  std::string param;
  double value = 0.0;
  Scheme scheme = Scheme::MaRis;
  int trials = 0;
  int failures = 0;
  double mean = 0.0;    // over successful trials
  double stddev = 0.0;  // sample standard deviation
  bool flagged = false; // more than 20% of trials failed
};

struct SweepResult {
  SweepSpec spec;
  std::uint64_t seed = 1;
  std::vector<TrialRecord> records;  // value-major, then trial, then scheme
  std::vector<CellSummary> cells;
};

struct SweepOptions {
  int jobs = 1;
  // Called after each (value, trial) job finishes, from the worker thread.
  std::function<void(const TrialRecord&)> progress;
};

// Every (value, trial) pair draws one scenario from make_rng(seed, trial) and
// runs all requested schemes on it. Failures are recorded, not thrown.
SweepResult run_sweep(const SweepSpec& spec, const SystemConfig& base, std::uint64_t seed,
                      const SweepOptions& options = {});

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records);

// Wall-clock columns are zeroed when `wallclock` is false so that identical
// inputs give identical files.
std::string cells_csv(const SweepResult& r, bool wallclock = true);
std::string summary_csv(const SweepResult& r);

// Writes cells.csv, summary.csv, meta.json and one trace CSV per trial
// (traces/<scheme>_<param>=<value>/trace_<trial>.csv) under dir.
void write_sweep(const SweepResult& r, const SystemConfig& base, const std::filesystem::path& dir,
                 bool wallclock = true);

// results/<name>/<UTC timestamp>
std::filesystem::path timestamped_dir(const std::filesystem::path& root, const std::string& name);

// Git revision baked in at configure time ("unknown" outside a checkout).
std::string build_revision();

// Median of all stage-2 subproblem solve times recorded in the traces of the
// successful trials at the given parameter value and scheme. NaN if none.
double stage2_median_ms(const SweepResult& r, double value, Scheme scheme = Scheme::MaRis);

// Means over the trials that succeeded at every value of the sweep for the
// scheme (paired seeds), in value order. `paired_trials` receives the count.
std::vector<double> paired_means(const SweepResult& r, Scheme scheme, int* paired_trials = nullptr);

}  // namespace marisa
