// SPDX-License-Identifier: Apache-2.0
// marisa: single runs, sweeps, validation suites and the standalone SDP solver.
//
// Exit codes: 0 success, 1 error (bad input, I/O), 2 infeasible scenario,
// 3 validation failed.

#include "marisa/config.hpp"
#include "marisa/conic_solver.hpp"
#include "marisa/driver.hpp"
#include "marisa/experiments.hpp"
#include "marisa/sdp_json.hpp"
#include "marisa/validation.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace marisa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitValidationFailed = 3;

SystemConfig load_or_default(const std::string& path) {
  if (path.empty()) return SystemConfig{};
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  return load_config(path);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

nlohmann::json read_json(const std::string& path) {
  if (path == "-") return nlohmann::json::parse(std::cin);
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(f);
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  int trial = 0;
  std::string out;
  bool no_ma = false;
};

int cmd_run(const RunArgs& a) {
  SystemConfig c = load_or_default(a.config);
  const std::uint64_t seed = a.seed.value_or(c.seed);
  const fs::path dir = a.out.empty() ? timestamped_dir("results", "run") : fs::path(a.out);
  const Scenario s = make_scenario(c, seed, a.trial);
  if (a.no_ma) c.enable_positions = false;
  Rng rng = s.rng;
  std::cout << "scenario seed " << seed << " trial " << a.trial << " (" << (a.no_ma ? "FPA" : "MA-RIS") << ")\n";
  const AOResult res = optimize(s.realization, c, rng, [](const AOIteration& it) {
    std::cout << "  iteration " << it.iteration << ": worst-case sum rate " << it.sum_rate << " bps/Hz"
              << (it.feasible ? "" : " (QoS not met)") << "\n";
  });
  fs::create_directories(dir);
  write_text(dir / "trace.csv", res.trace.to_csv());
  write_text(dir / "trace.json", res.trace.to_json().dump(2) + "\n");
  nlohmann::json sol = solution_to_json(res);
  sol["seed"] = seed;
  sol["trial"] = a.trial;
  sol["scheme"] = a.no_ma ? "FPA" : "MA-RIS";
  sol["config"] = config_to_json(c);
  sol["git_revision"] = build_revision();
  write_text(dir / "solution.json", sol.dump(2) + "\n");
  const FeasibilityCheck f = check_solution(s.realization, c, res);
  std::cout << "final sum rate " << res.report.sum_rate << " bps/Hz, " << res.trace.iterations.size()
            << " iterations" << (res.trace.converged ? " (converged)" : " (iteration cap)") << ", constraints "
            << (f.all() ? "satisfied" : "VIOLATED") << "\nwrote " << dir.string() << "\n";
  return f.all() ? kExitOk : kExitError;
}

struct SweepArgs {
  std::string sweep;
  std::string config;
  std::optional<std::uint64_t> seed;
  int trials = 0;
  int jobs = 1;
  std::string out = "results";
  bool no_ma = false;
  std::vector<double> values;
  bool no_wallclock = false;
};

int cmd_sweep(const SweepArgs& a) {
  const SystemConfig c = load_or_default(a.config);
  SweepSpec spec = fs::exists(a.sweep) && fs::is_regular_file(a.sweep) ? sweep_from_json(read_json(a.sweep))
                                                                         : default_sweep(a.sweep);
  if (!a.values.empty()) spec.values = a.values;
  if (a.trials > 0) spec.trials = a.trials;
  if (a.no_ma) spec.schemes = {Scheme::Fpa};
  spec.validate();
  const std::uint64_t seed = a.seed.value_or(c.seed);
  const fs::path dir = timestamped_dir(a.out, spec.name);

  SweepOptions opt;
  opt.jobs = a.jobs;
  int done = 0;
  const int total = static_cast<int>(spec.values.size() * spec.schemes.size()) * spec.trials;
  opt.progress = [&](const TrialRecord& r) {
    ++done;
    std::cout << "[" << done << "/" << total << "] " << r.param << "=" << r.value << " trial " << r.trial << " "
              << to_string(r.scheme) << ": ";
    if (r.ok) std::cout << r.sum_rate << " bps/Hz in " << r.iterations << " iterations\n";
    else std::cout << (r.infeasible ? "infeasible" : "error") << " (" << r.error << ")\n";
  };
  const SweepResult res = run_sweep(spec, c, seed, opt);
  write_sweep(res, c, dir, !a.no_wallclock);
  std::cout << "\n" << spec.param << "  scheme   mean      std      failures\n";
  for (const auto& cell : res.cells)
    std::cout << cell.value << "  " << to_string(cell.scheme) << "  " << cell.mean << "  " << cell.stddev << "  "
              << cell.failures << "/" << cell.trials << (cell.flagged ? "  FLAGGED" : "") << "\n";
  std::cout << "wrote " << dir.string() << "\n";
  return kExitOk;
}

struct ValidateArgs {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  bool quick = false;
  std::vector<std::string> only;
  std::string mutate;
};

int cmd_validate(const ValidateArgs& a) {
  ValidationOptions o;
  o.config = load_or_default(a.config);
  o.seed = a.seed;
  o.only = a.only;
  if (a.quick) o.shrink(10);
  if (a.mutate == "gradient-sign") o.gradient = sign_flipped_gradient;
  else if (!a.mutate.empty()) throw ConfigError("unknown mutation '" + a.mutate + "'");
  const ValidationReport rep = run_validation(o);
  for (const auto& s : rep.suites)
    std::cout << (s.passed ? "PASS " : "FAIL ") << s.name << ": " << s.checked << " checked, " << s.violations
              << " violations, max error " << s.max_error << " (" << s.seconds << " s)\n    " << s.detail << "\n";
  nlohmann::json j = rep.to_json();
  if (!a.mutate.empty()) j["mutation"] = a.mutate;
  if (!a.out.empty()) {
    const fs::path p(a.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text(p, j.dump(2) + "\n");
  }
  if (!rep.passed()) {
    std::cout << "failing suites:";
    for (const auto& n : rep.failing()) std::cout << " " << n;
    std::cout << "\n";
    return kExitValidationFailed;
  }
  std::cout << "all suites passed\n";
  return kExitOk;
}

struct SolveArgs {
  std::string problem;
  double tol = 1e-7;
  int max_iters = 100;
};

int cmd_solve(const SolveArgs& a) {
  const SDPProblem p = problem_from_json(read_json(a.problem));
  const SolverResult r = solve(p, a.tol, a.max_iters);
  std::cout << result_to_json(r).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust beamforming for movable-antenna, RIS-assisted RSMA downlinks"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Optimize one scenario and write trace.csv, trace.json, solution.json");
  run_cmd->add_option("--config", run.config, "SystemConfig JSON (defaults when omitted)");
  run_cmd->add_option("--seed", run.seed, "Master seed (overrides the config)");
  run_cmd->add_option("--trial", run.trial, "Trial index of the scenario stream")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--out", run.out, "Output directory (default results/run/<timestamp>)");
  run_cmd->add_flag("--no-ma", run.no_ma, "Fixed-position antennas (FPA baseline)");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo parameter sweep");
  sweep_cmd->add_option("--sweep", sweep.sweep, "Parameter (N, L, P_t, L_p, rho) or a sweep JSON file")->required();
  sweep_cmd->add_option("--config", sweep.config, "Base SystemConfig JSON");
  sweep_cmd->add_option("--seed", sweep.seed, "Master seed (overrides the config)");
  sweep_cmd->add_option("--trials", sweep.trials, "Trials per value")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep.out, "Results root; files go to <out>/<sweep>/<timestamp>");
  sweep_cmd->add_option("--values", sweep.values, "Override the value list")->delimiter(',');
  sweep_cmd->add_flag("--no-ma", sweep.no_ma, "Run the FPA baseline only");
  sweep_cmd->add_flag("--no-wallclock", sweep.no_wallclock, "Zero all timing columns (byte-identical reruns)");

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Run the property suites");
  val_cmd->add_option("--config", val.config, "SystemConfig JSON for the scenario-based suites");
  val_cmd->add_option("--seed", val.seed, "Seed");
  val_cmd->add_option("--out", val.out, "Write the JSON report here");
  val_cmd->add_flag("--quick", val.quick, "One tenth of the default sample counts");
  val_cmd->add_option("--only", val.only, "Suites to run")->check(CLI::IsMember(kValidationSuites));
  val_cmd->add_option("--mutate", val.mutate, "Inject a known defect (gradient-sign) to check the suites catch it");

  SolveArgs sol;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an SDPProblem JSON and print the SolverResult");
  solve_cmd->add_option("problem", sol.problem, "Problem file, or - for stdin")->required();
  solve_cmd->add_option("--tol", sol.tol, "Residual tolerance");
  solve_cmd->add_option("--max-iters", sol.max_iters, "Iteration cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*val_cmd) return cmd_validate(val);
    if (*solve_cmd) return cmd_solve(sol);
  } catch (const InfeasibleScenario& e) {
    std::cerr << "infeasible scenario: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
