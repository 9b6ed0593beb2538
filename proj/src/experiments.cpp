// SPDX-License-Identifier: Apache-2.0
#include "marisa/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#ifndef MARISA_GIT_REVISION
#define MARISA_GIT_REVISION "unknown"
#endif

namespace marisa {

namespace {

const std::vector<std::string> kParams{"N", "L", "P_t", "L_p", "rho"};

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

// Short form for file names: 8, 0.01, 15.
std::string short_fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

}  // namespace

Scenario make_scenario(const SystemConfig& c, std::uint64_t seed, int trial) {
  c.validate();
  Scenario s;
  s.config = c;
  s.seed = seed;
  s.trial = trial;
  s.rng = make_rng(seed, static_cast<std::uint64_t>(trial));
  s.realization = sample_realization(c, s.rng);
  return s;
}

std::string to_string(Scheme s) { return s == Scheme::MaRis ? "MA-RIS" : "FPA"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "MA-RIS") return Scheme::MaRis;
  if (s == "FPA") return Scheme::Fpa;
  throw ConfigError("unknown scheme '" + s + "' (expected MA-RIS or FPA)");
}

void SweepSpec::validate() const {
  if (std::find(kParams.begin(), kParams.end(), param) == kParams.end())
    throw ConfigError("unknown sweep parameter '" + param + "'");
  if (values.empty()) throw ConfigError("sweep value list is empty");
  if (trials < 1) throw ConfigError("sweep needs at least one trial");
  if (schemes.empty()) throw ConfigError("sweep needs at least one scheme");
}

SweepSpec default_sweep(const std::string& param) {
  SweepSpec s;
  s.name = param;
  s.param = param;
  if (param == "N") s.values = {8, 16, 32};
  else if (param == "L") s.values = {2, 4, 6};
  else if (param == "P_t") s.values = {5, 15, 25};
  else if (param == "L_p") s.values = {2, 4, 6};
  else if (param == "rho") s.values = {0.0, 0.01, 0.05};
  else throw ConfigError("unknown sweep parameter '" + param + "'");
  return s;
}

SweepSpec sweep_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("sweep spec must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "name" && it.key() != "param" && it.key() != "values" && it.key() != "trials" &&
        it.key() != "schemes")
      throw ConfigError("unknown sweep key '" + it.key() + "'");
  if (!j.contains("param")) throw ConfigError("sweep spec needs 'param'");
  SweepSpec s = default_sweep(j.at("param").get<std::string>());
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("values")) s.values = j.at("values").get<std::vector<double>>();
  if (j.contains("trials")) s.trials = j.at("trials").get<int>();
  if (j.contains("schemes")) {
    s.schemes.clear();
    for (const auto& x : j.at("schemes")) s.schemes.push_back(scheme_from_string(x.get<std::string>()));
  }
  s.validate();
  return s;
}

nlohmann::json sweep_to_json(const SweepSpec& s) {
  nlohmann::json schemes = nlohmann::json::array();
  for (Scheme x : s.schemes) schemes.push_back(to_string(x));
  return {{"name", s.name}, {"param", s.param}, {"values", s.values}, {"trials", s.trials}, {"schemes", schemes}};
}

SystemConfig with_param(const SystemConfig& c, const std::string& param, double value) {
  SystemConfig out = c;
  auto as_int = [&]() {
    if (value != std::round(value)) throw ConfigError(param + " must be an integer, got " + fmt(value));
    return static_cast<int>(value);
  };
  if (param == "N") out.N = as_int();
  else if (param == "L") out.L = as_int();
  else if (param == "P_t") out.P_t = value;
  else if (param == "L_p") out.L_t = out.L_r = as_int();
  else if (param == "rho") out.rho = value;
  else throw ConfigError("unknown sweep parameter '" + param + "'");
  out.validate();
  return out;
}

TrialRecord run_trial(const Scenario& s, Scheme scheme) {
  TrialRecord rec;
  rec.trial = s.trial;
  rec.seed = s.seed;
  rec.scheme = scheme;
  Rng rng = s.rng;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const AOResult res =
        scheme == Scheme::MaRis ? optimize(s.realization, s.config, rng) : fpa_baseline(s.realization, s.config, rng);
    rec.ok = true;
    rec.sum_rate = res.report.sum_rate;
    rec.iterations = static_cast<int>(res.trace.iterations.size());
    rec.converged = res.trace.converged;
    rec.trace = res.trace;
  } catch (const InfeasibleScenario& e) {
    rec.infeasible = true;
    rec.error = e.what();
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wallclock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records) {
  std::vector<CellSummary> cells;
  std::map<std::pair<double, int>, std::size_t> index;
  std::vector<std::vector<double>> rates;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.value, static_cast<int>(r.scheme));
    auto [it, fresh] = index.try_emplace(key, cells.size());
    if (fresh) {
      CellSummary c;
      c.param = r.param;
      c.value = r.value;
      c.scheme = r.scheme;
      cells.push_back(c);
      rates.emplace_back();
    }
    CellSummary& c = cells[it->second];
    ++c.trials;
    if (r.ok) rates[it->second].push_back(r.sum_rate);
    else ++c.failures;
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& x = rates[i];
    CellSummary& c = cells[i];
    c.flagged = c.failures * 5 > c.trials;
    if (x.empty()) {
      c.mean = c.stddev = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    c.mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double ss = 0.0;
    for (double v : x) ss += (v - c.mean) * (v - c.mean);
    c.stddev = x.size() > 1 ? std::sqrt(ss / (x.size() - 1)) : 0.0;
  }
  return cells;
}

SweepResult run_sweep(const SweepSpec& spec, const SystemConfig& base, std::uint64_t seed,
                      const SweepOptions& options) {
  spec.validate();
  SweepResult out;
  out.spec = spec;
  out.seed = seed;
  std::vector<SystemConfig> configs;
  for (double v : spec.values) configs.push_back(with_param(base, spec.param, v));

  const int jobs_total = static_cast<int>(spec.values.size()) * spec.trials;
  const std::size_t per_job = spec.schemes.size();
  out.records.resize(static_cast<std::size_t>(jobs_total) * per_job);
  std::atomic<int> next{0};
  std::mutex progress_mu;
  auto worker = [&]() {
    for (int j = next++; j < jobs_total; j = next++) {
      const int vi = j / spec.trials, trial = j % spec.trials;
      TrialRecord failed;
      std::vector<TrialRecord> recs;
      try {
        const Scenario s = make_scenario(configs[vi], seed, trial);
        for (Scheme sc : spec.schemes) recs.push_back(run_trial(s, sc));
      } catch (const std::exception& e) {
        recs.clear();
        for (Scheme sc : spec.schemes) {
          TrialRecord r;
          r.trial = trial;
          r.seed = seed;
          r.scheme = sc;
          r.error = e.what();
          recs.push_back(r);
        }
      }
      for (std::size_t k = 0; k < per_job; ++k) {
        recs[k].param = spec.param;
        recs[k].value = spec.values[vi];
        out.records[static_cast<std::size_t>(j) * per_job + k] = recs[k];
        if (options.progress) {
          std::lock_guard<std::mutex> lock(progress_mu);
          options.progress(recs[k]);
        }
      }
    }
  };
  const int n = std::max(1, std::min(options.jobs, jobs_total));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  out.cells = summarize(out.records);
  return out;
}

std::string cells_csv(const SweepResult& r, bool wallclock) {
  std::ostringstream os;
  os << "param,value,trial,seed,scheme,sum_rate,iterations,wallclock_ms,status\n";
  for (const auto& x : r.records) {
    const std::string status = x.ok ? (x.converged ? "converged" : "max_iterations") : (x.infeasible ? "infeasible" : "error");
    os << x.param << ',' << fmt(x.value) << ',' << x.trial << ',' << x.seed << ',' << to_string(x.scheme) << ','
       << (x.ok ? fmt(x.sum_rate) : "") << ',' << x.iterations << ',' << (wallclock ? fmt(x.wallclock_ms) : "0") << ','
       << status << '\n';
  }
  return os.str();
}

std::string summary_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "param,value,scheme,trials,failures,mean_sum_rate,std_sum_rate,flagged\n";
  for (const auto& c : r.cells)
    os << c.param << ',' << fmt(c.value) << ',' << to_string(c.scheme) << ',' << c.trials << ',' << c.failures << ','
       << fmt(c.mean) << ',' << fmt(c.stddev) << ',' << (c.flagged ? 1 : 0) << '\n';
  return os.str();
}

std::string build_revision() { return MARISA_GIT_REVISION; }

void write_sweep(const SweepResult& r, const SystemConfig& base, const std::filesystem::path& dir, bool wallclock) {
  std::filesystem::create_directories(dir);
  write_file(dir / "cells.csv", cells_csv(r, wallclock));
  write_file(dir / "summary.csv", summary_csv(r));
  for (const auto& x : r.records) {
    if (!x.ok) continue;
    const auto sub = dir / "traces" / (to_string(x.scheme) + "_" + x.param + "=" + short_fmt(x.value));
    std::filesystem::create_directories(sub);
    write_file(sub / ("trace_" + std::to_string(x.trial) + ".csv"), x.trace.to_csv(wallclock));
  }
  nlohmann::json flagged = nlohmann::json::array();
  for (const auto& c : r.cells)
    if (c.flagged) flagged.push_back({{"value", c.value}, {"scheme", to_string(c.scheme)}, {"failures", c.failures}});
  nlohmann::json meta = {{"sweep", sweep_to_json(r.spec)},
                         {"seed", r.seed},
                         {"config", config_to_json(base)},
                         {"git_revision", build_revision()},
                         {"flagged_cells", flagged}};
  write_file(dir / "meta.json", meta.dump(2) + "\n");
}

std::filesystem::path timestamped_dir(const std::filesystem::path& root, const std::string& name) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return root / name / buf;
}

double stage2_median_ms(const SweepResult& r, double value, Scheme scheme) {
  std::vector<double> t;
  for (const auto& x : r.records)
    if (x.ok && x.value == value && x.scheme == scheme)
      for (const auto& it : x.trace.iterations) t.insert(t.end(), it.p6_solve_ms.begin(), it.p6_solve_ms.end());
  if (t.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = t.size() / 2;
  std::nth_element(t.begin(), t.begin() + mid, t.end());
  if (t.size() % 2) return t[mid];
  const double hi = t[mid];
  return 0.5 * (hi + *std::max_element(t.begin(), t.begin() + mid));
}

std::vector<double> paired_means(const SweepResult& r, Scheme scheme, int* paired_trials) {
  const auto& vals = r.spec.values;
  std::vector<bool> all_ok(r.spec.trials, true);
  for (const auto& x : r.records)
    if (x.scheme == scheme && !x.ok) all_ok[x.trial] = false;
  std::vector<double> sums(vals.size(), 0.0);
  for (const auto& x : r.records) {
    if (x.scheme != scheme || !all_ok[x.trial]) continue;
    const auto vi = std::find(vals.begin(), vals.end(), x.value) - vals.begin();
    sums[vi] += x.sum_rate;
  }
  const int n = static_cast<int>(std::count(all_ok.begin(), all_ok.end(), true));
  if (paired_trials) *paired_trials = n;
  for (double& s : sums) s = n > 0 ? s / n : std::numeric_limits<double>::quiet_NaN();
  return sums;
}

}  // namespace marisa
