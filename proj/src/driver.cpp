// SPDX-License-Identifier: Apache-2.0
#include "marisa/driver.hpp"

#include "marisa/stage_positions.hpp"
#include "marisa/stage_precoding.hpp"
#include "marisa/stage_ris.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace marisa {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

PrecodingSolution best_initial(const RateInputs& in, const SystemConfig& c) {
  PrecodingSolution best;
  RateReport best_rep;
  bool have = false;
  for (auto& p : initial_precoders(in, c)) {
    RateReport rep = evaluate_rates(in, p, c.R_min);
    if (!have || preferable(rep, best_rep)) {
      best = std::move(p);
      best_rep = std::move(rep);
      have = true;
    }
  }
  return best;
}

nlohmann::json complex_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json cvec_json(const ComplexVector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_json(v(i)));
  return a;
}

nlohmann::json cmat_json(const HermitianMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.matrix().rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.matrix().cols(); ++c) row.push_back(complex_json(m.matrix()(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> std_vec(const RealVector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::vector<double> AOTrace::sum_rates() const {
  std::vector<double> out;
  for (const auto& it : iterations) out.push_back(it.sum_rate);
  return out;
}

std::string AOTrace::to_csv(bool wallclock) const {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,sum_rate,feasible,stage1_rate,stage2_rate,stage1_objective,stage2_objective,stage1_inner,stage2_inner,stage3_sweeps,"
        "stage1_accepted,stage2_accepted,stage3_moves";
  if (wallclock) os << ",stage1_ms,stage2_ms,stage3_ms";
  os << "\n";
  for (const auto& it : iterations) {
    os << it.iteration << ',' << it.sum_rate << ',' << it.feasible << ',' << it.stage1_rate << ',' << it.stage2_rate
       << ',' << it.stage1_objective << ','
       << it.stage2_objective << ',' << it.stage1_inner << ',' << it.stage2_inner << ',' << it.stage3_sweeps << ','
       << it.stage1_accepted << ',' << it.stage2_accepted << ',' << it.stage3_moves;
    if (wallclock) os << ',' << it.stage1_ms << ',' << it.stage2_ms << ',' << it.stage3_ms;
    os << "\n";
  }
  return os.str();
}

nlohmann::json AOTrace::to_json(bool wallclock) const {
  nlohmann::json j;
  j["initial_sum_rate"] = initial_sum_rate;
  j["initial_feasible"] = initial_feasible;
  j["converged"] = converged;
  j["iterations"] = nlohmann::json::array();
  for (const auto& it : iterations) {
    nlohmann::json r = {{"iteration", it.iteration},
                        {"sum_rate", it.sum_rate},
                        {"feasible", it.feasible},
                        {"stage1_rate", it.stage1_rate},
                        {"stage2_rate", it.stage2_rate},
                        {"stage1_objective", it.stage1_objective},
                        {"stage2_objective", it.stage2_objective},
                        {"stage1_inner", it.stage1_inner},
                        {"stage2_inner", it.stage2_inner},
                        {"stage3_sweeps", it.stage3_sweeps},
                        {"stage1_accepted", it.stage1_accepted},
                        {"stage2_accepted", it.stage2_accepted},
                        {"stage3_moves", it.stage3_moves}};
    if (wallclock) {
      r["stage1_ms"] = it.stage1_ms;
      r["stage2_ms"] = it.stage2_ms;
      r["stage3_ms"] = it.stage3_ms;
      r["p6_solve_ms"] = it.p6_solve_ms;
    }
    j["iterations"].push_back(std::move(r));
  }
  return j;
}

RealVector single_user_rate_bound(const ChannelRealization& r, const SystemConfig& c) {
  // |H_il| <= sum_p |Lambda_pp| |F_r(p, i)|, so ||g_m|| <= sqrt(L) sum_i |h_mi| a_i.
  const int N = r.num_elements();
  RealVector a = RealVector::Zero(N);
  for (int i = 0; i < N; ++i)
    for (Eigen::Index p = 0; p < r.Lambda.rows(); ++p) a(i) += std::abs(r.Lambda(p, p)) * std::abs(r.F_r(p, i));
  RealVector out(r.num_users());
  for (int m = 0; m < r.num_users(); ++m) {
    double g = 0.0;
    for (int i = 0; i < N; ++i) g += std::abs(r.h_ris_user[m](i)) * a(i);
    g *= std::sqrt(static_cast<double>(c.L));
    out(m) = std::log2(1.0 + c.P_t * g * g / r.sigma2);
  }
  return out;
}

AOResult optimize(const ChannelRealization& r, const SystemConfig& c, Rng& rng, const AOObserver& observer,
                  const PrecodingObserver& p3_observer) {
  c.validate();
  const RealVector bound = single_user_rate_bound(r, c);
  for (int m = 0; m < bound.size(); ++m)
    if (bound(m) < c.R_min)
      throw InfeasibleScenario("user " + std::to_string(m) + " cannot reach R_min even at full power (bound " +
                               std::to_string(bound(m)) + " bps/Hz)");

  AOResult res;
  res.positions = initial_positions(c);
  res.ris = RISConfiguration::all_ones(c.N);
  res.precoders = best_initial(normalized(rate_inputs(r, res.positions, res.ris)), c);
  res.report = worst_case_rates(r, res.positions, res.ris, res.precoders, c.R_min);
  res.trace.initial_sum_rate = res.report.sum_rate;
  res.trace.initial_feasible = res.report.qos_satisfied;

  double prev = res.report.sum_rate;
  for (int it = 1; it <= c.chi_max; ++it) {
    AOIteration rec;
    rec.iteration = it;

    auto t0 = std::chrono::steady_clock::now();
    const RateInputs in = normalized(rate_inputs(r, res.positions, res.ris));
    PrecodingStageResult s1 = run_precoding_stage(in, res.precoders, c, rng, p3_observer);
    rec.stage1_ms = ms_since(t0);
    rec.stage1_inner = s1.inner_iterations + s1.restoration_iterations;
    if (!s1.objectives.empty()) rec.stage1_objective = s1.objectives.back();
    if (s1.solved) {
      RateReport rep = worst_case_rates(r, res.positions, res.ris, s1.solution, c.R_min);
      if (!preferable(res.report, rep)) {
        res.precoders = std::move(s1.solution);
        res.report = std::move(rep);
        rec.stage1_accepted = true;
      }
    }

    rec.stage1_rate = res.report.sum_rate;

    t0 = std::chrono::steady_clock::now();
    RisStageResult s2 = run_ris_stage(r, res.positions, res.precoders, res.ris, c, rng);
    rec.stage2_ms = ms_since(t0);
    rec.stage2_inner = s2.inner_iterations;
    rec.p6_solve_ms = s2.solve_ms;
    if (!s2.objectives.empty()) rec.stage2_objective = s2.objectives.back();
    if (!s2.kept_previous && !preferable(res.report, s2.report)) {
      res.ris = std::move(s2.ris);
      res.report = std::move(s2.report);
      rec.stage2_accepted = true;
    }

    rec.stage2_rate = res.report.sum_rate;

    if (c.enable_positions) {
      t0 = std::chrono::steady_clock::now();
      PositionStageResult s3 = run_position_stage(r, res.positions, res.ris, res.precoders, c);
      rec.stage3_ms = ms_since(t0);
      rec.stage3_sweeps = s3.sweeps;
      rec.stage3_moves = s3.accepted;
      if (!preferable(res.report, s3.report)) {
        res.positions = std::move(s3.positions);
        res.report = std::move(s3.report);
      }
    }

    rec.sum_rate = res.report.sum_rate;
    rec.feasible = res.report.qos_satisfied;
    res.trace.iterations.push_back(rec);
    if (observer) observer(rec);
    const double change = std::abs(res.report.sum_rate - prev);
    prev = res.report.sum_rate;
    if (res.report.qos_satisfied && change <= c.ao_tol * std::max(1.0, std::abs(prev))) {
      res.trace.converged = true;
      break;
    }
  }
  res.precoders.r_c = res.report.r_c;
  if (!res.report.qos_satisfied)
    throw InfeasibleScenario("no QoS-feasible point found (shortfall " + std::to_string(res.report.qos_shortfall) +
                             " bps/Hz)");
  return res;
}

nlohmann::json solution_to_json(const AOResult& res) {
  nlohmann::json j;
  const RateReport& rep = res.report;
  j["sum_rate"] = rep.sum_rate;
  j["qos_satisfied"] = rep.qos_satisfied;
  j["common_rate_shares"] = std_vec(rep.r_c);
  j["private_rates"] = std_vec(rep.private_rate);
  j["common_rates"] = std_vec(rep.common);
  j["total_power"] = res.precoders.total_power();
  nlohmann::json pre;
  if (res.precoders.has_vectors()) {
    pre["p_c"] = cvec_json(res.precoders.p_c);
    pre["p"] = nlohmann::json::array();
    for (const auto& v : res.precoders.p) pre["p"].push_back(cvec_json(v));
  } else {
    pre["P_c"] = cmat_json(res.precoders.P_c);
    pre["P"] = nlohmann::json::array();
    for (const auto& m : res.precoders.P) pre["P"].push_back(cmat_json(m));
  }
  j["precoders"] = std::move(pre);
  j["ris_phases"] = std_vec(res.ris.phases);
  j["positions"] = nlohmann::json::array();
  for (const auto& t : res.positions.t) j["positions"].push_back({t.x, t.y});
  j["converged"] = res.trace.converged;
  j["iterations"] = res.trace.iterations.size();
  return j;
}

AOResult fpa_baseline(const ChannelRealization& r, const SystemConfig& c, Rng& rng) {
  SystemConfig f = c;
  f.enable_positions = false;
  return optimize(r, f, rng);
}

CostModel iteration_cost_model(const SystemConfig& c) {
  CostModel m;
  m.stage1 = c.eps1 * std::pow(static_cast<double>(c.L), 3.5);
  m.stage2 = c.eps2 * std::pow(static_cast<double>(c.N), 3.5);
  m.stage3 = c.enable_positions ? c.eps3 * static_cast<double>(c.L) : 0.0;
  m.per_iteration = m.stage1 + m.stage2 + m.stage3;
  m.total = c.chi_max * m.per_iteration;
  return m;
}

FeasibilityCheck check_solution(const ChannelRealization& r, const SystemConfig& c, const AOResult& res) {
  FeasibilityCheck f;
  f.power = res.precoders.total_power() <= c.P_t * (1.0 + 1e-6);
  const RateReport rep = worst_case_rates(r, res.positions, res.ris, res.precoders, c.R_min);
  f.qos = rep.qos_satisfied;
  f.unit_modulus = true;
  for (Eigen::Index i = 0; i < res.ris.v.size(); ++i)
    if (std::abs(std::abs(res.ris.v(i)) - 1.0) > 1e-12) f.unit_modulus = false;
  f.positions = positions_feasible(res.positions, c);
  return f;
}

}  // namespace marisa
