// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/channel.hpp"
#include "marisa/rates.hpp"
#include "marisa/stage_precoding.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace marisa {

// QoS cannot be met: either provably (single-user full-power bound) or no
// QoS-feasible point was found by the optimization.
class InfeasibleScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AOIteration {
  int iteration = 0;  // 1-based
  double sum_rate = 0.0;  // worst-case, after all stages of this iteration
  bool feasible = false;
  double stage1_rate = 0.0;  // worst-case sum rate after stage 1
  double stage2_rate = 0.0;  // and after stage 2
  double stage1_objective = 0.0;
  double stage2_objective = 0.0;
  int stage1_inner = 0;
  int stage2_inner = 0;
  int stage3_sweeps = 0;
  bool stage1_accepted = false;
  bool stage2_accepted = false;
  int stage3_moves = 0;
  double stage1_ms = 0.0;
  double stage2_ms = 0.0;
  double stage3_ms = 0.0;
  std::vector<double> p6_solve_ms;
};

struct AOTrace {
  double initial_sum_rate = 0.0;
  bool initial_feasible = false;
  std::vector<AOIteration> iterations;
  bool converged = false;

  std::vector<double> sum_rates() const;
  // One row per outer iteration.
  std::string to_csv(bool wallclock = true) const;
  nlohmann::json to_json(bool wallclock = true) const;
};

struct AOResult {
  PrecodingSolution precoders;  // r_c holds the allocated shares
  RISConfiguration ris;
  AntennaPositions positions;
  RateReport report;
  AOTrace trace;
};

// Per-user upper bound on any achievable rate (full power, best phases and
// positions, perfect CSI).
RealVector single_user_rate_bound(const ChannelRealization& r, const SystemConfig& c);

using AOObserver = std::function<void(const AOIteration&)>;

// Alternates precoding, RIS and (if enabled) position stages until the
// worst-case sum rate changes by at most ao_tol (relative) or chi_max
// iterations. Every stage result is kept only if it is not worse than the
// current iterate. Throws InfeasibleScenario. `p3_observer` sees every
// stage-1 subproblem solution.
AOResult optimize(const ChannelRealization& r, const SystemConfig& c, Rng& rng, const AOObserver& observer = {},
                  const PrecodingObserver& p3_observer = {});

// Final solution for serialization: rates, precoders ([re, im] pairs; lifted
// matrices row-major when no vectors exist), RIS phases and positions.
nlohmann::json solution_to_json(const AOResult& res);

// Reference layout and stages 1-2 only.
AOResult fpa_baseline(const ChannelRealization& r, const SystemConfig& c, Rng& rng);

struct CostModel {
  double stage1 = 0.0;  // eps1 L^3.5
  double stage2 = 0.0;  // eps2 N^3.5
  double stage3 = 0.0;  // eps3 L
  double per_iteration = 0.0;
  double total = 0.0;   // chi_max * per_iteration
};

CostModel iteration_cost_model(const SystemConfig& c);

// Power, QoS, unit modulus, region and separation recomputed from scratch.
struct FeasibilityCheck {
  bool power = false;
  bool qos = false;
  bool unit_modulus = false;
  bool positions = false;
  bool all() const { return power && qos && unit_modulus && positions; }
};
FeasibilityCheck check_solution(const ChannelRealization& r, const SystemConfig& c, const AOResult& res);

}  // namespace marisa
