// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/channel.hpp"
#include "marisa/conic_solver.hpp"
#include "marisa/rates.hpp"

#include <functional>
#include <string>
#include <vector>

namespace marisa {

enum class RateKind { Private, Common };

struct RateGradient {
  double dx = 0.0;
  double dy = 0.0;
  bool clamped = false;  // worst-case numerator <= 0: rate is 0 and the gradient is taken as 0
};

// Worst-case covariance-form rate of user m (bps/Hz).
double worst_case_rate(const ChannelRealization& r, const AntennaPositions& pos, const RISConfiguration& ris,
                       const PrecodingSolution& sol, int m, RateKind which);

// Analytic gradient of worst_case_rate with respect to the position of
// antenna l (bps/Hz per meter). The uncertainty radii are held fixed.
RateGradient rate_gradient(const ChannelRealization& r, const AntennaPositions& pos, const RISConfiguration& ris,
                           const PrecodingSolution& sol, int m, int l, RateKind which);

using GradientFn = std::function<RateGradient(const ChannelRealization&, const AntennaPositions&,
                                              const RISConfiguration&, const PrecodingSolution&, int, int, RateKind)>;

// a . t >= rhs, the first-order lower bound of ||t - t_j|| >= D at the anchor.
struct SeparationRow {
  double ax = 0.0;
  double ay = 0.0;
  double rhs = 0.0;
  double value(Point2 t) const { return ax * t.x + ay * t.y; }
  bool satisfied(Point2 t, double tol = 0.0) const { return value(t) >= rhs - tol; }
};

// Throws std::invalid_argument when the anchor coincides with t_j.
SeparationRow linearize_separation(Point2 anchor, Point2 t_j, double D);

// Inside C_t and pairwise distances >= D - tol.
bool positions_feasible(const AntennaPositions& pos, const SystemConfig& c, double tol = 1e-9);

struct P8Result {
  SolverStatus status = SolverStatus::NumericalFailure;
  std::string message;
  Point2 position;
  RealVector r_c;
  RealVector upsilon;
  double objective = 0.0;
};

// Linearized subproblem for antenna l with the others fixed. The step is
// confined to the box |t - t_l| <= delta (per coordinate) inside C_t.
P8Result solve_p8_single(const ChannelRealization& r, const AntennaPositions& pos, const RISConfiguration& ris,
                         const PrecodingSolution& sol, int l, double delta, const SystemConfig& c,
                         const GradientFn& gradient = rate_gradient);

struct PositionStageResult {
  AntennaPositions positions;
  RateReport report;
  int sweeps = 0;
  int accepted = 0;
  int rejected = 0;
  std::vector<double> sweep_rates;  // true worst-case sum rate after each sweep
};

// Block coordinate descent over antennas, at most eps3 sweeps. A step is kept
// only if the true worst-case rates are not worse; rejected steps halve the
// trust region (reset every sweep).
PositionStageResult run_position_stage(const ChannelRealization& r, const AntennaPositions& start,
                                       const RISConfiguration& ris, const PrecodingSolution& sol,
                                       const SystemConfig& c);

}  // namespace marisa
