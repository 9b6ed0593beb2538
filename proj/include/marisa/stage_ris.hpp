// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/channel.hpp"
#include "marisa/conic_solver.hpp"
#include "marisa/lifted.hpp"
#include "marisa/rates.hpp"

#include <functional>
#include <string>
#include <vector>

namespace marisa {

// Per-user matrices of the covariance-form rates as functions of the lifted
// RIS matrix V = v v^H:
//   common:  numerator tr(V U1) - rho^2 tr(P_c), denominator tr(V U2) + rho^2 tr(S1) + sigma2
//   private: numerator tr(V W1) - rho^2 tr(P_m), denominator tr(V W2) + rho^2 tr(S2) + sigma2
// with X -> conj(diag(h*) H X H^H diag(h)) applied to P_c, S1, P_m, S2.
struct RateMatrices {
  HermitianMatrix U1, U2, W1, W2;  // N x N
  HermitianMatrix S1, S2;          // L x L
  double tr_Pc = 0.0, tr_Pm = 0.0;
  double rho_hat2 = 0.0;
  double sigma2 = 1.0;

  double common_numerator(const HermitianMatrix& V) const;
  double common_denominator(const HermitianMatrix& V) const;
  double private_numerator(const HermitianMatrix& V) const;
  double private_denominator(const HermitianMatrix& V) const;
};

// N x N image of an L x L covariance for one user.
HermitianMatrix lift_to_ris(const ComplexMatrix& H, const ComplexVector& h, const HermitianMatrix& X);

std::vector<RateMatrices> assemble_rate_matrices(const ChannelRealization& r, const AntennaPositions& pos,
                                                 const PrecodingSolution& sol);

// First-order expansion at the anchor of log2(tr(V W2) + rho^2 tr(S2) + sigma2)
// (private) or the same with U2, S1 (common), evaluated at V. Throws
// std::domain_error when the log argument at the anchor is not positive.
double fta_private(const HermitianMatrix& V, const HermitianMatrix& anchor, const HermitianMatrix& W2,
                   const HermitianMatrix& S2, double rho_hat2, double sigma2);
double fta_common(const HermitianMatrix& V, const HermitianMatrix& anchor, const HermitianMatrix& U2,
                  const HermitianMatrix& S1, double rho_hat2, double sigma2);

struct P6Result {
  SolverStatus status = SolverStatus::NumericalFailure;
  std::string message;
  HermitianMatrix V;
  RealVector r_c;
  RealVector varpi;
  double qos_slack = 0.0;  // largest QoS shortfall accepted by the soft constraint
  double objective = 0.0;
  int iterations = 0;
  double solve_ms = 0.0;  // conic solve only
};

// Rank-relaxed P6 around the anchor. Users whose private (common) worst-case
// numerator is not positive at the anchor contribute a zero private rate
// (zero common capacity), which is exact there and conservative elsewhere.
P6Result solve_p6(const std::vector<RateMatrices>& rm, const HermitianMatrix& anchor, const SystemConfig& c);

struct RisRandomization {
  RISConfiguration ris;
  RateReport report;
  bool feasible = false;
  bool rank_one = false;
};

// Principal eigenvector, then (if V has rank > 1) randomization_count - 1
// draws v ~ CN(0, V); every candidate is projected to unit modulus and scored
// by worst-case rates with the precoders fixed.
RisRandomization randomize_unit_modulus(const HermitianMatrix& V, const ChannelRealization& r,
                                        const AntennaPositions& pos, const PrecodingSolution& sol,
                                        const SystemConfig& c, Rng& rng);

using RisObserver = std::function<void(const P6Result&)>;

struct RisStageResult {
  bool solved = false;
  RISConfiguration ris;
  RateReport report;
  bool feasible = false;
  bool kept_previous = false;  // recovery (or every P6 solve) did not beat `current`
  int inner_iterations = 0;
  std::vector<double> objectives;
  std::vector<double> solve_ms;
  std::string message;
};

// SCA on P6 from the current configuration (at most eps2 solves), then
// unit-modulus recovery. The current configuration is kept when nothing
// better is found.
RisStageResult run_ris_stage(const ChannelRealization& r, const AntennaPositions& pos, const PrecodingSolution& sol,
                             const RISConfiguration& current, const SystemConfig& c, Rng& rng,
                             const RisObserver& observer = {});

}  // namespace marisa
