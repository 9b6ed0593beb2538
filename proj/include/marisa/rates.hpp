// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/channel.hpp"
#include "marisa/linalg.hpp"

#include <optional>
#include <vector>

namespace marisa {

struct PrecodingSolution {
  ComplexVector p_c;               // empty when only the lifted form exists
  std::vector<ComplexVector> p;    // per-user private beamformers
  HermitianMatrix P_c;
  std::vector<HermitianMatrix> P;
  RealVector r_c;                  // common-rate shares (bps/Hz)

  static PrecodingSolution from_vectors(const ComplexVector& p_c, const std::vector<ComplexVector>& p);
  static PrecodingSolution from_lifted(const HermitianMatrix& P_c, const std::vector<HermitianMatrix>& P);

  int num_users() const { return static_cast<int>(P.size()); }
  int num_antennas() const { return static_cast<int>(P_c.dim()); }
  bool has_vectors() const { return p_c.size() > 0; }
  double total_power() const;
  // Sum of private covariances, optionally skipping one user.
  HermitianMatrix private_sum(int skip = -1) const;
};

struct RateReport {
  RealVector common_nominal;   // R_m^c with the estimated channels
  RealVector private_nominal;  // R_m^p with the estimated channels
  RealVector common;           // worst-case R_m^c
  RealVector private_rate;     // worst-case R_m^p
  RealVector r_c;              // allocated common-rate shares
  double sum_rate = 0.0;       // sum(r_c + private_rate)
  bool qos_satisfied = false;
  double qos_shortfall = 0.0;  // sum of unmet QoS after allocation
  bool clamped = false;        // some worst-case numerator hit zero
};

// Channel-domain inputs for the rate formulas. Channels and radii may be in
// any consistent unit as long as sigma2 matches.
struct RateInputs {
  std::vector<ComplexVector> g;
  RealVector rho_hat2;
  double sigma2 = 1.0;
};

RateInputs rate_inputs(const ChannelRealization& r, const AntennaPositions& pos, const RISConfiguration& ris);

double sinr_common(const std::vector<ComplexVector>& g, const PrecodingSolution& sol, double sigma2, int m);
double sinr_private(const std::vector<ComplexVector>& g, const PrecodingSolution& sol, double sigma2, int m);

// Worst-case covariance-form rates with numerators clamped at zero.
double worst_case_common_rate(const RateInputs& in, const PrecodingSolution& sol, int m, bool* clamped = nullptr);
double worst_case_private_rate(const RateInputs& in, const PrecodingSolution& sol, int m, bool* clamped = nullptr);

struct Allocation {
  RealVector r_c;
  bool feasible = false;
  double shortfall = 0.0;
};

// Maximizes sum(r_c) <= capacity under r_c + private >= R_min: deficits are
// topped up first, the remainder goes to the lowest index. When the deficits
// exceed capacity they are filled in index order and the result is flagged.
Allocation allocate_common_rates(double capacity, const RealVector& private_rates, double R_min);

// Rates for a solution; r_c is re-allocated unless keep_r_c is set and the
// solution carries a share vector.
RateReport evaluate_rates(const RateInputs& in, const PrecodingSolution& sol, double R_min, bool keep_r_c = false);
RateReport worst_case_rates(const ChannelRealization& r, const AntennaPositions& pos, const RISConfiguration& ris,
                            const PrecodingSolution& sol, double R_min);

// max over ||Xi||_F <= rho2 of tr(Psi Xi) for rank-one PSD Psi, i.e.
// rho2 * tr(Psi). Throws std::domain_error when Psi is not rank-one PSD
// (eigenvalue ratio above 1e-8 or a negative eigenvalue).
double theorem1_value(const HermitianMatrix& Psi, double rho2);

double sum_rate(const RateReport& report);

// Selection order for candidate solutions: QoS-feasible beats infeasible,
// then higher sum rate (feasible) or smaller shortfall (infeasible).
bool preferable(const RateReport& a, const RateReport& b);

}  // namespace marisa
