// SPDX-License-Identifier: Apache-2.0
#include "marisa/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marisa {

namespace {

double quad(const ComplexVector& g, const HermitianMatrix& P) { return (g.adjoint() * P.matrix() * g)(0).real(); }

double log_ratio(double num, double den, bool* clamped) {
  if (num <= 0.0) {
    if (clamped && num < 0.0) *clamped = true;
    return 0.0;
  }
  return std::log2(1.0 + num / den);
}

}  // namespace

PrecodingSolution PrecodingSolution::from_vectors(const ComplexVector& p_c, const std::vector<ComplexVector>& p) {
  PrecodingSolution s;
  s.p_c = p_c;
  s.p = p;
  s.P_c = HermitianMatrix::outer(p_c);
  for (const auto& v : p) {
    if (v.size() != p_c.size()) throw std::invalid_argument("PrecodingSolution: beamformer lengths differ");
    s.P.push_back(HermitianMatrix::outer(v));
  }
  s.r_c = RealVector::Zero(static_cast<Eigen::Index>(p.size()));
  return s;
}

PrecodingSolution PrecodingSolution::from_lifted(const HermitianMatrix& P_c, const std::vector<HermitianMatrix>& P) {
  PrecodingSolution s;
  s.P_c = P_c;
  s.P = P;
  for (const auto& m : P)
    if (m.dim() != P_c.dim()) throw std::invalid_argument("PrecodingSolution: covariance sizes differ");
  s.r_c = RealVector::Zero(static_cast<Eigen::Index>(P.size()));
  return s;
}

double PrecodingSolution::total_power() const {
  double t = P_c.trace();
  for (const auto& m : P) t += m.trace();
  return t;
}

HermitianMatrix PrecodingSolution::private_sum(int skip) const {
  HermitianMatrix s = HermitianMatrix::zero(P_c.dim());
  for (int i = 0; i < num_users(); ++i)
    if (i != skip) s += P[i];
  return s;
}

RateInputs rate_inputs(const ChannelRealization& r, const AntennaPositions& pos, const RISConfiguration& ris) {
  RateInputs in;
  in.g = effective_channels(r, pos, ris.v);
  in.rho_hat2 = r.rho_hat2;
  in.sigma2 = r.sigma2;
  return in;
}

double sinr_common(const std::vector<ComplexVector>& g, const PrecodingSolution& sol, double sigma2, int m) {
  const ComplexVector& gm = g.at(m);
  double interf = 0.0;
  for (int i = 0; i < sol.num_users(); ++i) interf += quad(gm, sol.P[i]);
  return quad(gm, sol.P_c) / (interf + sigma2);
}

double sinr_private(const std::vector<ComplexVector>& g, const PrecodingSolution& sol, double sigma2, int m) {
  const ComplexVector& gm = g.at(m);
  double interf = 0.0;
  for (int i = 0; i < sol.num_users(); ++i)
    if (i != m) interf += quad(gm, sol.P[i]);
  return quad(gm, sol.P[m]) / (interf + sigma2);
}

double worst_case_common_rate(const RateInputs& in, const PrecodingSolution& sol, int m, bool* clamped) {
  const ComplexVector& g = in.g.at(m);
  const double r2 = in.rho_hat2(m);
  const HermitianMatrix S1 = sol.private_sum();
  const double num = quad(g, sol.P_c) - r2 * sol.P_c.trace();
  const double den = quad(g, S1) + r2 * S1.trace() + in.sigma2;
  return log_ratio(num, den, clamped);
}

double worst_case_private_rate(const RateInputs& in, const PrecodingSolution& sol, int m, bool* clamped) {
  const ComplexVector& g = in.g.at(m);
  const double r2 = in.rho_hat2(m);
  const HermitianMatrix S2 = sol.private_sum(m);
  const double num = quad(g, sol.P[m]) - r2 * sol.P[m].trace();
  const double den = quad(g, S2) + r2 * S2.trace() + in.sigma2;
  return log_ratio(num, den, clamped);
}

Allocation allocate_common_rates(double capacity, const RealVector& private_rates, double R_min) {
  if (capacity < 0.0) throw std::invalid_argument("allocate_common_rates: negative capacity");
  const Eigen::Index M = private_rates.size();
  Allocation a;
  a.r_c = RealVector::Zero(M);
  double left = capacity;
  for (Eigen::Index m = 0; m < M; ++m) {
    const double need = std::max(0.0, R_min - private_rates(m));
    const double give = std::min(need, left);
    a.r_c(m) = give;
    left -= give;
    a.shortfall += need - give;
  }
  if (M > 0) a.r_c(0) += left;
  a.feasible = a.shortfall <= 1e-9;
  return a;
}

RateReport evaluate_rates(const RateInputs& in, const PrecodingSolution& sol, double R_min, bool keep_r_c) {
  const int M = sol.num_users();
  RateReport rep;
  rep.common_nominal.resize(M);
  rep.private_nominal.resize(M);
  rep.common.resize(M);
  rep.private_rate.resize(M);
  for (int m = 0; m < M; ++m) {
    rep.common_nominal(m) = std::log2(1.0 + sinr_common(in.g, sol, in.sigma2, m));
    rep.private_nominal(m) = std::log2(1.0 + sinr_private(in.g, sol, in.sigma2, m));
    rep.common(m) = worst_case_common_rate(in, sol, m, &rep.clamped);
    rep.private_rate(m) = worst_case_private_rate(in, sol, m, &rep.clamped);
  }
  const double capacity = M > 0 ? rep.common.minCoeff() : 0.0;
  if (keep_r_c && sol.r_c.size() == M) {
    rep.r_c = sol.r_c;
    double shortfall = 0.0;
    for (int m = 0; m < M; ++m) shortfall += std::max(0.0, R_min - rep.r_c(m) - rep.private_rate(m));
    const double over = std::max(0.0, rep.r_c.sum() - capacity);
    rep.qos_shortfall = shortfall + over;
    rep.qos_satisfied = shortfall <= 1e-9 && over <= 1e-9;
  } else {
    const Allocation a = allocate_common_rates(capacity, rep.private_rate, R_min);
    rep.r_c = a.r_c;
    rep.qos_satisfied = a.feasible;
    rep.qos_shortfall = a.shortfall;
  }
  rep.sum_rate = sum_rate(rep);
  return rep;
}

RateReport worst_case_rates(const ChannelRealization& r, const AntennaPositions& pos, const RISConfiguration& ris,
                            const PrecodingSolution& sol, double R_min) {
  return evaluate_rates(rate_inputs(r, pos, ris), sol, R_min);
}

double theorem1_value(const HermitianMatrix& Psi, double rho2) {
  if (rho2 < 0.0) throw std::domain_error("theorem1_value: negative radius");
  const EigenDecomposition e = hermitian_eig(Psi);
  const double top = e.values(0);
  const double scale = std::max(1.0, std::abs(top));
  if (e.values(e.values.size() - 1) < -1e-10 * scale) throw std::domain_error("theorem1_value: Psi is not PSD");
  if (e.values.size() > 1 && e.values(1) > 1e-8 * std::max(top, 0.0) + 1e-300)
    throw std::domain_error("theorem1_value: Psi is not rank one");
  return rho2 * Psi.trace();
}

double sum_rate(const RateReport& report) { return report.r_c.sum() + report.private_rate.sum(); }

bool preferable(const RateReport& a, const RateReport& b) {
  if (a.qos_satisfied != b.qos_satisfied) return a.qos_satisfied;
  return a.qos_satisfied ? a.sum_rate > b.sum_rate : a.qos_shortfall < b.qos_shortfall;
}

}  // namespace marisa
