// SPDX-License-Identifier: Apache-2.0
#include "marisa/stage_ris.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace marisa {

double RateMatrices::common_numerator(const HermitianMatrix& V) const {
  return trace_inner(V, U1) - rho_hat2 * tr_Pc;
}
double RateMatrices::common_denominator(const HermitianMatrix& V) const {
  return trace_inner(V, U2) + rho_hat2 * S1.trace() + sigma2;
}
double RateMatrices::private_numerator(const HermitianMatrix& V) const {
  return trace_inner(V, W1) - rho_hat2 * tr_Pm;
}
double RateMatrices::private_denominator(const HermitianMatrix& V) const {
  return trace_inner(V, W2) + rho_hat2 * S2.trace() + sigma2;
}

HermitianMatrix lift_to_ris(const ComplexMatrix& H, const ComplexVector& h, const HermitianMatrix& X) {
  const ComplexMatrix DH = h.conjugate().asDiagonal() * H;
  return HermitianMatrix::from_trusted((DH * X.matrix() * DH.adjoint()).conjugate());
}

std::vector<RateMatrices> assemble_rate_matrices(const ChannelRealization& r, const AntennaPositions& pos,
                                                 const PrecodingSolution& sol) {
  const ComplexMatrix H = bs_ris_channel(r, pos);
  const HermitianMatrix S1 = sol.private_sum();
  std::vector<RateMatrices> out;
  for (int m = 0; m < r.num_users(); ++m) {
    const ComplexVector& h = r.h_ris_user[m];
    RateMatrices rm;
    rm.S1 = S1;
    rm.S2 = sol.private_sum(m);
    rm.U1 = lift_to_ris(H, h, sol.P_c);
    rm.U2 = lift_to_ris(H, h, rm.S1);
    rm.W1 = lift_to_ris(H, h, sol.P[m]);
    rm.W2 = lift_to_ris(H, h, rm.S2);
    rm.tr_Pc = sol.P_c.trace();
    rm.tr_Pm = sol.P[m].trace();
    rm.rho_hat2 = r.rho_hat2(m);
    rm.sigma2 = r.sigma2;
    out.push_back(std::move(rm));
  }
  return out;
}

namespace {

double fta(const HermitianMatrix& V, const HermitianMatrix& anchor, const HermitianMatrix& A, double offset) {
  const double d0 = trace_inner(anchor, A) + offset;
  if (!(d0 > 0.0)) throw std::domain_error("FTA: log argument at the anchor is not positive");
  return std::log2(d0) + (trace_inner(V, A) - trace_inner(anchor, A)) / (d0 * std::numbers::ln2);
}

}  // namespace

double fta_private(const HermitianMatrix& V, const HermitianMatrix& anchor, const HermitianMatrix& W2,
                   const HermitianMatrix& S2, double rho_hat2, double sigma2) {
  return fta(V, anchor, W2, rho_hat2 * S2.trace() + sigma2);
}

double fta_common(const HermitianMatrix& V, const HermitianMatrix& anchor, const HermitianMatrix& U2,
                  const HermitianMatrix& S1, double rho_hat2, double sigma2) {
  return fta(V, anchor, U2, rho_hat2 * S1.trace() + sigma2);
}

namespace {

using Coeffs = std::vector<std::pair<int, double>>;

// Affine function of the V variables: sum coeffs x + constant.
struct Affine {
  Coeffs coeffs;
  double constant = 0.0;
};

Affine trace_affine(const HermitianVariable& V, const HermitianMatrix& A, double scale) {
  return {V.trace_coeffs(A, scale), scale * V.trace_constant(A)};
}

// t <= log2(a) - log2(k) with k * a = f(V) pinned by an equality row and
// chords on [lo, hi] / k. Scaling by the anchor value keeps a near 1.
struct LogTerm {
  int t;
  double offset;  // log2(f) = t + offset
};

LogTerm add_log_of_affine(SDPProblem& pr, const Affine& f, double lo, double hi, double anchor_value,
                          const SystemConfig& c) {
  const double anchor = std::clamp(anchor_value, lo * 1.0001, hi * 0.9999);
  const double k = anchor;
  const int a = pr.add_variable();
  const int t = pr.add_variable();
  Coeffs row{{a, 1.0}};
  for (const auto& [v, w] : f.coeffs) row.emplace_back(v, -w / k);
  pr.add_eq(std::move(row), f.constant / k);
  add_log_chords(pr, t, a, log_breakpoints(lo / k, hi / k, 1.0, c.log_chord_ratio, c.log_chord_fine_ratio), 0.0);
  return {t, std::log2(k)};
}

double lambda_max_psd(const HermitianMatrix& A) { return std::max(0.0, max_eigenvalue(A)); }

}  // namespace

P6Result solve_p6(const std::vector<RateMatrices>& rm, const HermitianMatrix& anchor, const SystemConfig& c) {
  const int M = static_cast<int>(rm.size());
  if (M == 0) throw std::invalid_argument("solve_p6: no users");
  const int N = static_cast<int>(anchor.dim());
  const double s = 1.0 / rm[0].sigma2;  // work in noise-normalized units

  SDPProblem pr;
  const HermitianVariable V = HermitianVariable::add(pr, N, true);
  V.add_psd(pr, "V");
  const VarBound nonneg{0.0, std::numeric_limits<double>::infinity()};
  std::vector<int> rc(M), varpi(M), slack(M);
  for (int m = 0; m < M; ++m) {
    rc[m] = pr.add_variable(0.0, nonneg);
    varpi[m] = pr.add_variable(1.0);
    // Soft QoS: varpi + slack >= R_min. Stage 1 often leaves users exactly at
    // R_min, and the hard form then has no strictly feasible point.
    slack[m] = pr.add_variable(-kQosPenalty, {0.0, c.R_min + 1.0});
    pr.add_ineq({{varpi[m], -1.0}, {slack[m], -1.0}}, -c.R_min);
  }

  bool common_open = true;
  for (int m = 0; m < M; ++m)
    if (!(rm[m].common_numerator(anchor) > 0.0)) common_open = false;

  for (int m = 0; m < M; ++m) {
    const RateMatrices& q = rm[m];
    // Private: r_c + log2(num + den) - FTA(den) >= varpi.
    Coeffs row{{varpi[m], 1.0}, {rc[m], -1.0}};
    double rhs = 0.0;
    if (q.private_numerator(anchor) > 0.0) {
      const HermitianMatrix A = q.W1 + q.W2;
      Affine f = trace_affine(V, A, s);
      f.constant += s * (q.rho_hat2 * (q.S2.trace() - q.tr_Pm) + q.sigma2);
      const double hi = s * (N * (lambda_max_psd(q.W1) + lambda_max_psd(q.W2)) + q.rho_hat2 * q.S2.trace()) + 1.0;
      const double a0 = s * (q.private_numerator(anchor) + q.private_denominator(anchor));
      const LogTerm lt = add_log_of_affine(pr, f, 0.5, 1.01 * hi + 1.0, a0, c);
      row.emplace_back(lt.t, -1.0);
      // FTA of log2(den) in normalized units.
      const double d0 = s * q.private_denominator(anchor);
      const double k = s / (d0 * std::numbers::ln2);
      for (const auto& [v, a] : V.trace_coeffs(q.W2, k)) row.emplace_back(v, a);
      rhs = lt.offset - (std::log2(d0) + k * (V.trace_constant(q.W2) - trace_inner(anchor, q.W2)));
    }
    pr.add_ineq(std::move(row), rhs);

    // Common: log2(num + den) - FTA(den) >= sum r_c.
    if (!common_open) continue;
    Coeffs crow;
    for (int i = 0; i < M; ++i) crow.emplace_back(rc[i], 1.0);
    const HermitianMatrix A = q.U1 + q.U2;
    Affine f = trace_affine(V, A, s);
    f.constant += s * (q.rho_hat2 * (q.S1.trace() - q.tr_Pc) + q.sigma2);
    const double hi = s * (N * (lambda_max_psd(q.U1) + lambda_max_psd(q.U2)) + q.rho_hat2 * q.S1.trace()) + 1.0;
    const double a0 = s * (q.common_numerator(anchor) + q.common_denominator(anchor));
    const LogTerm lt = add_log_of_affine(pr, f, 0.5, 1.01 * hi + 1.0, a0, c);
    crow.emplace_back(lt.t, -1.0);
    const double d0 = s * q.common_denominator(anchor);
    const double k = s / (d0 * std::numbers::ln2);
    for (const auto& [v, a] : V.trace_coeffs(q.U2, k)) crow.emplace_back(v, a);
    pr.add_ineq(std::move(crow),
                lt.offset - (std::log2(d0) + k * (V.trace_constant(q.U2) - trace_inner(anchor, q.U2))));
  }
  if (!common_open) {
    Coeffs closed;
    for (int m = 0; m < M; ++m) closed.emplace_back(rc[m], 1.0);
    pr.add_ineq(std::move(closed), 0.0);
  }

  const SolverOptions opts = stage_solver_options(c);
  const auto t0 = std::chrono::steady_clock::now();
  const SolverResult res = solve(pr, opts);
  P6Result out;
  out.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  out.status = res.status;
  out.message = res.message;
  out.iterations = res.iterations;
  if (!usable(res, opts.relaxed_tol)) return out;
  out.status = SolverStatus::Optimal;
  out.V = V.value(res.x);
  out.r_c.resize(M);
  out.varpi.resize(M);
  for (int m = 0; m < M; ++m) {
    out.r_c(m) = std::max(0.0, res.x(rc[m]));
    out.varpi(m) = res.x(varpi[m]);
    out.qos_slack = std::max(out.qos_slack, res.x(slack[m]));
  }
  out.objective = res.objective_value;
  return out;
}

RisRandomization randomize_unit_modulus(const HermitianMatrix& V, const ChannelRealization& r,
                                        const AntennaPositions& pos, const PrecodingSolution& sol,
                                        const SystemConfig& c, Rng& rng) {
  const EigenDecomposition e = hermitian_eig(V);
  const int N = static_cast<int>(V.dim());
  RisRandomization out;
  out.rank_one = N == 1 || e.values(0) <= 0.0 || e.values(1) <= c.rank_threshold * e.values(0);
  const int count = out.rank_one ? 1 : std::max(1, c.randomization_count);
  std::normal_distribution<double> nd;
  bool have = false;
  for (int k = 0; k < count; ++k) {
    ComplexVector cand;
    if (k == 0) {
      cand = e.vectors.col(0);
    } else {
      ComplexVector z(N);
      for (int i = 0; i < N; ++i) z(i) = Complex(nd(rng), nd(rng)) * std::sqrt(std::max(0.0, e.values(i)) / 2.0);
      cand = e.vectors * z;
    }
    RISConfiguration ris = RISConfiguration::from_vector(cand);
    RateReport rep = worst_case_rates(r, pos, ris, sol, c.R_min);
    if (!have || preferable(rep, out.report)) {
      out.ris = std::move(ris);
      out.report = std::move(rep);
      out.feasible = out.report.qos_satisfied;
      have = true;
    }
  }
  return out;
}

RisStageResult run_ris_stage(const ChannelRealization& r, const AntennaPositions& pos, const PrecodingSolution& sol,
                             const RISConfiguration& current, const SystemConfig& c, Rng& rng,
                             const RisObserver& observer) {
  RisStageResult out;
  const std::vector<RateMatrices> rm = assemble_rate_matrices(r, pos, sol);
  HermitianMatrix anchor = current.V;
  HermitianMatrix last;
  for (int it = 0; it < c.eps2; ++it) {
    P6Result p = solve_p6(rm, anchor, c);
    out.solve_ms.push_back(p.solve_ms);
    if (p.status != SolverStatus::Optimal) {
      out.message = "P6 " + to_string(p.status) + ": " + p.message;
      break;
    }
    ++out.inner_iterations;
    if (observer) observer(p);
    const double prev = out.objectives.empty() ? 0.0 : out.objectives.back();
    out.objectives.push_back(p.objective);
    anchor = p.V;
    last = std::move(p.V);
    out.solved = true;
    if (out.objectives.size() > 1 &&
        std::abs(out.objectives.back() - prev) <= c.inner_tol * std::max(1.0, std::abs(prev)))
      break;
  }
  RateReport previous = worst_case_rates(r, pos, current, sol, c.R_min);
  if (out.solved) {
    RisRandomization rr = randomize_unit_modulus(last, r, pos, sol, c, rng);
    if (preferable(rr.report, previous) || !preferable(previous, rr.report)) {
      out.ris = std::move(rr.ris);
      out.report = std::move(rr.report);
    }
  }
  if (out.report.r_c.size() == 0) {
    out.ris = current;
    out.report = std::move(previous);
    out.kept_previous = true;
  }
  out.feasible = out.report.qos_satisfied;
  return out;
}

}  // namespace marisa
