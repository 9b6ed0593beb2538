// SPDX-License-Identifier: Apache-2.0
#include "marisa/stage_positions.hpp"

#include "marisa/lifted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace marisa {

namespace {

struct RateTerms {
  HermitianMatrix A_num, A_den;
  double c_num = 0.0;  // numerator = g^H A_num g - c_num
  double c_den = 0.0;  // denominator = g^H A_den g + c_den
};

RateTerms rate_terms(const ChannelRealization& r, const PrecodingSolution& sol, int m, RateKind which) {
  const double r2 = r.rho_hat2(m);
  RateTerms t;
  if (which == RateKind::Private) {
    t.A_num = sol.P.at(m);
    t.A_den = sol.private_sum(m);
  } else {
    t.A_num = sol.P_c;
    t.A_den = sol.private_sum();
  }
  t.c_num = r2 * t.A_num.trace();
  t.c_den = r2 * t.A_den.trace() + r.sigma2;
  return t;
}

double quad(const ComplexVector& g, const HermitianMatrix& A) { return (g.adjoint() * A.matrix() * g)(0).real(); }

}  // namespace

double worst_case_rate(const ChannelRealization& r, const AntennaPositions& pos, const RISConfiguration& ris,
                       const PrecodingSolution& sol, int m, RateKind which) {
  const ComplexVector g = effective_user_channel(r, pos, ris, m);
  const RateTerms t = rate_terms(r, sol, m, which);
  const double num = quad(g, t.A_num) - t.c_num;
  if (num <= 0.0) return 0.0;
  return std::log2(1.0 + num / (quad(g, t.A_den) + t.c_den));
}

RateGradient rate_gradient(const ChannelRealization& r, const AntennaPositions& pos, const RISConfiguration& ris,
                           const PrecodingSolution& sol, int m, int l, RateKind which) {
  const ComplexVector g = effective_user_channel(r, pos, ris, m);
  const RateTerms t = rate_terms(r, sol, m, which);
  const double num = quad(g, t.A_num) - t.c_num;
  RateGradient out;
  if (num <= 0.0) {
    out.clamped = true;
    return out;
  }
  const double den = quad(g, t.A_den) + t.c_den;

  // g_l = f(t_l)^H b with f the transmit field-response vector.
  const ComplexVector vh = (ris.v.conjugate().array() * r.h_ris_user.at(m).array()).matrix();
  const ComplexVector b = r.Lambda.adjoint() * (r.F_r * vh);
  const Point2 tl = pos.t.at(l);
  const auto& el = r.geometry.tx_elev;
  const auto& az = r.geometry.tx_azim;
  const double k = 2.0 * std::numbers::pi / r.wavelength;
  Complex dgx = 0.0, dgy = 0.0;
  for (Eigen::Index p = 0; p < b.size(); ++p) {
    const Complex w = std::conj(std::polar(1.0, k * distance_diff(tl, el(p), az(p)))) * b(p) * Complex(0.0, -k);
    dgx += w * (std::sin(el(p)) * std::cos(az(p)));
    dgy += w * std::cos(el(p));
  }
  // d(g^H A g) = 2 Re(conj(dg_l) (A g)_l)
  const Complex an = (t.A_num.matrix() * g)(l);
  const Complex ad = (t.A_den.matrix() * g)(l);
  const double dnx = 2.0 * (std::conj(dgx) * an).real(), dny = 2.0 * (std::conj(dgy) * an).real();
  const double ddx = 2.0 * (std::conj(dgx) * ad).real(), ddy = 2.0 * (std::conj(dgy) * ad).real();
  const double s = (num + den) * std::numbers::ln2, d = den * std::numbers::ln2;
  out.dx = (dnx + ddx) / s - ddx / d;
  out.dy = (dny + ddy) / s - ddy / d;
  return out;
}

SeparationRow linearize_separation(Point2 anchor, Point2 t_j, double D) {
  const double ux = anchor.x - t_j.x, uy = anchor.y - t_j.y;
  const double n = std::hypot(ux, uy);
  if (!(n > 0.0)) throw std::invalid_argument("linearize_separation: anchor coincides with neighbor");
  SeparationRow row;
  row.ax = ux / n;
  row.ay = uy / n;
  row.rhs = D + row.ax * t_j.x + row.ay * t_j.y;
  return row;
}

bool positions_feasible(const AntennaPositions& pos, const SystemConfig& c, double tol) {
  const double h = c.A / 2.0;
  for (std::size_t i = 0; i < pos.t.size(); ++i) {
    const Point2 p = pos.t[i];
    if (std::abs(p.x) > h || std::abs(p.y) > h) return false;
    for (std::size_t j = i + 1; j < pos.t.size(); ++j)
      if (std::hypot(p.x - pos.t[j].x, p.y - pos.t[j].y) < c.D - tol) return false;
  }
  return true;
}

P8Result solve_p8_single(const ChannelRealization& r, const AntennaPositions& pos, const RISConfiguration& ris,
                         const PrecodingSolution& sol, int l, double delta, const SystemConfig& c,
                         const GradientFn& gradient) {
  if (!(delta > 0.0)) throw std::invalid_argument("solve_p8_single: trust region must be positive");
  const int M = sol.num_users();
  const Point2 t0 = pos.t.at(l);
  const double h = c.A / 2.0;
  constexpr double inf = std::numeric_limits<double>::infinity();

  // Step variables in units of delta: t = t0 + delta * xi.
  SDPProblem pr;
  const int xi = pr.add_variable(0.0, {std::max(-1.0, (-h - t0.x) / delta), std::min(1.0, (h - t0.x) / delta)});
  const int yi = pr.add_variable(0.0, {std::max(-1.0, (-h - t0.y) / delta), std::min(1.0, (h - t0.y) / delta)});
  // |xi|, |yi| for the proximal term.
  const double prox = c.proximal_weight * delta;
  const int ax = pr.add_variable(-prox, {0.0, inf});
  const int ay = pr.add_variable(-prox, {0.0, inf});
  pr.add_ineq({{xi, 1.0}, {ax, -1.0}}, 0.0);
  pr.add_ineq({{xi, -1.0}, {ax, -1.0}}, 0.0);
  pr.add_ineq({{yi, 1.0}, {ay, -1.0}}, 0.0);
  pr.add_ineq({{yi, -1.0}, {ay, -1.0}}, 0.0);

  std::vector<int> rc(M), ups(M);
  for (int m = 0; m < M; ++m) {
    rc[m] = pr.add_variable(1.0, {0.0, inf});
    ups[m] = pr.add_variable(1.0);
    const int slack = pr.add_variable(-kQosPenalty, {0.0, c.R_min + 1.0});
    pr.add_ineq({{rc[m], -1.0}, {ups[m], -1.0}, {slack, -1.0}}, -c.R_min);
  }
  double gmax = 0.0;
  for (int m = 0; m < M; ++m) {
    const RateGradient gp = gradient(r, pos, ris, sol, m, l, RateKind::Private);
    pr.add_ineq({{ups[m], 1.0}, {xi, -delta * gp.dx}, {yi, -delta * gp.dy}},
                worst_case_rate(r, pos, ris, sol, m, RateKind::Private));
    const RateGradient gc = gradient(r, pos, ris, sol, m, l, RateKind::Common);
    std::vector<std::pair<int, double>> row{{xi, -delta * gc.dx}, {yi, -delta * gc.dy}};
    for (int i = 0; i < M; ++i) row.emplace_back(rc[i], 1.0);
    pr.add_ineq(std::move(row), worst_case_rate(r, pos, ris, sol, m, RateKind::Common));
    gmax = std::max({gmax, std::abs(gp.dx), std::abs(gp.dy), std::abs(gc.dx), std::abs(gc.dy)});
  }
  // A small margin keeps solver round-off on the right side of D.
  const double D = c.D + 1e-9;
  for (std::size_t j = 0; j < pos.t.size(); ++j) {
    if (static_cast<int>(j) == l) continue;
    const SeparationRow s = linearize_separation(t0, pos.t[j], D);
    pr.add_ineq({{xi, -delta * s.ax}, {yi, -delta * s.ay}}, s.value(t0) - s.rhs);
  }

  const SolverOptions opts = stage_solver_options(c);
  SolverResult res = solve(pr, opts);
  P8Result out;
  out.status = res.status;
  out.message = res.message;
  out.position = t0;
  if (!usable(res, opts.relaxed_tol)) return out;
  out.status = SolverStatus::Optimal;
  // Flat model: every step ties, stay put.
  if (gmax == 0.0) res.x(xi) = res.x(yi) = 0.0;
  out.position = {std::clamp(t0.x + delta * res.x(xi), -h, h), std::clamp(t0.y + delta * res.x(yi), -h, h)};
  out.r_c.resize(M);
  out.upsilon.resize(M);
  for (int m = 0; m < M; ++m) {
    out.r_c(m) = std::max(0.0, res.x(rc[m]));
    out.upsilon(m) = res.x(ups[m]);
  }
  out.objective = res.objective_value;
  return out;
}

PositionStageResult run_position_stage(const ChannelRealization& r, const AntennaPositions& start,
                                       const RISConfiguration& ris, const PrecodingSolution& sol,
                                       const SystemConfig& c) {
  constexpr int kMaxHalvings = 6;
  PositionStageResult out;
  out.positions = start;
  out.report = worst_case_rates(r, start, ris, sol, c.R_min);
  const int L = static_cast<int>(start.t.size());
  for (int sweep = 0; sweep < c.eps3; ++sweep) {
    const double before = out.report.sum_rate;
    for (int l = 0; l < L; ++l) {
      double delta = c.initial_trust_region();
      for (int attempt = 0; attempt <= kMaxHalvings; ++attempt, delta /= 2.0) {
        const P8Result p = solve_p8_single(r, out.positions, ris, sol, l, delta, c);
        if (p.status != SolverStatus::Optimal) break;
        const Point2 old = out.positions.t[l];
        if (std::hypot(p.position.x - old.x, p.position.y - old.y) <= 1e-12) break;
        AntennaPositions trial = out.positions;
        trial.t[l] = p.position;
        RateReport rep = worst_case_rates(r, trial, ris, sol, c.R_min);
        if (positions_feasible(trial, c) && !preferable(out.report, rep)) {
          out.positions = std::move(trial);
          out.report = std::move(rep);
          ++out.accepted;
          break;
        }
        ++out.rejected;
      }
    }
    ++out.sweeps;
    out.sweep_rates.push_back(out.report.sum_rate);
    if (std::abs(out.report.sum_rate - before) <= c.inner_tol * std::max(1.0, std::abs(before))) break;
  }
  return out;
}

}  // namespace marisa
