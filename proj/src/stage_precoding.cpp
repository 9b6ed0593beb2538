// SPDX-License-Identifier: Apache-2.0
#include "marisa/stage_precoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marisa {

namespace {

double quad(const ComplexVector& g, const HermitianMatrix& X) { return (g.adjoint() * X.matrix() * g)(0).real(); }

double psd_max(const HermitianMatrix& X) { return std::max(0.0, max_eigenvalue(X)); }

double signal_low(const ComplexVector& g, double rho2, const HermitianMatrix& X) {
  const double a = std::sqrt(std::max(0.0, quad(g, X))) - std::sqrt(rho2 * psd_max(X));
  return a > 0.0 ? a * a : 0.0;
}

double interference_high(const ComplexVector& g, double rho2, const HermitianMatrix& S, double sigma2) {
  const double a = std::sqrt(std::max(0.0, quad(g, S))) + std::sqrt(rho2 * psd_max(S));
  return a * a + sigma2;
}

// T^H [I g]^H E [I g] T with T = diag(I, 1/c): the congruence keeps the
// corner on the same scale as the top-left block.
ComplexMatrix lift_quadratic(const ComplexVector& g, const ComplexMatrix& E, double c) {
  const Eigen::Index L = g.size();
  ComplexMatrix M(L + 1, L + 1);
  const ComplexVector Eg = E * g / c;
  M.topLeftCorner(L, L) = E;
  M.topRightCorner(L, 1) = Eg;
  M.bottomLeftCorner(1, L) = Eg.adjoint();
  M(L, L) = g.dot(Eg) / c;
  return M;
}

void add_multiplier(LmiBlock& b, int var, int L, double rho2, double c) {
  for (int i = 0; i < L; ++i) b.add_term(var, i, i, 1.0);
  b.add_term(var, L, L, -rho2 / (c * c));
}

std::pair<LmiBlock, LmiBlock> robust_pair(const ComplexVector& g, double rho2, double sigma2,
                                          const HermitianVariable& signal,
                                          const std::vector<const HermitianVariable*>& interferers, int u, int s,
                                          int lam, int mu, const std::string& tag) {
  const int L = static_cast<int>(g.size());
  if (signal.dim() != L) throw std::invalid_argument("robust LMIs: channel and covariance sizes differ");
  const double c = std::max(g.norm(), 1e-3);
  const double c2 = c * c;
  auto map = [&g, c](const ComplexMatrix& E) { return lift_quadratic(g, E, c); };

  LmiBlock a(L + 1, tag + "_signal");
  signal.add_map(a, map);
  add_multiplier(a, lam, L, rho2, c);
  a.add_term(u, L, L, -1.0 / c2);

  LmiBlock b(L + 1, tag + "_interference");
  for (const auto* y : interferers) {
    if (y->dim() != L) throw std::invalid_argument("robust LMIs: interferer size differs");
    y->add_map(b, map, -1.0);
  }
  add_multiplier(b, mu, L, rho2, c);
  b.add_term(s, L, L, 1.0 / c2);
  b.add_constant(L, L, -sigma2 / c2);
  return {std::move(a), std::move(b)};
}

// Zero-radius limit of the pair as 1 x 1 blocks. The S-procedure form only
// reaches it as the multipliers grow without bound.
std::pair<LmiBlock, LmiBlock> nominal_pair(const ComplexVector& g, double sigma2, const HermitianVariable& signal,
                                           const std::vector<const HermitianVariable*>& interferers, int u, int s,
                                           const std::string& tag) {
  const double c = std::max(g.norm(), 1e-3);
  const double c2 = c * c;
  auto corner = [&g, c](const ComplexMatrix& E) {
    ComplexMatrix M(1, 1);
    M(0, 0) = g.dot(E * g) / (c * c);
    return M;
  };
  LmiBlock a(1, tag + "_signal");
  signal.add_map(a, corner);
  a.add_term(u, 0, 0, -1.0 / c2);
  LmiBlock b(1, tag + "_interference");
  for (const auto* y : interferers) y->add_map(b, corner, -1.0);
  b.add_term(s, 0, 0, 1.0 / c2);
  b.add_constant(0, 0, -sigma2 / c2);
  return {std::move(a), std::move(b)};
}

}  // namespace

RateInputs normalized(const RateInputs& in) {
  RateInputs out;
  const double s = std::sqrt(in.sigma2);
  for (const auto& g : in.g) out.g.push_back(g / s);
  out.rho_hat2 = in.rho_hat2 / in.sigma2;
  out.sigma2 = 1.0;
  return out;
}

PrecodingAnchors anchors_from_solution(const RateInputs& in, const PrecodingSolution& sol) {
  const int M = sol.num_users();
  PrecodingAnchors a;
  a.gamma.resize(M);
  a.zeta.resize(M);
  a.beta.resize(M);
  const HermitianMatrix S1 = sol.private_sum();
  double gc = 1e300;
  for (int m = 0; m < M; ++m) {
    const double r2 = in.rho_hat2(m);
    a.zeta(m) = interference_high(in.g[m], r2, sol.private_sum(m), in.sigma2);
    a.gamma(m) = std::max(signal_low(in.g[m], r2, sol.P[m]) / a.zeta(m), 1e-3);
    a.beta(m) = interference_high(in.g[m], r2, S1, in.sigma2);
    gc = std::min(gc, signal_low(in.g[m], r2, sol.P_c) / a.beta(m));
  }
  a.gamma_c = std::max(gc, 1e-3);
  return a;
}

double product_bound(double gamma, double s, double gamma0, double s0) {
  const double d = gamma0 - s0;
  return ((gamma + s) * (gamma + s) - 2.0 * d * (gamma - s) + d * d) / 4.0;
}

LmiBlock convexify_product(int gamma, int s, int u, double gamma0, double s0) {
  if (!(gamma0 > 0.0 && s0 > 0.0)) throw std::invalid_argument("convexify_product: anchor must be positive");
  const double k = gamma0 + s0;
  const double d = gamma0 - s0;
  // [[k, gamma + s], [gamma + s, (4u + 2d(gamma - s) - d^2) / k]] >= 0
  LmiBlock b(2, "product");
  b.add_constant(0, 0, k);
  b.add_term(gamma, 0, 1, 1.0);
  b.add_term(s, 0, 1, 1.0);
  b.add_term(u, 1, 1, 4.0 / k);
  b.add_term(gamma, 1, 1, 2.0 * d / k);
  b.add_term(s, 1, 1, -2.0 * d / k);
  b.add_constant(1, 1, -d * d / k);
  return b;
}

std::pair<LmiBlock, LmiBlock> build_private_lmis(const ComplexVector& g, double rho2, double sigma2,
                                                 const HermitianVariable& signal,
                                                 const std::vector<const HermitianVariable*>& interferers, int u,
                                                 int s, int lam, int mu) {
  return robust_pair(g, rho2, sigma2, signal, interferers, u, s, lam, mu, "private");
}

std::pair<LmiBlock, LmiBlock> build_common_lmis(const ComplexVector& g, double rho2, double sigma2,
                                                const HermitianVariable& common,
                                                const std::vector<const HermitianVariable*>& privates, int w,
                                                int beta, int lam, int mu) {
  return robust_pair(g, rho2, sigma2, common, privates, w, beta, lam, mu, "common");
}

P3Chords p3_chords(const RateInputs& in, const PrecodingAnchors& a, const SystemConfig& c) {
  P3Chords ch;
  double hi_c = 1e300;
  for (std::size_t m = 0; m < in.g.size(); ++m) {
    const double hi = c.P_t * in.g[m].squaredNorm() / in.sigma2 * 1.01 + 1.0;
    ch.priv.push_back(log_breakpoints(0.0, hi, a.gamma(m), c.log_chord_ratio, c.log_chord_fine_ratio));
    hi_c = std::min(hi_c, hi);
  }
  ch.common = log_breakpoints(0.0, hi_c, a.gamma_c, c.log_chord_ratio, c.log_chord_fine_ratio);
  return ch;
}

namespace {

struct P3Layout {
  HermitianVariable Pc;
  std::vector<HermitianVariable> P;
  std::vector<int> gamma, t, zeta, u, lam, mu, beta, w, lamc, muc, rc, slack;
  int gamma_c = 0, t_c = 0;
};

P3Layout layout_p3(SDPProblem& pr, const RateInputs& in, const PrecodingAnchors& a, const P3Chords& ch,
                   const SystemConfig& c, double qos_penalty) {
  const int M = static_cast<int>(in.g.size());
  const int L = static_cast<int>(in.g.at(0).size());
  P3Layout v;
  v.Pc = HermitianVariable::add(pr, L);
  for (int m = 0; m < M; ++m) v.P.push_back(HermitianVariable::add(pr, L));
  const VarBound nonneg{0.0, std::numeric_limits<double>::infinity()};
  for (int m = 0; m < M; ++m) {
    v.gamma.push_back(pr.add_variable());
    v.t.push_back(pr.add_variable(1.0));
    v.zeta.push_back(pr.add_variable(0.0, {in.sigma2, std::numeric_limits<double>::infinity()}));
    v.u.push_back(pr.add_variable(0.0, nonneg));
    const bool robust = in.rho_hat2(m) > 0.0;
    v.lam.push_back(robust ? pr.add_variable(0.0, nonneg) : -1);
    v.mu.push_back(robust ? pr.add_variable(0.0, nonneg) : -1);
    v.beta.push_back(pr.add_variable(0.0, {in.sigma2, std::numeric_limits<double>::infinity()}));
    v.w.push_back(pr.add_variable(0.0, nonneg));
    v.lamc.push_back(robust ? pr.add_variable(0.0, nonneg) : -1);
    v.muc.push_back(robust ? pr.add_variable(0.0, nonneg) : -1);
    v.rc.push_back(pr.add_variable(1.0, nonneg));
    if (qos_penalty > 0.0) v.slack.push_back(pr.add_variable(-qos_penalty, {0.0, c.R_min}));
  }
  v.gamma_c = pr.add_variable();
  v.t_c = pr.add_variable();

  v.Pc.add_psd(pr, "P_c");
  for (int m = 0; m < M; ++m) v.P[m].add_psd(pr, "P_" + std::to_string(m));

  std::vector<std::pair<int, double>> power = v.Pc.trace_coeffs(HermitianMatrix::identity(L));
  for (const auto& p : v.P)
    for (const auto& e : p.trace_coeffs(HermitianMatrix::identity(L))) power.push_back(e);
  pr.add_ineq(std::move(power), c.P_t);

  std::vector<const HermitianVariable*> all;
  for (const auto& p : v.P) all.push_back(&p);
  std::vector<std::pair<int, double>> common_sum{{v.t_c, -1.0}};
  for (int m = 0; m < M; ++m) {
    std::vector<const HermitianVariable*> others;
    for (int i = 0; i < M; ++i)
      if (i != m) others.push_back(&v.P[i]);
    const bool robust = in.rho_hat2(m) > 0.0;
    auto [s19, s20] = robust ? build_private_lmis(in.g[m], in.rho_hat2(m), in.sigma2, v.P[m], others, v.u[m],
                                                  v.zeta[m], v.lam[m], v.mu[m])
                             : nominal_pair(in.g[m], in.sigma2, v.P[m], others, v.u[m], v.zeta[m], "private");
    pr.lmi_blocks.push_back(std::move(s19));
    pr.lmi_blocks.push_back(std::move(s20));
    pr.lmi_blocks.push_back(convexify_product(v.gamma[m], v.zeta[m], v.u[m], a.gamma(m), a.zeta(m)));
    add_log_chords(pr, v.t[m], v.gamma[m], ch.priv[m], 1.0);

    auto [s22, s23] =
        robust ? build_common_lmis(in.g[m], in.rho_hat2(m), in.sigma2, v.Pc, all, v.w[m], v.beta[m], v.lamc[m],
                                   v.muc[m])
               : nominal_pair(in.g[m], in.sigma2, v.Pc, all, v.w[m], v.beta[m], "common");
    pr.lmi_blocks.push_back(std::move(s22));
    pr.lmi_blocks.push_back(std::move(s23));
    pr.lmi_blocks.push_back(convexify_product(v.gamma_c, v.beta[m], v.w[m], a.gamma_c, a.beta(m)));

    if (qos_penalty > 0.0)
      pr.add_ineq({{v.rc[m], -1.0}, {v.t[m], -1.0}, {v.slack[m], -1.0}}, -c.R_min);
    else
      pr.add_ineq({{v.rc[m], -1.0}, {v.t[m], -1.0}}, -c.R_min);
    common_sum.emplace_back(v.rc[m], 1.0);
  }
  pr.add_ineq(std::move(common_sum), 0.0);
  add_log_chords(pr, v.t_c, v.gamma_c, ch.common, 1.0);
  return v;
}

// Absent variables (index -1) read as zero.
RealVector pick(const RealVector& x, const std::vector<int>& idx) {
  RealVector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = idx[i] >= 0 ? x(idx[i]) : 0.0;
  return out;
}

}  // namespace

SDPProblem build_p3(const RateInputs& in, const PrecodingAnchors& a, const P3Chords& chords, const SystemConfig& c,
                    double qos_penalty) {
  SDPProblem pr;
  layout_p3(pr, in, a, chords, c, qos_penalty);
  return pr;
}

P3Result solve_p3(const RateInputs& in, const PrecodingAnchors& a, const P3Chords& chords, const SystemConfig& c,
                  double qos_penalty) {
  SDPProblem pr;
  const P3Layout v = layout_p3(pr, in, a, chords, c, qos_penalty);
  const SolverOptions opts = stage_solver_options(c);
  const SolverResult res = solve(pr, opts);
  P3Result out;
  out.status = res.status;
  out.message = res.message;
  out.iterations = res.iterations;
  if (!usable(res, opts.relaxed_tol)) return out;
  out.status = SolverStatus::Optimal;
  const RealVector& x = res.x;
  std::vector<HermitianMatrix> P;
  for (const auto& p : v.P) P.push_back(p.value(x));
  out.lifted = PrecodingSolution::from_lifted(v.Pc.value(x), P);
  out.values.gamma = pick(x, v.gamma);
  out.values.zeta = pick(x, v.zeta);
  out.values.u = pick(x, v.u);
  out.values.lambda = pick(x, v.lam);
  out.values.mu = pick(x, v.mu);
  out.values.t = pick(x, v.t);
  out.values.beta = pick(x, v.beta);
  out.values.w = pick(x, v.w);
  out.values.lambda_c = pick(x, v.lamc);
  out.values.mu_c = pick(x, v.muc);
  out.values.r_c = pick(x, v.rc).cwiseMax(0.0);
  out.values.gamma_c = x(v.gamma_c);
  out.values.t_c = x(v.t_c);
  out.values.qos_slack = v.slack.empty() ? RealVector::Zero(in.g.size()) : RealVector(pick(x, v.slack).cwiseMax(0.0));
  out.lifted.r_c = out.values.r_c;
  out.objective = res.objective_value;
  return out;
}

RandomizationResult gaussian_randomize_precoders(const PrecodingSolution& lifted, const RateInputs& in,
                                                 const SystemConfig& c, Rng& rng) {
  const int M = lifted.num_users();
  const int L = lifted.num_antennas();
  std::vector<EigenDecomposition> eig;
  eig.push_back(hermitian_eig(lifted.P_c));
  for (const auto& p : lifted.P) eig.push_back(hermitian_eig(p));

  RandomizationResult out;
  out.rank_one = true;
  for (const auto& e : eig) {
    const double top = e.values(0);
    if (top > 0.0 && L > 1 && e.values(1) > c.rank_threshold * top) out.rank_one = false;
  }

  auto principal = [&](const EigenDecomposition& e, double power) -> ComplexVector {
    if (power <= 0.0 || e.values(0) <= 0.0) return ComplexVector::Zero(L);
    return std::sqrt(power) * e.vectors.col(0);
  };
  std::normal_distribution<double> nd;
  auto draw = [&](const EigenDecomposition& e, double power) -> ComplexVector {
    if (power <= 0.0) return ComplexVector::Zero(L);
    ComplexVector z(L);
    for (int i = 0; i < L; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      z(i) = Complex(re, im) * std::sqrt(std::max(0.0, e.values(i)) / 2.0);
    }
    ComplexVector p = e.vectors * z;
    const double n = p.norm();
    return n > 0.0 ? ComplexVector(p * (std::sqrt(power) / n)) : principal(e, power);
  };

  std::vector<double> powers{lifted.P_c.trace()};
  for (const auto& p : lifted.P) powers.push_back(p.trace());

  const int count = out.rank_one ? 1 : std::max(1, c.randomization_count);
  bool have = false;
  for (int k = 0; k < count; ++k) {
    std::vector<ComplexVector> vecs;
    for (int i = 0; i <= M; ++i) vecs.push_back(k == 0 ? principal(eig[i], powers[i]) : draw(eig[i], powers[i]));
    const ComplexVector pc = vecs[0];
    vecs.erase(vecs.begin());
    PrecodingSolution cand = PrecodingSolution::from_vectors(pc, vecs);
    RateReport rep = evaluate_rates(in, cand, c.R_min);
    if (!have || preferable(rep, out.report)) {
      cand.r_c = rep.r_c;
      out.solution = std::move(cand);
      out.report = std::move(rep);
      out.feasible = out.report.qos_satisfied;
      have = true;
    }
  }
  return out;
}

std::vector<PrecodingSolution> initial_precoders(const RateInputs& in, const SystemConfig& c) {
  const int M = static_cast<int>(in.g.size());
  const int L = static_cast<int>(in.g.at(0).size());
  ComplexVector mf_c = ComplexVector::Zero(L);
  for (const auto& g : in.g) mf_c += g / std::max(g.norm(), 1e-300);
  if (mf_c.norm() == 0.0) mf_c = ComplexVector::Unit(L, 0);
  mf_c.normalize();

  std::vector<ComplexVector> mf, zf;
  for (const auto& g : in.g) mf.push_back(g.norm() > 0 ? ComplexVector(g / g.norm()) : ComplexVector::Unit(L, 0));
  if (L >= M) {
    ComplexMatrix G(L, M);
    for (int m = 0; m < M; ++m) G.col(m) = in.g[m];
    const ComplexMatrix W = G * (G.adjoint() * G).completeOrthogonalDecomposition().pseudoInverse();
    for (int m = 0; m < M; ++m) {
      const double n = W.col(m).norm();
      if (!(n > 0.0) || !std::isfinite(n)) {
        zf.clear();
        break;
      }
      zf.push_back(W.col(m) / n);
    }
  }

  auto make = [&](const std::vector<ComplexVector>& dirs, double common_share) {
    const double pc = c.P_t * common_share;
    const double pp = c.P_t * (1.0 - common_share) / M;
    std::vector<ComplexVector> p;
    for (const auto& d : dirs) p.push_back(std::sqrt(pp) * d);
    return PrecodingSolution::from_vectors(std::sqrt(pc) * mf_c, p);
  };
  std::vector<PrecodingSolution> out{make(mf, 0.5)};
  if (!zf.empty())
    for (double share : {0.5, 0.25, 0.1}) out.push_back(make(zf, share));
  for (double share : {0.25, 0.75}) out.push_back(make(mf, share));
  return out;
}

PrecodingStageResult run_precoding_stage(const RateInputs& in, const PrecodingSolution& current,
                                         const SystemConfig& c, Rng& rng, const PrecodingObserver& observer) {
  constexpr int kMaxRestoration = 10;
  PrecodingStageResult out;
  PrecodingAnchors anchors = anchors_from_solution(in, current);
  const P3Chords chords = p3_chords(in, anchors, c);
  double penalty = evaluate_rates(in, current, c.R_min).qos_satisfied ? 0.0 : kQosPenalty;
  P3Result last;
  int restoration = 0;
  for (int it = 0; it < c.eps1;) {
    P3Result r = solve_p3(in, anchors, chords, c, penalty);
    if (r.status != SolverStatus::Optimal) {
      out.message = "P3 " + to_string(r.status) + ": " + r.message;
      break;
    }
    for (int m = 0; m < static_cast<int>(in.g.size()); ++m) {
      anchors.gamma(m) = std::max(r.values.gamma(m), 1e-6);
      anchors.zeta(m) = std::max(r.values.zeta(m), in.sigma2);
      anchors.beta(m) = std::max(r.values.beta(m), in.sigma2);
    }
    anchors.gamma_c = std::max(r.values.gamma_c, 1e-6);
    if (penalty > 0.0) {
      // Restoration steps do not count toward the inner budget.
      ++out.restoration_iterations;
      if (r.values.qos_slack.maxCoeff() <= 1e-6) {
        penalty = 0.0;
      } else if (++restoration >= kMaxRestoration) {
        out.message = "QoS restoration did not reach a feasible anchor";
        break;
      }
      continue;
    }
    ++it;
    ++out.inner_iterations;
    if (observer) observer(in, r);
    const double prev = out.objectives.empty() ? 0.0 : out.objectives.back();
    out.objectives.push_back(r.objective);
    last = std::move(r);
    out.solved = true;
    if (out.objectives.size() > 1 &&
        std::abs(out.objectives.back() - prev) <= c.inner_tol * std::max(1.0, std::abs(prev)))
      break;
  }
  if (!out.solved) return out;
  RandomizationResult rr = gaussian_randomize_precoders(last.lifted, in, c, rng);
  out.solution = std::move(rr.solution);
  out.report = std::move(rr.report);
  out.feasible = rr.feasible;
  return out;
}

}  // namespace marisa
