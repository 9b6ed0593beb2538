// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/channel.hpp"
#include "marisa/conic_solver.hpp"
#include "marisa/lifted.hpp"
#include "marisa/rates.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace marisa {

// Channels divided by sigma, radii by sigma^2, sigma2 = 1.
RateInputs normalized(const RateInputs& in);

// Anchors of the product bounds u >= gamma * s for the current inner step.
struct PrecodingAnchors {
  RealVector gamma;  // private SINR targets
  RealVector zeta;   // private interference-plus-noise bounds
  double gamma_c = 1.0;
  RealVector beta;   // common-stream interference-plus-noise bounds
};

// Worst-case (ball model) signal and interference bounds of a solution,
// used as the first anchors.
PrecodingAnchors anchors_from_solution(const RateInputs& in, const PrecodingSolution& sol);

// Upper bound on gamma * s that is jointly convex and tight at the anchor:
//   ((gamma + s)^2 - 2 d (gamma - s) + d^2) / 4,  d = gamma0 - s0.
double product_bound(double gamma, double s, double gamma0, double s0);
// 2 x 2 block encoding u >= product_bound(gamma, s). Throws on nonpositive
// anchors.
LmiBlock convexify_product(int gamma, int s, int u, double gamma0, double s0);

// S-procedure blocks for
//   (g + e)^H X (g + e) >= u                 for all ||e||^2 <= rho2   (first)
//   (g + e)^H (sum Y_i) (g + e) + sigma2 <= s  for all ||e||^2 <= rho2  (second)
// with multipliers lam, mu >= 0 (bounds added by the caller).
std::pair<LmiBlock, LmiBlock> build_private_lmis(const ComplexVector& g, double rho2, double sigma2,
                                                 const HermitianVariable& signal,
                                                 const std::vector<const HermitianVariable*>& interferers, int u,
                                                 int s, int lam, int mu);
// Same construction for the common stream; interferers are all private
// covariances.
std::pair<LmiBlock, LmiBlock> build_common_lmis(const ComplexVector& g, double rho2, double sigma2,
                                                const HermitianVariable& common,
                                                const std::vector<const HermitianVariable*>& privates, int w,
                                                int beta, int lam, int mu);

struct P3Values {
  RealVector gamma, zeta, u, lambda, mu, t;
  RealVector beta, w, lambda_c, mu_c, r_c;
  double gamma_c = 0.0;
  double t_c = 0.0;
  RealVector qos_slack;  // zero unless solved with a QoS penalty
};

struct P3Result {
  SolverStatus status = SolverStatus::NumericalFailure;
  std::string message;
  PrecodingSolution lifted;
  P3Values values;
  double objective = 0.0;
  int iterations = 0;
};

// Breakpoints of the rate chords, fixed for one stage call.
struct P3Chords {
  std::vector<std::vector<double>> priv;  // per user, on gamma_m
  std::vector<double> common;             // on gamma_c
};
P3Chords p3_chords(const RateInputs& in, const PrecodingAnchors& a, const SystemConfig& c);

// With qos_penalty > 0 the QoS rows get slacks s_m in [0, R_min] charged
// qos_penalty each in the objective (restoration from an infeasible anchor).
SDPProblem build_p3(const RateInputs& in, const PrecodingAnchors& a, const P3Chords& chords, const SystemConfig& c,
                    double qos_penalty = 0.0);
// One rank-relaxed, product-convexified P3 solve (normalized inputs).
P3Result solve_p3(const RateInputs& in, const PrecodingAnchors& a, const P3Chords& chords, const SystemConfig& c,
                  double qos_penalty = 0.0);

struct RandomizationResult {
  PrecodingSolution solution;
  RateReport report;
  bool feasible = false;
  bool rank_one = false;
};

// Rank-one recovery: principal components when every covariance has
// lambda_2 / lambda_1 <= rank_threshold, else the principal candidate plus
// randomization_count - 1 draws p ~ CN(0, P) rescaled to ||p||^2 = tr(P);
// the best QoS-feasible candidate under worst-case rates wins.
RandomizationResult gaussian_randomize_precoders(const PrecodingSolution& lifted, const RateInputs& in,
                                                 const SystemConfig& c, Rng& rng);

// Matched-filter and zero-forcing starting points at several common/private
// power splits, in that order.
std::vector<PrecodingSolution> initial_precoders(const RateInputs& in, const SystemConfig& c);

using PrecodingObserver = std::function<void(const RateInputs&, const P3Result&)>;

struct PrecodingStageResult {
  bool solved = false;  // at least one P3 solve succeeded
  PrecodingSolution solution;
  RateReport report;
  bool feasible = false;
  int inner_iterations = 0;
  int restoration_iterations = 0;  // QoS-penalized solves before the first feasible anchor
  std::vector<double> objectives;
  std::string message;
};

// Inner SCA loop on P3 (at most eps1 solves), then rank-one recovery. A
// QoS-infeasible starting point is first moved by QoS-penalized solves.
PrecodingStageResult run_precoding_stage(const RateInputs& in, const PrecodingSolution& current,
                                         const SystemConfig& c, Rng& rng, const PrecodingObserver& observer = {});

}  // namespace marisa
