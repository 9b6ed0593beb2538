// SPDX-License-Identifier: Apache-2.0
#include "marisa/stage_precoding.hpp"
#include "marisa/stage_ris.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace marisa;

namespace {

ComplexVector random_vec(int n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> nd;
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * Complex(nd(rng), nd(rng));
  return v;
}

// Random PSD matrix with unit diagonal: normalized Gram matrix of rank r.
HermitianMatrix random_unit_diag_psd(int n, int rank, Rng& rng) {
  ComplexMatrix B(rank, n);
  for (int j = 0; j < n; ++j) {
    const ComplexVector col = random_vec(rank, rng);
    B.col(j) = col / col.norm();
  }
  return HermitianMatrix::from_trusted(B.adjoint() * B);
}

struct Scenario {
  SystemConfig c;
  ChannelRealization real;
  AntennaPositions pos;
  RISConfiguration ris;
  PrecodingSolution sol;
};

// Stage-1 precoders at the all-ones RIS.
Scenario stage_one_scenario(int seed, SystemConfig c = {}) {
  Scenario s;
  s.c = c;
  Rng rng = make_rng(seed, 0);
  s.real = sample_realization(c, rng);
  s.pos = initial_positions(c);
  s.ris = RISConfiguration::all_ones(c.N);
  const RateInputs in = normalized(rate_inputs(s.real, s.pos, s.ris));
  PrecodingSolution start;
  double best = -1.0;
  for (const auto& p : initial_precoders(in, c)) {
    const double v = evaluate_rates(in, p, c.R_min).sum_rate;
    if (v > best) {
      best = v;
      start = p;
    }
  }
  const PrecodingStageResult r = run_precoding_stage(in, start, c, rng);
  s.sol = r.solved ? r.solution : start;
  return s;
}

double clamped_rate(double num, double den) { return std::log2(1.0 + std::max(0.0, num) / den); }

}  // namespace

TEST(RateMatrices, ZeroPrecodersGiveZeroMatrices) {
  SystemConfig c;
  Rng rng = make_rng(3, 0);
  const ChannelRealization real = sample_realization(c, rng);
  std::vector<ComplexVector> p(c.M, ComplexVector::Zero(c.L));
  const PrecodingSolution sol = PrecodingSolution::from_vectors(ComplexVector::Zero(c.L), p);
  for (const auto& rm : assemble_rate_matrices(real, initial_positions(c), sol)) {
    EXPECT_EQ(rm.U1.matrix().norm(), 0.0);
    EXPECT_EQ(rm.U2.matrix().norm(), 0.0);
    EXPECT_EQ(rm.W1.matrix().norm(), 0.0);
    EXPECT_EQ(rm.W2.matrix().norm(), 0.0);
    EXPECT_EQ(rm.S1.matrix().norm(), 0.0);
    EXPECT_EQ(rm.S2.matrix().norm(), 0.0);
  }
}

TEST(RateMatrices, TraceMatchesDirectEvaluation) {
  SystemConfig c;
  Rng rng = make_rng(4, 0);
  const ChannelRealization real = sample_realization(c, rng);
  const AntennaPositions pos = initial_positions(c);
  const ComplexVector pc = random_vec(c.L, rng);
  std::vector<ComplexVector> p;
  for (int m = 0; m < c.M; ++m) p.push_back(random_vec(c.L, rng));
  const PrecodingSolution sol = PrecodingSolution::from_vectors(pc, p);
  const auto rms = assemble_rate_matrices(real, pos, sol);
  const ComplexMatrix H = bs_ris_channel(real, pos);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 5; ++trial) {
    RealVector phases(c.N);
    for (int i = 0; i < c.N; ++i) phases(i) = ph(rng);
    const RISConfiguration ris = RISConfiguration::from_phases(phases);
    for (int m = 0; m < c.M; ++m) {
      const Complex hp = (real.h_ris_user[m].adjoint() * ris.v.asDiagonal() * H * p[m])(0, 0);
      const double direct = std::norm(hp);
      EXPECT_NEAR(trace_inner(ris.V, rms[m].W1), direct, 1e-9 * (1.0 + direct));
      const Complex hc = (real.h_ris_user[m].adjoint() * ris.v.asDiagonal() * H * pc)(0, 0);
      EXPECT_NEAR(trace_inner(ris.V, rms[m].U1), std::norm(hc), 1e-9 * (1.0 + std::norm(hc)));
    }
  }
  for (int m = 0; m < c.M; ++m) {
    EXPECT_LT((rms[m].S2.matrix() - (rms[m].S1.matrix() - sol.P[m].matrix())).norm(), 1e-12);
    EXPECT_EQ(rms[m].tr_Pm, sol.P[m].trace());
  }
}

TEST(Fta, TightAtAnchorAndUpperBound) {
  Rng rng = make_rng(5, 0);
  const int N = 6;
  for (int rep = 0; rep < 10; ++rep) {
    const ComplexVector a = random_vec(N, rng);
    const ComplexVector b = random_vec(N, rng);
    const HermitianMatrix W2 = HermitianMatrix::from_trusted(a * a.adjoint() + b * b.adjoint());
    const HermitianMatrix S2 = HermitianMatrix::from_trusted(ComplexMatrix::Identity(3, 3) * 0.5);
    const double rho2 = 0.1, sigma2 = 0.3;
    const HermitianMatrix anchor = random_unit_diag_psd(N, 1 + rep % 3, rng);
    const double arg0 = trace_inner(anchor, W2) + rho2 * S2.trace() + sigma2;
    EXPECT_NEAR(fta_private(anchor, anchor, W2, S2, rho2, sigma2), std::log2(arg0), 1e-10);
    EXPECT_NEAR(fta_common(anchor, anchor, W2, S2, rho2, sigma2), std::log2(arg0), 1e-10);
    for (int k = 0; k < 1000; ++k) {
      const HermitianMatrix V = random_unit_diag_psd(N, 1 + k % N, rng);
      const double arg = trace_inner(V, W2) + rho2 * S2.trace() + sigma2;
      EXPECT_GE(fta_private(V, anchor, W2, S2, rho2, sigma2), std::log2(arg) - 1e-12);
    }
  }
}

TEST(Fta, ZeroMatrixIsConstant) {
  Rng rng = make_rng(6, 0);
  const HermitianMatrix Z = HermitianMatrix::from_trusted(ComplexMatrix::Zero(4, 4));
  const HermitianMatrix S = HermitianMatrix::from_trusted(ComplexMatrix::Identity(2, 2));
  const HermitianMatrix anchor = random_unit_diag_psd(4, 2, rng);
  const double want = std::log2(0.2 * 2.0 + 1.5);
  for (int k = 0; k < 20; ++k)
    EXPECT_NEAR(fta_private(random_unit_diag_psd(4, 3, rng), anchor, Z, S, 0.2, 1.5), want, 1e-14);
}

TEST(Fta, RejectsNonpositiveArgument) {
  const HermitianMatrix Z = HermitianMatrix::from_trusted(ComplexMatrix::Zero(2, 2));
  const HermitianMatrix I = HermitianMatrix::from_trusted(ComplexMatrix::Identity(2, 2));
  EXPECT_THROW(fta_private(I, I, Z, Z, 0.0, 0.0), std::domain_error);
  EXPECT_THROW(fta_common(I, I, Z, Z, 0.0, -1.0), std::domain_error);
}

TEST(SolveP6, RowsImplyTrueRates) {
  for (int seed : {1, 2}) {
    const Scenario s = stage_one_scenario(seed);
    const auto rms = assemble_rate_matrices(s.real, s.pos, s.sol);
    const P6Result p = solve_p6(rms, s.ris.V, s.c);
    ASSERT_EQ(p.status, SolverStatus::Optimal) << p.message;
    for (int i = 0; i < s.c.N; ++i) EXPECT_NEAR(p.V(i, i).real(), 1.0, 1e-12);
    EXPECT_GE(min_eigenvalue(p.V), -1e-6);
    for (int m = 0; m < s.c.M; ++m) {
      const RateMatrices& q = rms[m];
      const double priv = clamped_rate(q.private_numerator(p.V), q.private_denominator(p.V));
      const double comm = clamped_rate(q.common_numerator(p.V), q.common_denominator(p.V));
      EXPECT_GE(p.r_c(m) + priv, p.varpi(m) - 1e-5);
      EXPECT_LE(p.r_c.sum(), comm + 1e-5);
    }
  }
}

TEST(SolveP6, SingleElementReproducesFixedRates) {
  SystemConfig c;
  c.N = 1;
  c.R_min = 0.0;
  const Scenario s = stage_one_scenario(1, c);
  const RateReport rep = worst_case_rates(s.real, s.pos, s.ris, s.sol, c.R_min);
  ASSERT_TRUE(rep.qos_satisfied);
  const P6Result p = solve_p6(assemble_rate_matrices(s.real, s.pos, s.sol), s.ris.V, c);
  ASSERT_EQ(p.status, SolverStatus::Optimal) << p.message;
  EXPECT_NEAR(p.V(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(p.objective, rep.sum_rate, 1e-4 * (1.0 + rep.sum_rate));
}

TEST(RisStage, SingleUserMatchesPhaseGrid) {
  SystemConfig c;
  c.M = 1;
  c.N = 2;
  c.rho = 0.0;
  c.R_min = 0.0;
  c.eps2 = 30;
  c.inner_tol = 1e-9;
  Rng rng = make_rng(7, 0);
  const ChannelRealization real = sample_realization(c, rng);
  const AntennaPositions pos = initial_positions(c);
  const ComplexVector pc = random_vec(c.L, rng);
  const ComplexVector p1 = random_vec(c.L, rng);
  const double scale = std::sqrt(c.P_t / (pc.squaredNorm() + p1.squaredNorm()));
  const PrecodingSolution sol = PrecodingSolution::from_vectors(scale * pc, {scale * p1});

  // Single user: common + private = log2(1 + g^H (P_c + P_1) g / sigma2).
  const HermitianMatrix Ptot = HermitianMatrix::from_trusted(sol.P_c.matrix() + sol.P[0].matrix());
  const ComplexMatrix H = bs_ris_channel(real, pos);
  double grid_best = 0.0;
  ComplexVector v(2);
  for (int a = 0; a < 360; ++a)
    for (int b = 0; b < 360; ++b) {
      v << std::polar(1.0, a * std::numbers::pi / 180.0), std::polar(1.0, b * std::numbers::pi / 180.0);
      const ComplexVector g = effective_user_channel(real, H, v, 0);
      const double val = std::log2(1.0 + (g.adjoint() * Ptot.matrix() * g)(0, 0).real() / real.sigma2);
      grid_best = std::max(grid_best, val);
    }

  const auto rms = assemble_rate_matrices(real, pos, sol);
  HermitianMatrix last;
  Rng rr = make_rng(7, 1);
  const RisStageResult res =
      run_ris_stage(real, pos, sol, RISConfiguration::all_ones(2), c, rr, [&](const P6Result& p) { last = p.V; });
  ASSERT_TRUE(res.solved) << res.message;
  const double lifted = clamped_rate(trace_inner(last, rms[0].U1) + trace_inner(last, rms[0].W1), real.sigma2);
  EXPECT_GE(lifted, grid_best - 1e-6 * grid_best);
  EXPECT_GE(res.report.sum_rate, 0.98 * grid_best);
}

TEST(RisStage, ScaObjectiveNondecreasingAndNeverWorse) {
  SystemConfig c;
  c.eps2 = 5;
  for (int seed : {1, 3, 5}) {
    const Scenario s = stage_one_scenario(seed, c);
    Rng rng = make_rng(seed, 1);
    const RisStageResult res = run_ris_stage(s.real, s.pos, s.sol, s.ris, c, rng);
    ASSERT_TRUE(res.solved) << res.message;
    for (std::size_t k = 1; k < res.objectives.size(); ++k)
      EXPECT_GE(res.objectives[k], res.objectives[k - 1] - 1e-6 * (1.0 + std::abs(res.objectives[k - 1])));
    const RateReport before = worst_case_rates(s.real, s.pos, s.ris, s.sol, c.R_min);
    EXPECT_FALSE(preferable(before, res.report));
    for (int i = 0; i < c.N; ++i) EXPECT_NEAR(std::abs(res.ris.v(i)), 1.0, 1e-12);
  }
}

TEST(UnitModulus, RankOneRecoversVectorUpToPhase) {
  const Scenario s = stage_one_scenario(2);
  Rng rng = make_rng(8, 0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  RealVector phases(s.c.N);
  for (int i = 0; i < s.c.N; ++i) phases(i) = ph(rng);
  const RISConfiguration target = RISConfiguration::from_phases(phases);
  const RisRandomization r = randomize_unit_modulus(target.V, s.real, s.pos, s.sol, s.c, rng);
  EXPECT_TRUE(r.rank_one);
  EXPECT_NEAR(std::abs(target.v.dot(r.ris.v)), static_cast<double>(s.c.N), 1e-9);
}

TEST(UnitModulus, ProjectionAlwaysUnitModulus) {
  const Scenario s = stage_one_scenario(2);
  Rng rng = make_rng(9, 0);
  SystemConfig c = s.c;
  c.randomization_count = 50;
  for (int rank : {2, 4}) {
    const RisRandomization r = randomize_unit_modulus(random_unit_diag_psd(c.N, rank, rng), s.real, s.pos, s.sol, c, rng);
    EXPECT_FALSE(r.rank_one);
    for (int i = 0; i < c.N; ++i) EXPECT_NEAR(std::abs(r.ris.v(i)), 1.0, 1e-12);
    EXPECT_LT((r.ris.V.matrix() - r.ris.v * r.ris.v.adjoint()).norm(), 1e-12);
  }
}

TEST(UnitModulus, GlobalPhaseInvariance) {
  const Scenario s = stage_one_scenario(3);
  Rng rng = make_rng(10, 0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  RealVector phases(s.c.N);
  for (int i = 0; i < s.c.N; ++i) phases(i) = ph(rng);
  const RateReport a = worst_case_rates(s.real, s.pos, RISConfiguration::from_phases(phases), s.sol, s.c.R_min);
  const RISConfiguration rotated = RISConfiguration::from_vector(std::polar(1.0, 0.7) *
                                                                 RISConfiguration::from_phases(phases).v);
  const RateReport b = worst_case_rates(s.real, s.pos, rotated, s.sol, s.c.R_min);
  EXPECT_NEAR(a.sum_rate, b.sum_rate, 1e-10);
  for (int m = 0; m < s.c.M; ++m) {
    EXPECT_NEAR(a.common(m), b.common(m), 1e-10);
    EXPECT_NEAR(a.private_rate(m), b.private_rate(m), 1e-10);
  }
}
