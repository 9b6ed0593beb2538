// SPDX-License-Identifier: Apache-2.0
#include "marisa/lifted.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace marisa;

namespace {

HermitianMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  ComplexMatrix A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = Complex(nd(rng), nd(rng));
  return HermitianMatrix::from_trusted(A + A.adjoint());
}

}  // namespace

TEST(HermitianVariable, AssignRoundTrip) {
  std::mt19937_64 rng(1);
  SDPProblem pr;
  const auto X = HermitianVariable::add(pr, 4);
  EXPECT_EQ(pr.num_vars, 16);
  const HermitianMatrix M = random_hermitian(4, rng);
  RealVector x = RealVector::Zero(pr.num_vars);
  X.assign(M, x);
  EXPECT_LT((X.value(x).matrix() - M.matrix()).norm(), 1e-12);
}

TEST(HermitianVariable, UnitDiagonal) {
  std::mt19937_64 rng(2);
  SDPProblem pr;
  const auto V = HermitianVariable::add(pr, 3, true);
  EXPECT_EQ(pr.num_vars, 6);
  HermitianMatrix M = random_hermitian(3, rng);
  RealVector x = RealVector::Zero(pr.num_vars);
  V.assign(M, x);
  const HermitianMatrix got = V.value(x);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(got(i, i).real(), 1.0);
  EXPECT_LT(std::abs(got(0, 2) - M(0, 2)), 1e-12);
}

TEST(HermitianVariable, TraceCoefficients) {
  std::mt19937_64 rng(3);
  for (bool unit : {false, true}) {
    SDPProblem pr;
    const auto X = HermitianVariable::add(pr, 3, unit);
    const HermitianMatrix A = random_hermitian(3, rng);
    const HermitianMatrix M = random_hermitian(3, rng);
    RealVector x = RealVector::Zero(pr.num_vars);
    X.assign(M, x);
    double lin = X.trace_constant(A);
    for (const auto& [v, a] : X.trace_coeffs(A)) lin += a * x(v);
    EXPECT_NEAR(lin, trace_inner(A, X.value(x)), 1e-10);
  }
}

TEST(HermitianVariable, MapIntoBlock) {
  std::mt19937_64 rng(4);
  SDPProblem pr;
  const auto X = HermitianVariable::add(pr, 2, true);
  LmiBlock b(3);
  ComplexMatrix T(3, 2);
  T << 1.0, Complex(0, 2), 0.5, -1.0, Complex(1, 1), 3.0;
  X.add_map(b, [&T](const ComplexMatrix& E) { return ComplexMatrix(T * E * T.adjoint()); }, 2.0);
  const HermitianMatrix M = random_hermitian(2, rng);
  RealVector x = RealVector::Zero(pr.num_vars);
  X.assign(M, x);
  const ComplexMatrix expect = 2.0 * T * X.value(x).matrix() * T.adjoint();
  EXPECT_LT((b.evaluate(x).matrix() - expect).norm(), 1e-10);
}

TEST(LogBreakpoints, CoverRangeAndPinAnchor) {
  const auto b = log_breakpoints(0.0, 100.0, 3.7, 1.05, 1.01);
  EXPECT_EQ(b.front(), 0.0);
  EXPECT_EQ(b.back(), 100.0);
  EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
  EXPECT_NE(std::find(b.begin(), b.end(), 3.7), b.end());
  for (std::size_t k = 1; k < b.size(); ++k) EXPECT_GT(b[k], b[k - 1]);
}

TEST(LogBreakpoints, RejectsBadInput) {
  EXPECT_THROW(log_breakpoints(1.0, 1.0, 1.0, 1.05, 1.01), std::invalid_argument);
  EXPECT_THROW(log_breakpoints(0.0, 1.0, 0.5, 1.0, 1.01), std::invalid_argument);
}

TEST(LogChords, BelowLogAndExactAtBreakpoints) {
  const auto b = log_breakpoints(0.0, 50.0, 2.0, 1.05, 1.01);
  for (double x = 0.0; x <= 50.0; x += 0.0137) {
    const double f = std::log2(1.0 + x);
    const double c = log_chord_value(b, 1.0, x);
    EXPECT_LE(c, f + 1e-14);
    EXPECT_GE(c, f - 1e-3);
  }
  for (double bp : b) EXPECT_NEAR(log_chord_value(b, 1.0, bp), std::log2(1.0 + bp), 1e-14);
}

TEST(LogChords, SolverRecoversInterpolant) {
  // maximize t s.t. t <= chords(x), x <= 5: optimum is log2(1 + 5) exactly
  // when 5 is a breakpoint.
  SDPProblem pr;
  const int t = pr.add_variable(1.0);
  const int x = pr.add_variable();
  const auto b = log_breakpoints(0.0, 10.0, 5.0, 1.05, 1.01);
  add_log_chords(pr, t, x, b, 1.0);
  pr.add_ineq({{x, 1.0}}, 5.0);
  const auto r = solve(pr);
  ASSERT_EQ(r.status, SolverStatus::Optimal);
  EXPECT_NEAR(r.objective_value, std::log2(6.0), 1e-6);
}
