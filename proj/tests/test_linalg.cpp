// SPDX-License-Identifier: Apache-2.0
#include "marisa/linalg.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace marisa;

namespace {

ComplexMatrix random_complex(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> n01;
  ComplexMatrix a(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) a(i, j) = Complex(n01(rng), n01(rng));
  return a;
}

HermitianMatrix random_hermitian(std::mt19937_64& rng, int n) {
  const ComplexMatrix a = random_complex(rng, n, n);
  return HermitianMatrix(0.5 * (a + a.adjoint()));
}

}  // namespace

TEST(HermitianEig, IdentityHasUnitEigenvalues) {
  const auto e = hermitian_eig(HermitianMatrix::identity(3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.values(i), 1.0, 1e-14);
}

TEST(HermitianEig, DiagonalIsSortedDescendingWithPermutedIdentity) {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = -1.0;
  d(1, 1) = 2.0;
  const auto e = hermitian_eig(HermitianMatrix(d));
  EXPECT_NEAR(e.values(0), 2.0, 1e-14);
  EXPECT_NEAR(e.values(1), -1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 1)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 0.0, 1e-14);
}

TEST(HermitianEig, ReconstructionResidualSmall) {
  std::mt19937_64 rng(7);
  for (int n : {1, 2, 8, 17, 64}) {
    const HermitianMatrix a = random_hermitian(rng, n);
    const auto e = hermitian_eig(a);
    const ComplexMatrix rec = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    EXPECT_LE((rec - a.matrix()).norm(), 1e-10 * a.frobenius_norm()) << "n=" << n;
    for (int i = 1; i < n; ++i) EXPECT_GE(e.values(i - 1), e.values(i));
  }
}

TEST(HermitianEig, RejectsNonHermitian) {
  ComplexMatrix a(2, 2);
  a << 1.0, 2.0, 0.0, 1.0;
  EXPECT_THROW(hermitian_eig(a), LinalgError);
  EXPECT_THROW(HermitianMatrix{a}, LinalgError);
  EXPECT_THROW(min_eigenvalue(a), LinalgError);
}

TEST(HermitianMatrix, RejectsNonFinite) {
  ComplexMatrix a = ComplexMatrix::Identity(2, 2);
  a(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(HermitianMatrix{a}, LinalgError);
}

TEST(MinEigenvalue, ZeroMatrix) { EXPECT_EQ(min_eigenvalue(HermitianMatrix::zero(3)), 0.0); }

TEST(MinEigenvalue, Diagonal) {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -2.0;
  EXPECT_NEAR(min_eigenvalue(HermitianMatrix(d)), -2.0, 1e-14);
}

TEST(MinEigenvalue, RankOneOuterProductIsSingular) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexVector v = random_complex(rng, 5, 1);
    EXPECT_NEAR(min_eigenvalue(HermitianMatrix::outer(v)), 0.0, 1e-10 * v.squaredNorm());
  }
}

TEST(MinEigenvalue, BoundsEveryRayleighQuotient) {
  std::mt19937_64 rng(13);
  const HermitianMatrix a = random_hermitian(rng, 6);
  const double lmin = min_eigenvalue(a);
  for (int s = 0; s < 500; ++s) {
    ComplexVector v = random_complex(rng, 6, 1);
    v.normalize();
    const double rq = (v.adjoint() * a.matrix() * v)(0, 0).real();
    EXPECT_LE(lmin, rq + 1e-12);
  }
}

TEST(TraceInner, IdentityTimesIdentity) {
  EXPECT_NEAR(trace_inner(HermitianMatrix::identity(4), HermitianMatrix::identity(4)), 4.0, 1e-14);
}

TEST(TraceInner, Diagonals) {
  ComplexMatrix a = ComplexMatrix::Zero(2, 2), b = ComplexMatrix::Zero(2, 2);
  a.diagonal() << 1.0, 2.0;
  b.diagonal() << 3.0, 4.0;
  EXPECT_NEAR(trace_inner(HermitianMatrix(a), HermitianMatrix(b)), 11.0, 1e-14);
}

TEST(TraceInner, MatchesDirectSummation) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const HermitianMatrix a = random_hermitian(rng, 5), b = random_hermitian(rng, 5);
    Complex s{};
    for (int i = 0; i < 5; ++i)
      for (int k = 0; k < 5; ++k) s += a(i, k) * b(k, i);
    EXPECT_NEAR(trace_inner(a, b), s.real(), 1e-12 * (1 + std::abs(s)));
    EXPECT_LE(std::abs(s.imag()), 1e-12 * (1 + std::abs(s)));
  }
}

TEST(TraceInner, SymmetricAndBilinear) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const HermitianMatrix a = random_hermitian(rng, 4), b = random_hermitian(rng, 4), c = random_hermitian(rng, 4);
    const double s = 0.7, t = -1.3;
    EXPECT_NEAR(trace_inner(a, b), trace_inner(b, a), 1e-12);
    EXPECT_NEAR(trace_inner(a * s + b * t, c), s * trace_inner(a, c) + t * trace_inner(b, c), 1e-12 * 50);
  }
}

TEST(TraceInner, DimensionMismatchThrows) {
  EXPECT_THROW(trace_inner(HermitianMatrix::identity(2), HermitianMatrix::identity(3)), LinalgError);
}

TEST(RealEmbedding, RoundTripAndSpectrum) {
  std::mt19937_64 rng(23);
  const HermitianMatrix a = random_hermitian(rng, 4), b = random_hermitian(rng, 4);
  const RealMatrix ea = real_embedding(a);
  EXPECT_LE((from_real_embedding(ea).matrix() - a.matrix()).norm(), 1e-14);
  EXPECT_NEAR((ea.array() * real_embedding(b).array()).sum(), 2.0 * trace_inner(a, b), 1e-12);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(ea);
  const auto e = hermitian_eig(a);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(es.eigenvalues()(2 * i), e.values(3 - i), 1e-12);
    EXPECT_NEAR(es.eigenvalues()(2 * i + 1), e.values(3 - i), 1e-12);
  }
}
