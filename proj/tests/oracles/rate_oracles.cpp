// SPDX-License-Identifier: Apache-2.0
#include "oracles/rate_oracles.hpp"

#include <cmath>

namespace oracle {

using marisa::Complex;
using marisa::ComplexMatrix;
using marisa::HermitianMatrix;
using marisa::RealMatrix;
using marisa::RealVector;

namespace {

// Isotropic in the n^2 real coordinates of a Hermitian matrix: diagonal
// N(0, 1), off-diagonal real and imaginary parts N(0, 1/2) (each appears
// twice in the Frobenius norm).
void fill_hermitian_in_ball(ComplexMatrix& h, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Index n = h.rows();
  for (Eigen::Index r = 0; r < n; ++r) {
    h(r, r) = nd(rng);
    for (Eigen::Index c = r + 1; c < n; ++c) {
      const double re = nd(rng) * M_SQRT1_2;
      const double im = nd(rng) * M_SQRT1_2;
      h(r, c) = Complex(re, im);
      h(c, r) = Complex(re, -im);
    }
  }
  h *= radius * std::pow(u(rng), 1.0 / static_cast<double>(n * n)) / h.norm();
}

}  // namespace

HermitianMatrix random_hermitian_in_ball(int n, double radius, std::mt19937_64& rng) {
  ComplexMatrix h(n, n);
  fill_hermitian_in_ball(h, radius, rng);
  return HermitianMatrix::from_trusted(h);
}

double theorem1_sampled_max(const HermitianMatrix& Psi, double rho2, int samples, std::mt19937_64& rng) {
  const int n = static_cast<int>(Psi.dim());
  double best = 0.0;
  // tr(Psi Xi) = sum_ij conj(Psi_ij) Xi_ij for Hermitian Psi.
  const ComplexMatrix pc = Psi.matrix().conjugate();
  ComplexMatrix xi(n, n);
  for (int k = 0; k < samples; ++k) {
    fill_hermitian_in_ball(xi, rho2, rng);
    best = std::max(best, pc.cwiseProduct(xi).sum().real());
  }
  const double f = Psi.frobenius_norm();
  if (f > 0) {
    const ComplexMatrix cand = Psi.matrix() * (rho2 / f);
    best = std::max(best, (Psi.matrix() * cand).trace().real());
  }
  return best;
}

double allocation_lp_value(double capacity, const RealVector& lower) {
  // Constraints as a_i . r <= b_i: -r_m <= -max(lower_m, 0), 1.r <= capacity.
  const int M = static_cast<int>(lower.size());
  RealMatrix A(M + 1, M);
  RealVector b(M + 1);
  A.setZero();
  for (int m = 0; m < M; ++m) {
    A(m, m) = -1.0;
    b(m) = -std::max(lower(m), 0.0);
  }
  A.row(M).setOnes();
  b(M) = capacity;
  double best = -1.0;
  const int rows = M + 1;
  for (int mask = 0; mask < (1 << rows); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) != M) continue;
    RealMatrix S(M, M);
    RealVector s(M);
    int k = 0;
    for (int i = 0; i < rows; ++i)
      if (mask & (1 << i)) {
        S.row(k) = A.row(i);
        s(k++) = b(i);
      }
    Eigen::FullPivLU<RealMatrix> lu(S);
    if (lu.rank() < M) continue;
    const RealVector r = lu.solve(s);
    if (((A * r - b).array() > 1e-12).any()) continue;
    best = std::max(best, r.sum());
  }
  return best;
}

}  // namespace oracle
