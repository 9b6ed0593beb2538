// SPDX-License-Identifier: Apache-2.0
#include "marisa/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <string>

namespace marisa {

bool is_hermitian(const ComplexMatrix& a, double rel_tol) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  if (!a.allFinite()) return false;
  const double scale = std::max(1.0, a.norm());
  return (a - a.adjoint()).norm() <= rel_tol * scale;
}

HermitianMatrix::HermitianMatrix(const ComplexMatrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw LinalgError("HermitianMatrix: matrix must be square and non-empty");
  if (!is_hermitian(a))
    throw LinalgError("HermitianMatrix: input is not Hermitian (or not finite)");
  m_ = 0.5 * (a + a.adjoint());
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
  return from_trusted(ComplexMatrix::Zero(dim, dim));
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  return from_trusted(ComplexMatrix::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::outer(const ComplexVector& v) {
  return from_trusted(v * v.adjoint());
}

HermitianMatrix HermitianMatrix::from_trusted(const ComplexMatrix& a) {
  HermitianMatrix h;
  h.m_ = 0.5 * (a + a.adjoint());
  return h;
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  return from_trusted(m_ + o.m_);
}
HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  return from_trusted(m_ - o.m_);
}
HermitianMatrix HermitianMatrix::operator*(double s) const { return from_trusted(m_ * s); }
HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& o) {
  m_ += o.m_;
  return *this;
}

EigenDecomposition hermitian_eig(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.matrix());
  if (es.info() != Eigen::Success) throw LinalgError("hermitian_eig: decomposition failed");
  const Eigen::Index n = a.dim();
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen sorts ascending; flip.
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = es.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return out;
}

EigenDecomposition hermitian_eig(const ComplexMatrix& a) { return hermitian_eig(HermitianMatrix(a)); }

double min_eigenvalue(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double min_eigenvalue(const ComplexMatrix& a) { return min_eigenvalue(HermitianMatrix(a)); }

double max_eigenvalue(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(a.dim() - 1);
}

double spectral_norm(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(a.dim() - 1)));
}

double trace_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim())
    throw LinalgError("trace_inner: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()) + ")");
  // tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
  return (a.matrix().array() * b.matrix().conjugate().array()).real().sum();
}

RealMatrix real_embedding(const HermitianMatrix& a) {
  const Eigen::Index n = a.dim();
  RealMatrix r(2 * n, 2 * n);
  const RealMatrix re = a.matrix().real();
  const RealMatrix im = a.matrix().imag();
  r.topLeftCorner(n, n) = re;
  r.topRightCorner(n, n) = -im;
  r.bottomLeftCorner(n, n) = im;
  r.bottomRightCorner(n, n) = re;
  return r;
}

HermitianMatrix from_real_embedding(const RealMatrix& r) {
  if (r.rows() != r.cols() || r.rows() % 2 != 0 || r.rows() == 0)
    throw LinalgError("from_real_embedding: expected a non-empty 2n x 2n matrix");
  const Eigen::Index n = r.rows() / 2;
  const RealMatrix re = 0.5 * (r.topLeftCorner(n, n) + r.bottomRightCorner(n, n));
  const RealMatrix im = 0.5 * (r.bottomLeftCorner(n, n) - r.topRightCorner(n, n));
  ComplexMatrix c(n, n);
  c.real() = re;
  c.imag() = im;
  return HermitianMatrix::from_trusted(c);
}

double min_eigenvalue_sym(const RealMatrix& a) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace marisa
