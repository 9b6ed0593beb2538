// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace marisa {

// All matrices use Eigen's default column-major storage. Serialization walks
// entries in the same order (column by column).
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kJ{0.0, 1.0};

class LinalgError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Complex Hermitian matrix. Construction checks A = A^H to 1e-12 relative
// (against max(1, ||A||_F)) and then stores the exactly symmetrized matrix,
// so the diagonal is real.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const ComplexMatrix& a);

  static HermitianMatrix zero(Eigen::Index dim);
  static HermitianMatrix identity(Eigen::Index dim);
  // v v^H
  static HermitianMatrix outer(const ComplexVector& v);
  // Symmetrizes without checking; for matrices Hermitian by construction.
  static HermitianMatrix from_trusted(const ComplexMatrix& a);

  Eigen::Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }
  double trace() const { return m_.diagonal().real().sum(); }
  double frobenius_norm() const { return m_.norm(); }

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;
  HermitianMatrix& operator+=(const HermitianMatrix& o);

 private:
  ComplexMatrix m_;
};

bool is_hermitian(const ComplexMatrix& a, double rel_tol = 1e-12);

struct EigenDecomposition {
  RealVector values;       // descending
  ComplexMatrix vectors;   // column k pairs with values(k)
};

EigenDecomposition hermitian_eig(const HermitianMatrix& a);
// Checks the Hermitian invariant first; throws LinalgError when it fails.
EigenDecomposition hermitian_eig(const ComplexMatrix& a);

double min_eigenvalue(const HermitianMatrix& a);
double min_eigenvalue(const ComplexMatrix& a);
double max_eigenvalue(const HermitianMatrix& a);
double spectral_norm(const HermitianMatrix& a);

// Re tr(A B). Throws on dimension mismatch.
double trace_inner(const HermitianMatrix& a, const HermitianMatrix& b);

// Real embedding of a Hermitian matrix:
//   A = Re + j Im  ->  [[Re, -Im], [Im, Re]]   (2n x 2n, symmetric)
// Eigenvalues are those of A, each repeated twice, so PSD-ness carries over,
// and <embed(A), embed(B)> = 2 Re tr(A B).
RealMatrix real_embedding(const HermitianMatrix& a);
// Inverse map. Projects onto the range of the embedding first, so it is a
// left inverse of real_embedding and also accepts symmetric matrices that are
// only close to that range (e.g. dual iterates).
HermitianMatrix from_real_embedding(const RealMatrix& r);

// Symmetric real eigen helpers used by the solver.
double min_eigenvalue_sym(const RealMatrix& a);

}  // namespace marisa
