// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/config.hpp"
#include "marisa/conic_solver.hpp"
#include "marisa/linalg.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace marisa {

// A Hermitian n x n matrix of decision variables,
//   X = sum_k x_{var_k} E_k  (+ I when the diagonal is fixed to one),
// with one real variable per diagonal entry and two (re, im) per pair i < j.
class HermitianVariable {
 public:
  struct Basis {
    int var = 0;
    int row = 0, col = 0;  // E(row, col) = value, E(col, row) = conj(value)
    Complex value{1.0, 0.0};
  };

  static HermitianVariable add(SDPProblem& problem, int n, bool unit_diagonal = false);

  int dim() const { return n_; }
  bool unit_diagonal() const { return unit_diag_; }
  const std::vector<Basis>& basis() const { return basis_; }
  ComplexMatrix basis_matrix(const Basis& b) const;

  HermitianMatrix value(const RealVector& x) const;
  // Variable values reproducing a given Hermitian matrix (diagonal ignored
  // when fixed).
  void assign(const HermitianMatrix& m, RealVector& x) const;

  // Adds scale * map(X) to the block, map linear.
  void add_map(LmiBlock& block, const std::function<ComplexMatrix(const ComplexMatrix&)>& map,
               double scale = 1.0) const;
  // Adds scale * X into rows/cols [offset, offset + n).
  void add_to_block(LmiBlock& block, int offset = 0, double scale = 1.0) const;
  // Coefficients of Re tr(A X) over the variables; the fixed-diagonal part
  // Re tr(A) is returned separately by trace_constant.
  std::vector<std::pair<int, double>> trace_coeffs(const HermitianMatrix& A, double scale = 1.0) const;
  double trace_constant(const HermitianMatrix& A) const;

  // Adds X >= 0 as its own block.
  void add_psd(SDPProblem& problem, const std::string& label) const;

 private:
  int n_ = 0;
  bool unit_diag_ = false;
  std::vector<Basis> basis_;
};

// Breakpoints for a piecewise-linear model of log2(shift + x) on [lo, hi]:
// geometric with ratio `ratio`, refined to `fine_ratio` within a factor 1.25
// of the anchor, with the anchor itself as a breakpoint when it lies inside
// (lo, hi). When lo == 0 the first step starts at min(1e-3, hi * 1e-6).
std::vector<double> log_breakpoints(double lo, double hi, double anchor, double ratio, double fine_ratio);

// Rows t <= chord_k(x) for each pair of consecutive breakpoints, plus
// bounds bps.front() <= x <= bps.back(). The piecewise-linear interpolant
// lies below log2(shift + x), so these rows are a restriction.
void add_log_chords(SDPProblem& problem, int t, int x, const std::vector<double>& bps, double shift);

// Value of the interpolant at x (inside the breakpoint range).
double log_chord_value(const std::vector<double>& bps, double shift, double x);

// Solver settings shared by the alternating stages.
SolverOptions stage_solver_options(const SystemConfig& cfg);

// Objective weight of a QoS slack (bits) when QoS is soft.
inline constexpr double kQosPenalty = 10.0;

}  // namespace marisa
