// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/linalg.hpp"

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace marisa {

// One entry of a sparse Hermitian matrix. Only one triangle is stored: an
// entry (r, c, v) sets A(r, c) = v and A(c, r) = conj(v). Repeated entries
// accumulate. Diagonal values must be real.
struct MatrixEntry {
  int row = 0;
  int col = 0;
  Complex value{};
};

struct LmiTerm {
  int var = 0;
  std::vector<MatrixEntry> entries;
};

// Affine Hermitian matrix map  x -> B0 + sum_i x_i B_i  constrained to be PSD.
struct LmiBlock {
  int dim = 0;
  std::vector<MatrixEntry> constant;
  std::vector<LmiTerm> terms;
  std::string label;

  LmiBlock() = default;
  explicit LmiBlock(int d, std::string name = {}) : dim(d), label(std::move(name)) {}

  void add_constant(int r, int c, Complex v);
  void add_constant(const HermitianMatrix& m);
  void add_term(int var, int r, int c, Complex v);
  // Adds x_var * m, dropping exact zeros.
  void add_term(int var, const HermitianMatrix& m);

  bool is_real() const;
  HermitianMatrix constant_matrix() const;
  HermitianMatrix coefficient_matrix(int var) const;
  HermitianMatrix evaluate(const RealVector& x) const;
};

struct LinearRow {
  std::vector<std::pair<int, double>> coeffs;
  double rhs = 0.0;
  double dot(const RealVector& x) const;
};

struct VarBound {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

// maximize  objective . x
// s.t.      every lmi block PSD
//           linear_ineqs:  a . x <= b
//           linear_eqs:    a . x == b
//           var_bounds (optional, one per variable)
struct SDPProblem {
  int num_vars = 0;
  RealVector objective;
  std::vector<LmiBlock> lmi_blocks;
  std::vector<LinearRow> linear_ineqs;
  std::vector<LinearRow> linear_eqs;
  std::vector<VarBound> var_bounds;

  // Appends a scalar variable and returns its index.
  int add_variable(double objective_coeff = 0.0, VarBound bound = {});
  void add_ineq(std::vector<std::pair<int, double>> coeffs, double rhs);  // a.x <= rhs
  void add_eq(std::vector<std::pair<int, double>> coeffs, double rhs);
  void set_lower(int var, double lo);
  void set_upper(int var, double hi);

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

enum class SolverStatus { Optimal, Infeasible, MaxIters, NumericalFailure };
std::string to_string(SolverStatus s);

struct KktResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

struct SolverResult {
  SolverStatus status = SolverStatus::NumericalFailure;
  RealVector x;
  double objective_value = 0.0;
  KktResiduals kkt_residuals;
  int iterations = 0;
  std::string message;

  // Dual certificate. block_duals[k] is the Hermitian multiplier for block k,
  // normalized so the Lagrangian term is Re tr(F_k(x) block_duals[k]).
  std::vector<HermitianMatrix> block_duals;
  RealVector ineq_duals;
  RealVector lower_duals;
  RealVector upper_duals;
  RealVector eq_duals;
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iters = 100;
  // When the solve cannot reach tol, the best iterate whose KKT residuals are
  // within this bound is returned (status stays MaxIters or NumericalFailure).
  // Values below tol are ignored.
  double relaxed_tol = 0.0;
};

SolverResult solve(const SDPProblem& problem, double tol = 1e-7, int max_iters = 100);
SolverResult solve(const SDPProblem& problem, const SolverOptions& options);

// Optimal, or a non-optimal return whose recomputed residuals are all within
// relaxed_tol.
bool usable(const SolverResult& r, double relaxed_tol);

// Recomputes (primal, dual, gap) residuals from the problem data, x and the
// stored multipliers:
//   primal: worst normalized constraint violation at x
//           (block: max(0, -lambda_min(F_k(x))) / (1 + ||F_k(x)||_F))
//   dual:   ||c + A^*(duals)||_inf / (1 + ||c||_inf), plus dual-cone violation
//   gap:    |dual objective - primal objective| / (1 + |primal objective|)
KktResiduals check_kkt(const SDPProblem& problem, const SolverResult& result);

}  // namespace marisa
