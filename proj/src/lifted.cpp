// SPDX-License-Identifier: Apache-2.0
#include "marisa/lifted.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marisa {

HermitianVariable HermitianVariable::add(SDPProblem& problem, int n, bool unit_diagonal) {
  if (n < 1) throw std::invalid_argument("HermitianVariable: dimension must be positive");
  HermitianVariable h;
  h.n_ = n;
  h.unit_diag_ = unit_diagonal;
  if (!unit_diagonal)
    for (int i = 0; i < n; ++i) h.basis_.push_back({problem.add_variable(), i, i, {1.0, 0.0}});
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) {
      h.basis_.push_back({problem.add_variable(), i, j, {1.0, 0.0}});
      h.basis_.push_back({problem.add_variable(), i, j, {0.0, 1.0}});
    }
  return h;
}

ComplexMatrix HermitianVariable::basis_matrix(const Basis& b) const {
  ComplexMatrix e = ComplexMatrix::Zero(n_, n_);
  e(b.row, b.col) += b.value;
  if (b.row != b.col) e(b.col, b.row) += std::conj(b.value);
  return e;
}

HermitianMatrix HermitianVariable::value(const RealVector& x) const {
  ComplexMatrix m = ComplexMatrix::Zero(n_, n_);
  if (unit_diag_) m.diagonal().setOnes();
  for (const auto& b : basis_) {
    m(b.row, b.col) += x(b.var) * b.value;
    if (b.row != b.col) m(b.col, b.row) += x(b.var) * std::conj(b.value);
  }
  return HermitianMatrix::from_trusted(m);
}

void HermitianVariable::assign(const HermitianMatrix& m, RealVector& x) const {
  for (const auto& b : basis_) {
    const Complex v = m(b.row, b.col);
    x(b.var) = b.row == b.col ? v.real() : (b.value.real() != 0.0 ? v.real() : v.imag());
  }
}

void HermitianVariable::add_map(LmiBlock& block, const std::function<ComplexMatrix(const ComplexMatrix&)>& map,
                                double scale) const {
  for (const auto& b : basis_) block.add_term(b.var, HermitianMatrix::from_trusted(scale * map(basis_matrix(b))));
  if (unit_diag_)
    block.add_constant(HermitianMatrix::from_trusted(scale * map(ComplexMatrix::Identity(n_, n_))));
}

void HermitianVariable::add_to_block(LmiBlock& block, int offset, double scale) const {
  for (const auto& b : basis_) block.add_term(b.var, offset + b.row, offset + b.col, scale * b.value);
  if (unit_diag_)
    for (int i = 0; i < n_; ++i) block.add_constant(offset + i, offset + i, scale);
}

std::vector<std::pair<int, double>> HermitianVariable::trace_coeffs(const HermitianMatrix& A, double scale) const {
  if (A.dim() != n_) throw std::invalid_argument("trace_coeffs: dimension mismatch");
  std::vector<std::pair<int, double>> row;
  row.reserve(basis_.size());
  for (const auto& b : basis_) {
    const double c = b.row == b.col ? A(b.row, b.row).real() : 2.0 * (A(b.col, b.row) * b.value).real();
    if (c != 0.0) row.emplace_back(b.var, scale * c);
  }
  return row;
}

double HermitianVariable::trace_constant(const HermitianMatrix& A) const { return unit_diag_ ? A.trace() : 0.0; }

void HermitianVariable::add_psd(SDPProblem& problem, const std::string& label) const {
  LmiBlock block(n_, label);
  add_to_block(block);
  problem.lmi_blocks.push_back(std::move(block));
}

std::vector<double> log_breakpoints(double lo, double hi, double anchor, double ratio, double fine_ratio) {
  if (!(lo >= 0.0 && hi > lo && ratio > 1.0 && fine_ratio > 1.0))
    throw std::invalid_argument("log_breakpoints: invalid range or ratio");
  std::vector<double> bps;
  double x = lo;
  if (lo == 0.0) {
    bps.push_back(0.0);
    x = std::min(1e-3, hi * 1e-6);
  }
  const double flo = anchor / 1.25, fhi = anchor * 1.25;
  while (x < hi) {
    bps.push_back(x);
    x *= (x >= flo && x < fhi) ? fine_ratio : ratio;
  }
  bps.push_back(hi);
  // The interpolant is exact at a breakpoint, so pin one to the anchor.
  if (anchor > lo && anchor < hi) {
    std::erase_if(bps, [anchor](double b) { return b > 0.0 && std::abs(b / anchor - 1.0) < 1e-6; });
    bps.insert(std::upper_bound(bps.begin(), bps.end(), anchor), anchor);
  }
  return bps;
}

void add_log_chords(SDPProblem& problem, int t, int x, const std::vector<double>& bps, double shift) {
  if (bps.size() < 2) throw std::invalid_argument("add_log_chords: need at least two breakpoints");
  for (std::size_t k = 0; k + 1 < bps.size(); ++k) {
    const double f0 = std::log2(shift + bps[k]);
    const double f1 = std::log2(shift + bps[k + 1]);
    const double s = (f1 - f0) / (bps[k + 1] - bps[k]);
    problem.add_ineq({{t, 1.0}, {x, -s}}, f0 - s * bps[k]);
  }
  problem.set_lower(x, bps.front());
  problem.set_upper(x, bps.back());
}

double log_chord_value(const std::vector<double>& bps, double shift, double x) {
  auto it = std::upper_bound(bps.begin(), bps.end(), x);
  if (it == bps.begin()) it = std::next(it);
  if (it == bps.end()) it = std::prev(it);
  const double a = *std::prev(it), b = *it;
  const double fa = std::log2(shift + a), fb = std::log2(shift + b);
  return fa + (fb - fa) * (x - a) / (b - a);
}

SolverOptions stage_solver_options(const SystemConfig& cfg) {
  SolverOptions o{cfg.solver_tol, cfg.solver_max_iters};
  o.relaxed_tol = std::max(1e-4, 1000.0 * cfg.solver_tol);
  return o;
}

}  // namespace marisa
