// SPDX-License-Identifier: Apache-2.0
//
// Dense primal-dual interior-point method for block-LMI problems.
//
// The user problem  max c.x  s.t.  F(x) = C0 + sum_i x_i B_i >= 0,  E x = f
// is solved together with its dual  min <C0, X> + f.w  s.t.
// c + B^*(X) - E^T w = 0,  X >= 0.  Every Hermitian block is mapped to a real
// symmetric block (embedded to 2n x 2n when it has complex entries), and
// 1x1 blocks, linear inequalities and variable bounds are collected into a
// diagonal (LP) block. Search directions use Nesterov-Todd scaling with a
// Mehrotra predictor-corrector; the method starts from an infeasible point
// and watches the dual iterate for a Farkas certificate of infeasibility.
#include "marisa/conic_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

namespace marisa {

// ---------------------------------------------------------------------------
// Problem IR helpers

namespace {

MatrixEntry normalized_entry(int r, int c, Complex v) {
  if (r > c) return {c, r, std::conj(v)};
  return {r, c, v};
}

}  // namespace

void LmiBlock::add_constant(int r, int c, Complex v) {
  if (v == Complex{}) return;
  constant.push_back(normalized_entry(r, c, v));
}

void LmiBlock::add_constant(const HermitianMatrix& m) {
  if (m.dim() != dim) throw std::invalid_argument("LmiBlock::add_constant: dimension mismatch");
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r <= c; ++r) add_constant(r, c, m(r, c));
}

void LmiBlock::add_term(int var, int r, int c, Complex v) {
  if (v == Complex{}) return;
  if (terms.empty() || terms.back().var != var) terms.push_back({var, {}});
  terms.back().entries.push_back(normalized_entry(r, c, v));
}

void LmiBlock::add_term(int var, const HermitianMatrix& m) {
  if (m.dim() != dim) throw std::invalid_argument("LmiBlock::add_term: dimension mismatch");
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r <= c; ++r) add_term(var, r, c, m(r, c));
}

bool LmiBlock::is_real() const {
  for (const auto& e : constant)
    if (e.value.imag() != 0.0) return false;
  for (const auto& t : terms)
    for (const auto& e : t.entries)
      if (e.value.imag() != 0.0) return false;
  return true;
}

namespace {

void accumulate(ComplexMatrix& m, const std::vector<MatrixEntry>& entries, double scale) {
  for (const auto& e : entries) {
    if (e.row == e.col) {
      m(e.row, e.row) += scale * e.value.real();
    } else {
      m(e.row, e.col) += scale * e.value;
      m(e.col, e.row) += scale * std::conj(e.value);
    }
  }
}

}  // namespace

HermitianMatrix LmiBlock::constant_matrix() const {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  accumulate(m, constant, 1.0);
  return HermitianMatrix::from_trusted(m);
}

HermitianMatrix LmiBlock::coefficient_matrix(int var) const {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (const auto& t : terms)
    if (t.var == var) accumulate(m, t.entries, 1.0);
  return HermitianMatrix::from_trusted(m);
}

HermitianMatrix LmiBlock::evaluate(const RealVector& x) const {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  accumulate(m, constant, 1.0);
  for (const auto& t : terms) accumulate(m, t.entries, x(t.var));
  return HermitianMatrix::from_trusted(m);
}

double LinearRow::dot(const RealVector& x) const {
  double s = 0.0;
  for (const auto& [i, a] : coeffs) s += a * x(i);
  return s;
}

int SDPProblem::add_variable(double objective_coeff, VarBound bound) {
  const int idx = num_vars++;
  objective.conservativeResize(num_vars);
  objective(idx) = objective_coeff;
  if (!var_bounds.empty() || std::isfinite(bound.lower) || std::isfinite(bound.upper)) {
    var_bounds.resize(num_vars);
    var_bounds[idx] = bound;
  }
  return idx;
}

void SDPProblem::add_ineq(std::vector<std::pair<int, double>> coeffs, double rhs) {
  linear_ineqs.push_back({std::move(coeffs), rhs});
}

void SDPProblem::add_eq(std::vector<std::pair<int, double>> coeffs, double rhs) {
  linear_eqs.push_back({std::move(coeffs), rhs});
}

void SDPProblem::set_lower(int var, double lo) {
  var_bounds.resize(num_vars);
  var_bounds[var].lower = lo;
}

void SDPProblem::set_upper(int var, double hi) {
  var_bounds.resize(num_vars);
  var_bounds[var].upper = hi;
}

void SDPProblem::validate() const {
  if (num_vars < 0) throw std::invalid_argument("SDPProblem: negative variable count");
  if (objective.size() != num_vars)
    throw std::invalid_argument("SDPProblem: objective length must equal num_vars");
  if (!objective.allFinite()) throw std::invalid_argument("SDPProblem: objective not finite");
  auto check_entries = [&](const std::vector<MatrixEntry>& es, int dim, const std::string& what) {
    for (const auto& e : es) {
      if (e.row < 0 || e.col < 0 || e.row >= dim || e.col >= dim)
        throw std::invalid_argument("SDPProblem: " + what + " entry out of range");
      if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
        throw std::invalid_argument("SDPProblem: " + what + " entry not finite");
      if (e.row == e.col && std::abs(e.value.imag()) > 1e-12 * std::max(1.0, std::abs(e.value)))
        throw std::invalid_argument("SDPProblem: " + what + " has a non-real diagonal entry");
    }
  };
  for (std::size_t k = 0; k < lmi_blocks.size(); ++k) {
    const auto& b = lmi_blocks[k];
    const std::string name = "block " + std::to_string(k);
    if (b.dim <= 0) throw std::invalid_argument("SDPProblem: " + name + " has non-positive dim");
    check_entries(b.constant, b.dim, name);
    for (const auto& t : b.terms) {
      if (t.var < 0 || t.var >= num_vars)
        throw std::invalid_argument("SDPProblem: " + name + " references unknown variable");
      check_entries(t.entries, b.dim, name);
    }
  }
  auto check_rows = [&](const std::vector<LinearRow>& rows, const char* what) {
    for (const auto& r : rows) {
      if (!std::isfinite(r.rhs)) throw std::invalid_argument(std::string("SDPProblem: ") + what + " rhs not finite");
      for (const auto& [i, a] : r.coeffs) {
        if (i < 0 || i >= num_vars)
          throw std::invalid_argument(std::string("SDPProblem: ") + what + " references unknown variable");
        if (!std::isfinite(a)) throw std::invalid_argument(std::string("SDPProblem: ") + what + " coefficient not finite");
      }
    }
  };
  check_rows(linear_ineqs, "inequality");
  check_rows(linear_eqs, "equality");
  if (!var_bounds.empty() && static_cast<int>(var_bounds.size()) != num_vars)
    throw std::invalid_argument("SDPProblem: var_bounds must be empty or have num_vars entries");
  for (const auto& vb : var_bounds)
    if (vb.lower > vb.upper) throw std::invalid_argument("SDPProblem: lower bound exceeds upper bound");
}

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Optimal: return "Optimal";
    case SolverStatus::Infeasible: return "Infeasible";
    case SolverStatus::MaxIters: return "MaxIters";
    case SolverStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Interior-point core

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Triplet {
  int r;
  int c;
  double v;
};

struct SymTerm {
  int var = 0;
  std::vector<Triplet> entries;
  bool use_dense = false;
  RealMatrix dense;
};

struct Cone {
  int n = 0;
  int source = -1;
  bool embedded = false;
  RealMatrix c0;
  std::vector<SymTerm> terms;
};

enum class RowKind { Block, Ineq, Lower, Upper };

struct LpRow {
  std::vector<std::pair<int, double>> coeffs;
  double c0 = 0.0;
  RowKind kind = RowKind::Block;
  int source = -1;
};

void add_sym(RealMatrix& a, const std::vector<Triplet>& ts, double s) {
  for (const auto& t : ts) {
    a(t.r, t.c) += s * t.v;
    if (t.r != t.c) a(t.c, t.r) += s * t.v;
  }
}

double sym_inner(const std::vector<Triplet>& ts, const RealMatrix& x) {
  double s = 0.0;
  for (const auto& t : ts) s += (t.r == t.c) ? t.v * x(t.r, t.r) : t.v * (x(t.r, t.c) + x(t.c, t.r));
  return s;
}

using TripletMap = std::map<std::pair<int, int>, double>;

void push_real(TripletMap& m, int r, int c, double v) {
  if (r > c) std::swap(r, c);
  m[{r, c}] += v;
}

// Real form of one Hermitian entry.
void push_entry(TripletMap& m, const MatrixEntry& e, int n, bool embed) {
  if (!embed) {
    push_real(m, e.row, e.col, e.value.real());
    return;
  }
  const double re = e.value.real();
  const double im = e.value.imag();
  if (e.row == e.col) {
    push_real(m, e.row, e.row, re);
    push_real(m, n + e.row, n + e.row, re);
    return;
  }
  const int r = e.row, c = e.col;
  push_real(m, r, c, re);
  push_real(m, n + r, n + c, re);
  // top-right block holds -Im.
  if (im != 0.0) {
    push_real(m, r, n + c, -im);
    push_real(m, c, n + r, im);
  }
}

std::vector<Triplet> to_triplets(const TripletMap& m) {
  std::vector<Triplet> out;
  out.reserve(m.size());
  for (const auto& [rc, v] : m)
    if (v != 0.0) out.push_back({rc.first, rc.second, v});
  return out;
}

struct Compiled {
  int n = 0;
  RealVector c;
  std::vector<Cone> cones;
  std::vector<LpRow> lp;
  RealMatrix E;          // normalized equality rows
  RealVector f;
  RealVector eq_scale;   // original row norm
  std::vector<int> block_lp_row;  // problem block -> lp row (dim 1), else -1
  std::vector<int> block_cone;    // problem block -> cone, else -1
};

Compiled compile(const SDPProblem& p) {
  Compiled cp;
  cp.n = p.num_vars;
  cp.c = p.objective;
  cp.block_lp_row.assign(p.lmi_blocks.size(), -1);
  cp.block_cone.assign(p.lmi_blocks.size(), -1);
  for (std::size_t k = 0; k < p.lmi_blocks.size(); ++k) {
    const auto& b = p.lmi_blocks[k];
    if (b.dim == 1) {
      LpRow row;
      row.kind = RowKind::Block;
      row.source = static_cast<int>(k);
      for (const auto& e : b.constant) row.c0 += e.value.real();
      std::map<int, double> acc;
      for (const auto& t : b.terms)
        for (const auto& e : t.entries) acc[t.var] += e.value.real();
      for (const auto& [v, a] : acc)
        if (a != 0.0) row.coeffs.emplace_back(v, a);
      cp.block_lp_row[k] = static_cast<int>(cp.lp.size());
      cp.lp.push_back(std::move(row));
      continue;
    }
    Cone cone;
    cone.source = static_cast<int>(k);
    cone.embedded = !b.is_real();
    cone.n = cone.embedded ? 2 * b.dim : b.dim;
    TripletMap c0;
    for (const auto& e : b.constant) push_entry(c0, e, b.dim, cone.embedded);
    cone.c0 = RealMatrix::Zero(cone.n, cone.n);
    add_sym(cone.c0, to_triplets(c0), 1.0);
    std::map<int, TripletMap> per_var;
    for (const auto& t : b.terms)
      for (const auto& e : t.entries) push_entry(per_var[t.var], e, b.dim, cone.embedded);
    for (auto& [v, m] : per_var) {
      SymTerm st;
      st.var = v;
      st.entries = to_triplets(m);
      if (st.entries.empty()) continue;
      if (static_cast<int>(st.entries.size()) > cone.n) {
        st.use_dense = true;
        st.dense = RealMatrix::Zero(cone.n, cone.n);
        add_sym(st.dense, st.entries, 1.0);
      }
      cone.terms.push_back(std::move(st));
    }
    cp.block_cone[k] = static_cast<int>(cp.cones.size());
    cp.cones.push_back(std::move(cone));
  }
  for (std::size_t j = 0; j < p.linear_ineqs.size(); ++j) {
    const auto& r = p.linear_ineqs[j];
    LpRow row;
    row.kind = RowKind::Ineq;
    row.source = static_cast<int>(j);
    row.c0 = r.rhs;
    std::map<int, double> acc;
    for (const auto& [i, a] : r.coeffs) acc[i] -= a;
    for (const auto& [i, a] : acc)
      if (a != 0.0) row.coeffs.emplace_back(i, a);
    cp.lp.push_back(std::move(row));
  }
  for (int i = 0; i < static_cast<int>(p.var_bounds.size()); ++i) {
    const auto& vb = p.var_bounds[i];
    if (std::isfinite(vb.lower)) cp.lp.push_back({{{i, 1.0}}, -vb.lower, RowKind::Lower, i});
    if (std::isfinite(vb.upper)) cp.lp.push_back({{{i, -1.0}}, vb.upper, RowKind::Upper, i});
  }
  const int neq = static_cast<int>(p.linear_eqs.size());
  cp.E = RealMatrix::Zero(neq, cp.n);
  cp.f = RealVector::Zero(neq);
  cp.eq_scale = RealVector::Ones(neq);
  for (int r = 0; r < neq; ++r) {
    for (const auto& [i, a] : p.linear_eqs[r].coeffs) cp.E(r, i) += a;
    const double s = cp.E.row(r).norm();
    if (s == 0.0) throw std::invalid_argument("SDPProblem: equality row with no coefficients");
    cp.E.row(r) /= s;
    cp.f(r) = p.linear_eqs[r].rhs / s;
    cp.eq_scale(r) = s;
  }
  return cp;
}

// NT scaling data of one cone at the current iterate.
struct Scaling {
  RealMatrix G;     // W = G G^T
  RealMatrix Ginv;
  RealMatrix W;
  RealVector d;     // scaled iterate D = diag(d)
};

// Nesterov-Todd scaling from Cholesky factors X = Lx Lx^T, Z = Lz Lz^T and
// the SVD Lz^T Lx = U S V^T: G = Lx V S^{-1/2}, so G^T Z G = G^{-1} X G^{-T} = S.
// The singular values are of order mu, so working with the factors (not
// Lx^T Z Lx, whose eigenvalues are of order mu^2) keeps them accurate.
bool compute_scaling(const RealMatrix& X, const RealMatrix& Z, Scaling& s) {
  Eigen::LLT<RealMatrix> lx(X), lz(Z);
  if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
  const RealMatrix Lx = lx.matrixL();
  const RealMatrix Lz = lz.matrixL();
  Eigen::JacobiSVD<RealMatrix> svd(Lz.transpose() * Lx, Eigen::ComputeFullV);
  const RealVector sv = svd.singularValues();
  if (!sv.allFinite() || sv.minCoeff() <= 0.0) return false;
  const RealMatrix& V = svd.matrixV();
  s.d = sv;
  s.G = Lx * V * sv.array().rsqrt().matrix().asDiagonal();
  // Ginv = S^{1/2} V^T Lx^{-1}
  const RealMatrix LinvTV = Lx.transpose().triangularView<Eigen::Upper>().solve(V);
  s.Ginv = sv.array().sqrt().matrix().asDiagonal() * LinvTV.transpose();
  s.W = s.G * s.G.transpose();
  s.W = 0.5 * (s.W + s.W.transpose());
  return true;
}

// Largest alpha with D + alpha * Delta >= 0 (Delta in the scaled space).
double max_step(const RealVector& d, const RealMatrix& delta) {
  const RealVector isd = d.array().rsqrt();
  const RealMatrix S = isd.asDiagonal() * delta * isd.asDiagonal();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

class InteriorPoint {
 public:
  InteriorPoint(const SDPProblem& problem, const SolverOptions& opts)
      : prob_(problem), opts_(opts), cp_(compile(problem)) {}

  SolverResult run();

 private:
  void init_point();
  RealMatrix cone_value(const Cone& k, const RealVector& x) const;
  RealVector lp_value(const RealVector& x) const;
  RealVector lp_apply(const RealVector& dx) const;
  RealVector adjoint(const std::vector<RealMatrix>& Xs, const RealVector& xl) const;
  RealMatrix cone_apply(const Cone& k, const RealVector& dx) const;
  void build_schur();
  bool factor();
  void newton(const std::vector<RealMatrix>& Rc, const RealVector& Rcl);
  void newton_core(const std::vector<RealMatrix>& Ys, const RealVector& Rcl, const RealVector& r1,
                   const std::vector<RealMatrix>& R2, const RealVector& r2l, const RealVector& r3);
  SolverResult finish(SolverStatus status, int iters, std::string message) const;

  const SDPProblem& prob_;
  SolverOptions opts_;
  Compiled cp_;

  RealVector x_, w_;
  std::vector<RealMatrix> X_, Z_;
  RealVector xl_, zl_;

  // Residuals.
  RealVector r1_, r3_, r2l_;
  std::vector<RealMatrix> R2_;

  std::vector<Scaling> sc_;
  RealVector wl_;
  RealMatrix schur_;
  double theta_ = 0.0;
  Eigen::LLT<RealMatrix> schur_llt_;
  Eigen::PartialPivLU<RealMatrix> schur_lu_;
  bool use_lu_ = false;
  RealMatrix minv_Et_;
  Eigen::PartialPivLU<RealMatrix> eq_lu_;

  // Newton output.
  RealVector dx_, dw_, dxl_, dzl_;
  std::vector<RealMatrix> dX_, dZ_;
  std::vector<RealMatrix> dXs_, dZs_;  // scaled
};

void InteriorPoint::init_point() {
  const int n = cp_.n;
  x_ = RealVector::Zero(n);
  w_ = RealVector::Zero(cp_.E.rows());
  X_.clear();
  Z_.clear();
  for (const auto& k : cp_.cones) {
    double xi = std::max(10.0, std::sqrt(static_cast<double>(k.n)));
    double eta = std::max(10.0, std::sqrt(static_cast<double>(k.n)));
    double c0n = k.c0.norm();
    eta = std::max(eta, c0n);
    for (const auto& t : k.terms) {
      double bn = t.use_dense ? t.dense.norm() : 0.0;
      if (!t.use_dense) {
        for (const auto& e : t.entries) bn += (e.r == e.c ? 1.0 : 2.0) * e.v * e.v;
        bn = std::sqrt(bn);
      }
      xi = std::max(xi, k.n * (1.0 + std::abs(cp_.c(t.var))) / (1.0 + bn));
      eta = std::max(eta, bn);
    }
    X_.push_back(xi * RealMatrix::Identity(k.n, k.n));
    Z_.push_back(eta * RealMatrix::Identity(k.n, k.n));
  }
  const int m = static_cast<int>(cp_.lp.size());
  xl_.resize(m);
  zl_.resize(m);
  for (int j = 0; j < m; ++j) {
    double xi = 10.0, eta = std::max(10.0, std::abs(cp_.lp[j].c0));
    for (const auto& [i, a] : cp_.lp[j].coeffs) {
      xi = std::max(xi, (1.0 + std::abs(cp_.c(i))) / (1.0 + std::abs(a)));
      eta = std::max(eta, std::abs(a));
    }
    xl_(j) = xi;
    zl_(j) = eta;
  }
}

RealMatrix InteriorPoint::cone_value(const Cone& k, const RealVector& x) const {
  RealMatrix v = k.c0;
  for (const auto& t : k.terms) {
    if (x(t.var) == 0.0) continue;
    if (t.use_dense)
      v.noalias() += x(t.var) * t.dense;
    else
      add_sym(v, t.entries, x(t.var));
  }
  return v;
}

RealMatrix InteriorPoint::cone_apply(const Cone& k, const RealVector& dx) const {
  RealMatrix v = RealMatrix::Zero(k.n, k.n);
  for (const auto& t : k.terms) {
    if (dx(t.var) == 0.0) continue;
    if (t.use_dense)
      v.noalias() += dx(t.var) * t.dense;
    else
      add_sym(v, t.entries, dx(t.var));
  }
  return v;
}

RealVector InteriorPoint::lp_value(const RealVector& x) const {
  RealVector v(cp_.lp.size());
  for (std::size_t j = 0; j < cp_.lp.size(); ++j) {
    double s = cp_.lp[j].c0;
    for (const auto& [i, a] : cp_.lp[j].coeffs) s += a * x(i);
    v(j) = s;
  }
  return v;
}

RealVector InteriorPoint::lp_apply(const RealVector& dx) const {
  RealVector v(cp_.lp.size());
  for (std::size_t j = 0; j < cp_.lp.size(); ++j) {
    double s = 0.0;
    for (const auto& [i, a] : cp_.lp[j].coeffs) s += a * dx(i);
    v(j) = s;
  }
  return v;
}

RealVector InteriorPoint::adjoint(const std::vector<RealMatrix>& Xs, const RealVector& xl) const {
  RealVector g = RealVector::Zero(cp_.n);
  for (std::size_t k = 0; k < cp_.cones.size(); ++k)
    for (const auto& t : cp_.cones[k].terms)
      g(t.var) += t.use_dense ? (t.dense.array() * Xs[k].array()).sum() : sym_inner(t.entries, Xs[k]);
  for (std::size_t j = 0; j < cp_.lp.size(); ++j)
    for (const auto& [i, a] : cp_.lp[j].coeffs) g(i) += a * xl(j);
  return g;
}

void InteriorPoint::build_schur() {
  const int n = cp_.n;
  schur_ = RealMatrix::Zero(n, n);
  RealMatrix Gi;
  for (std::size_t k = 0; k < cp_.cones.size(); ++k) {
    const auto& cone = cp_.cones[k];
    const RealMatrix& W = sc_[k].W;
    const int nt = static_cast<int>(cone.terms.size());
    for (int a = 0; a < nt; ++a) {
      const auto& ta = cone.terms[a];
      if (ta.use_dense) {
        Gi.noalias() = W * ta.dense * W;
      } else {
        Gi = RealMatrix::Zero(cone.n, cone.n);
        for (const auto& e : ta.entries) {
          if (e.r == e.c) {
            Gi.noalias() += e.v * W.col(e.r) * W.col(e.r).transpose();
          } else {
            Gi.noalias() += e.v * W.col(e.r) * W.col(e.c).transpose();
            Gi.noalias() += e.v * W.col(e.c) * W.col(e.r).transpose();
          }
        }
      }
      for (int b = a; b < nt; ++b) {
        const auto& tb = cone.terms[b];
        const double v = tb.use_dense ? (tb.dense.array() * Gi.array()).sum() : sym_inner(tb.entries, Gi);
        const int i = std::min(ta.var, tb.var), j = std::max(ta.var, tb.var);
        schur_(i, j) += v;
        if (i == j && a != b) schur_(i, j) += v;  // distinct terms sharing a variable
      }
    }
  }
  for (std::size_t j = 0; j < cp_.lp.size(); ++j) {
    const double wj = wl_(j);
    const auto& cf = cp_.lp[j].coeffs;
    for (std::size_t a = 0; a < cf.size(); ++a)
      for (std::size_t b = a; b < cf.size(); ++b) {
        const int i = std::min(cf[a].first, cf[b].first), jj = std::max(cf[a].first, cf[b].first);
        double v = wj * cf[a].second * cf[b].second;
        if (i == jj && a != b) v *= 2.0;
        schur_(i, jj) += v;
      }
  }
  schur_.triangularView<Eigen::StrictlyLower>() = schur_.transpose().triangularView<Eigen::StrictlyLower>();
  if (cp_.E.rows() > 0) {
    theta_ = std::max(1e-8, schur_.diagonal().mean());
    schur_.noalias() += theta_ * cp_.E.transpose() * cp_.E;
  } else {
    theta_ = 0.0;
  }
}

bool InteriorPoint::factor() {
  const int n = cp_.n;
  use_lu_ = false;
  const double dmax = n > 0 ? std::max(1.0, schur_.diagonal().cwiseAbs().maxCoeff()) : 1.0;
  double reg = 1e-14 * dmax;
  for (int attempt = 0; attempt < 6; ++attempt) {
    RealMatrix Mr = schur_;
    Mr.diagonal().array() += reg;
    schur_llt_.compute(Mr);
    if (schur_llt_.info() == Eigen::Success) break;
    reg *= 100.0;
    if (attempt == 5) {
      schur_lu_.compute(Mr);
      use_lu_ = true;
    }
  }
  if (cp_.E.rows() > 0) {
    const RealMatrix Et = cp_.E.transpose();
    minv_Et_ = use_lu_ ? RealMatrix(schur_lu_.solve(Et)) : RealMatrix(schur_llt_.solve(Et));
    const RealMatrix S = cp_.E * minv_Et_;
    eq_lu_.compute(S);
  }
  return true;
}

// Ys[k] is the scaled complementarity term: the X-space right-hand side is
// G Ys G^T. Directions are formed in the scaled space, where
// dX~ = Ys - G^T dZ G avoids cancellation when W is ill conditioned.
void InteriorPoint::newton_core(const std::vector<RealMatrix>& Ys, const RealVector& Rcl, const RealVector& r1,
                                const std::vector<RealMatrix>& R2, const RealVector& r2l, const RealVector& r3) {
  const std::size_t K = cp_.cones.size();
  std::vector<RealMatrix> T(K);
  for (std::size_t k = 0; k < K; ++k) {
    const RealMatrix& G = sc_[k].G;
    T[k] = G * (Ys[k] - G.transpose() * R2[k] * G) * G.transpose();
  }
  const RealVector Tl = Rcl.array() - wl_.array() * r2l.array();
  RealVector h = adjoint(T, Tl) - r1;
  if (cp_.E.rows() > 0) h.noalias() += theta_ * cp_.E.transpose() * r3;
  auto msolve = [&](const RealVector& v) -> RealVector {
    RealVector s = use_lu_ ? RealVector(schur_lu_.solve(v)) : RealVector(schur_llt_.solve(v));
    // Iterative refinement against the unregularized matrix.
    for (int k = 0; k < 2; ++k) {
      const RealVector r = v - schur_ * s;
      s += use_lu_ ? RealVector(schur_lu_.solve(r)) : RealVector(schur_llt_.solve(r));
    }
    return s;
  };
  const RealVector mh = msolve(h);
  if (cp_.E.rows() > 0) {
    dw_ = eq_lu_.solve(cp_.E * mh - r3);
    dx_ = mh - minv_Et_ * dw_;
  } else {
    dw_.resize(0);
    dx_ = mh;
  }
  dX_.resize(K);
  dZ_.resize(K);
  dXs_.resize(K);
  dZs_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const RealMatrix& G = sc_[k].G;
    dZ_[k] = R2[k] + cone_apply(cp_.cones[k], dx_);
    dZs_[k] = G.transpose() * dZ_[k] * G;
    dZs_[k] = 0.5 * (dZs_[k] + dZs_[k].transpose());
    dXs_[k] = Ys[k] - dZs_[k];
    dXs_[k] = 0.5 * (dXs_[k] + dXs_[k].transpose());
    dX_[k] = G * dXs_[k] * G.transpose();
    dX_[k] = 0.5 * (dX_[k] + dX_[k].transpose());
  }
  dzl_ = r2l + lp_apply(dx_);
  dxl_ = Rcl.array() - wl_.array() * dzl_.array();
}

// Solves the Newton system, then refines against the residual of the
// linearized dual and equality equations (the other equations hold by
// construction). Near the boundary dX is a small difference of large
// terms, so one correction pass recovers several digits.
void InteriorPoint::newton(const std::vector<RealMatrix>& Ys, const RealVector& Rcl) {
  newton_core(Ys, Rcl, r1_, R2_, r2l_, r3_);
  const std::size_t K = cp_.cones.size();
  const int p = static_cast<int>(cp_.E.rows());
  const double scale = 1.0 + r1_.cwiseAbs().maxCoeff();
  for (int pass = 0; pass < 2; ++pass) {
    RealVector e1 = r1_ - adjoint(dX_, dxl_);
    if (p > 0) e1.noalias() += cp_.E.transpose() * dw_;
    const RealVector e3 = p > 0 ? RealVector(r3_ - cp_.E * dx_) : RealVector();
    const double err = std::max(e1.size() ? e1.cwiseAbs().maxCoeff() : 0.0, p > 0 ? e3.cwiseAbs().maxCoeff() : 0.0);
    if (!(err > 1e-15 * scale)) break;
    const RealVector dx = dx_, dw = dw_, dxl = dxl_, dzl = dzl_;
    const std::vector<RealMatrix> dX = dX_, dZ = dZ_, dXs = dXs_, dZs = dZs_;
    std::vector<RealMatrix> zeros(K);
    for (std::size_t k = 0; k < K; ++k) zeros[k] = RealMatrix::Zero(cp_.cones[k].n, cp_.cones[k].n);
    newton_core(zeros, RealVector::Zero(Rcl.size()), e1, zeros, RealVector::Zero(r2l_.size()), e3);
    dx_ += dx;
    if (p > 0) dw_ += dw;
    dxl_ += dxl;
    dzl_ += dzl;
    for (std::size_t k = 0; k < K; ++k) {
      dX_[k] += dX[k];
      dZ_[k] += dZ[k];
      dXs_[k] += dXs[k];
      dZs_[k] += dZs[k];
    }
  }
}

SolverResult InteriorPoint::run() {
  const int n = cp_.n;
  const std::size_t K = cp_.cones.size();
  const int m = static_cast<int>(cp_.lp.size());
  const int p = static_cast<int>(cp_.E.rows());
  init_point();

  double c0norm = 0.0;
  for (const auto& k : cp_.cones) c0norm = std::max(c0norm, k.c0.norm());
  for (const auto& r : cp_.lp) c0norm = std::max(c0norm, std::abs(r.c0));
  const double cnorm = n > 0 ? cp_.c.cwiseAbs().maxCoeff() : 0.0;
  const double fnorm = p > 0 ? cp_.f.cwiseAbs().maxCoeff() : 0.0;
  double nu = m;
  for (const auto& k : cp_.cones) nu += k.n;
  if (nu == 0) {
    // No cone at all: only equalities. Feasible point via least squares; the
    // objective must vanish on the null space for a bounded problem.
    x_ = RealVector::Zero(n);
    RealVector c_free = cp_.c;
    if (p > 0) {
      const auto cod = cp_.E.completeOrthogonalDecomposition();
      x_ = cod.solve(cp_.f);
      if ((cp_.E * x_ - cp_.f).cwiseAbs().maxCoeff() > opts_.tol * (1.0 + fnorm))
        return finish(SolverStatus::Infeasible, 0, "inconsistent equalities");
      w_ = cp_.E.transpose().completeOrthogonalDecomposition().solve(cp_.c);
      c_free = cp_.c - cp_.E.transpose() * w_;
    }
    if (n > 0 && c_free.cwiseAbs().maxCoeff() > opts_.tol * (1.0 + cnorm))
      return finish(SolverStatus::MaxIters, 0, "objective unbounded on the equality set");
    return finish(SolverStatus::Optimal, 0, "no conic constraints");
  }


  double size0 = 0.0;
  for (const auto& Xk : X_) size0 += Xk.trace();
  size0 += xl_.sum();

  int stall = 0;
  std::optional<SolverResult> acceptable, relaxed;
  const double relaxed_tol = std::max(opts_.tol, opts_.relaxed_tol);
  double best_merit = kInf;
  int best_iter = 0;
  auto bail = [&](SolverStatus st, int it, const char* msg) {
    if (acceptable) return *acceptable;
    if (relaxed) {
      SolverResult r = *relaxed;
      r.status = st == SolverStatus::Optimal ? SolverStatus::MaxIters : st;
      r.message = std::string(msg) + "; best iterate within relaxed tolerance returned";
      return r;
    }
    return finish(st, it, msg);
  };
  sc_.resize(K);
  R2_.resize(K);
  for (int iter = 0; iter < opts_.max_iters; ++iter) {
    // Residuals.
    double pinf = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      R2_[k] = cone_value(cp_.cones[k], x_) - Z_[k];
      pinf = std::max(pinf, R2_[k].norm() / (1.0 + c0norm));
    }
    const RealVector lv = lp_value(x_);
    r2l_ = lv - zl_;
    if (m > 0) pinf = std::max(pinf, r2l_.cwiseAbs().maxCoeff() / (1.0 + c0norm));
    r3_ = p > 0 ? RealVector(cp_.f - cp_.E * x_) : RealVector();
    if (p > 0) pinf = std::max(pinf, r3_.cwiseAbs().maxCoeff() / (1.0 + fnorm));
    const RealVector adjX = adjoint(X_, xl_);
    RealVector cert = adjX;
    if (p > 0) cert.noalias() -= cp_.E.transpose() * w_;
    r1_ = -(cp_.c + cert);
    const double dinf = n > 0 ? r1_.cwiseAbs().maxCoeff() / (1.0 + cnorm) : 0.0;

    double c0X = 0.0, xz = 0.0, sizeX = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      c0X += (cp_.cones[k].c0.array() * X_[k].array()).sum();
      xz += (X_[k].array() * Z_[k].array()).sum();
      sizeX += X_[k].trace();
    }
    for (int j = 0; j < m; ++j) c0X += cp_.lp[j].c0 * xl_(j);
    xz += xl_.dot(zl_);
    sizeX += xl_.sum();
    const double dobj = c0X + (p > 0 ? cp_.f.dot(w_) : 0.0);
    const double pobj = n > 0 ? cp_.c.dot(x_) : 0.0;
    const double gap = std::abs(dobj - pobj) / (1.0 + std::abs(pobj));
    const double mu = xz / nu;

    // Aim one decade below tol; keep the last iterate that already meets tol
    // in case progress stalls before then.
    if (pinf <= opts_.tol && dinf <= opts_.tol && gap <= opts_.tol) {
      SolverResult r = finish(SolverStatus::Optimal, iter, "converged");
      const double worst = std::max({r.kkt_residuals.primal, r.kkt_residuals.dual, r.kkt_residuals.gap});
      if (worst <= 0.1 * opts_.tol) return r;
      if (worst <= opts_.tol) acceptable = std::move(r);
    }
    // Near the optimum the dual residual can drift upward as the scaling
    // becomes ill-conditioned. Remember the best iterate within the relaxed
    // tolerance and stop once it has not improved for a few iterations.
    const double merit = std::max({pinf, dinf, gap});
    if (!acceptable && merit <= relaxed_tol && merit < best_merit) {
      SolverResult r = finish(SolverStatus::MaxIters, iter, "");
      const double worst = std::max({r.kkt_residuals.primal, r.kkt_residuals.dual, r.kkt_residuals.gap});
      if (worst <= relaxed_tol) {
        best_merit = merit;
        best_iter = iter;
        relaxed = std::move(r);
      }
    }
    if (acceptable && iter >= acceptable->iterations + 3) return *acceptable;
    if (!acceptable && relaxed && iter >= best_iter + 4)
      return bail(SolverStatus::MaxIters, iter, "progress stalled");
    // Farkas certificate: X >= 0 with B^*(X) - E^T w = 0 and <C0,X> + f.w < 0.
    const double tcert = -dobj;
    if (tcert > 0.0 && sizeX > 1e6 * size0 && (n == 0 || cert.cwiseAbs().maxCoeff() <= 1e-8 * tcert))
      return finish(SolverStatus::Infeasible, iter, "infeasibility certificate found");
    if (!x_.allFinite() || !std::isfinite(sizeX))
      return bail(SolverStatus::NumericalFailure, iter, "iterates diverged");

    for (std::size_t k = 0; k < K; ++k)
      if (!compute_scaling(X_[k], Z_[k], sc_[k]))
        return bail(SolverStatus::NumericalFailure, iter, "lost positive definiteness");
    wl_ = xl_.array() / zl_.array();
    build_schur();
    if (!schur_.allFinite()) return bail(SolverStatus::NumericalFailure, iter, "non-finite Schur complement");
    factor();

    // Predictor.
    std::vector<RealMatrix> Rc(K);
    for (std::size_t k = 0; k < K; ++k) Rc[k] = -RealMatrix(sc_[k].d.asDiagonal());
    RealVector Rcl = -xl_;
    newton(Rc, Rcl);
    if (!dx_.allFinite()) return bail(SolverStatus::NumericalFailure, iter, "non-finite search direction");
    std::vector<RealMatrix> dXs = dXs_, dZs = dZs_;
    double ap = 1.0, ad = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
      ap = std::min(ap, max_step(sc_[k].d, dXs[k]));
      ad = std::min(ad, max_step(sc_[k].d, dZs[k]));
    }
    for (int j = 0; j < m; ++j) {
      if (dxl_(j) < 0) ap = std::min(ap, -xl_(j) / dxl_(j));
      if (dzl_(j) < 0) ad = std::min(ad, -zl_(j) / dzl_(j));
    }
    double xz_aff = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      xz_aff += ((X_[k] + ap * dX_[k]).array() * (Z_[k] + ad * dZ_[k]).array()).sum();
    xz_aff += (xl_ + ap * dxl_).dot(zl_ + ad * dzl_);
    const double mu_aff = std::max(0.0, xz_aff / nu);
    double sigma = std::pow(mu_aff / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);
    // Keep some centering while far from feasibility.
    if (std::max(pinf, dinf) > 1e-2) sigma = std::max(sigma, 0.1);

    // Corrector.
    for (std::size_t k = 0; k < K; ++k) {
      const RealVector& d = sc_[k].d;
      RealMatrix R = -0.5 * (dXs[k] * dZs[k] + dZs[k] * dXs[k]);
      R.diagonal().array() += sigma * mu - d.array().square();
      RealMatrix Y(R.rows(), R.cols());
      for (int a = 0; a < R.rows(); ++a)
        for (int b = 0; b < R.cols(); ++b) Y(a, b) = 2.0 * R(a, b) / (d(a) + d(b));
      Rc[k] = 0.5 * (Y + Y.transpose());
    }
    Rcl = (sigma * mu - xl_.array() * zl_.array() - dxl_.array() * dzl_.array()) / zl_.array();
    newton(Rc, Rcl);
    if (!dx_.allFinite()) return bail(SolverStatus::NumericalFailure, iter, "non-finite search direction");

    double apm = kInf, adm = kInf;
    for (std::size_t k = 0; k < K; ++k) {
      apm = std::min(apm, max_step(sc_[k].d, dXs_[k]));
      adm = std::min(adm, max_step(sc_[k].d, dZs_[k]));
    }
    for (int j = 0; j < m; ++j) {
      if (dxl_(j) < 0) apm = std::min(apm, -xl_(j) / dxl_(j));
      if (dzl_(j) < 0) adm = std::min(adm, -zl_(j) / dzl_(j));
    }
    const double tau = std::clamp(0.9 + 0.09 * std::min(std::min(apm, adm), 1.0), 0.9, 0.99);
    ap = std::min(1.0, tau * apm);
    ad = std::min(1.0, tau * adm);

    // The step bound comes from the scaled space; back off further if the
    // unscaled update is not numerically positive definite.
    auto shrink_until_pd = [&](const std::vector<RealMatrix>& base, const std::vector<RealMatrix>& dir,
                               double& alpha) {
      std::vector<RealMatrix> out(K);
      for (int tries = 0; tries < 30; ++tries) {
        bool ok = true;
        for (std::size_t k = 0; k < K && ok; ++k) {
          out[k] = base[k] + alpha * dir[k];
          out[k] = 0.5 * (out[k] + out[k].transpose());
          ok = Eigen::LLT<RealMatrix>(out[k]).info() == Eigen::Success;
        }
        if (ok) return out;
        alpha *= 0.7;
      }
      alpha = 0.0;
      return base;
    };
    X_ = shrink_until_pd(X_, dX_, ap);
    Z_ = shrink_until_pd(Z_, dZ_, ad);
    xl_ += ap * dxl_;
    zl_ += ad * dzl_;
    if (p > 0) w_ += ap * dw_;
    x_ += ad * dx_;

    if (ap < 1e-9 && ad < 1e-9) {
      if (++stall >= 3) return bail(SolverStatus::MaxIters, iter + 1, "step lengths stalled");
    } else {
      stall = 0;
    }
  }
  return bail(SolverStatus::MaxIters, opts_.max_iters, "iteration limit reached");
}

SolverResult InteriorPoint::finish(SolverStatus status, int iters, std::string message) const {
  SolverResult r;
  r.status = status;
  r.x = x_;
  r.objective_value = cp_.n > 0 ? cp_.c.dot(x_) : 0.0;
  r.iterations = iters;
  r.message = std::move(message);

  r.block_duals.resize(prob_.lmi_blocks.size());
  for (std::size_t k = 0; k < prob_.lmi_blocks.size(); ++k) {
    const int dim = prob_.lmi_blocks[k].dim;
    if (cp_.block_lp_row[k] >= 0) {
      ComplexMatrix v(1, 1);
      v(0, 0) = xl_.size() ? xl_(cp_.block_lp_row[k]) : 0.0;
      r.block_duals[k] = HermitianMatrix::from_trusted(v);
    } else if (cp_.block_cone[k] >= 0 && !X_.empty()) {
      const auto& cone = cp_.cones[cp_.block_cone[k]];
      const RealMatrix& Xk = X_[cp_.block_cone[k]];
      if (cone.embedded) {
        r.block_duals[k] = from_real_embedding(Xk) * 2.0;
      } else {
        r.block_duals[k] = HermitianMatrix::from_trusted(Xk.cast<Complex>());
      }
    } else {
      r.block_duals[k] = HermitianMatrix::zero(dim);
    }
  }
  r.ineq_duals = RealVector::Zero(prob_.linear_ineqs.size());
  r.lower_duals = RealVector::Zero(prob_.var_bounds.size());
  r.upper_duals = RealVector::Zero(prob_.var_bounds.size());
  for (std::size_t j = 0; j < cp_.lp.size() && j < static_cast<std::size_t>(xl_.size()); ++j) {
    const auto& row = cp_.lp[j];
    switch (row.kind) {
      case RowKind::Ineq: r.ineq_duals(row.source) = xl_(j); break;
      case RowKind::Lower: r.lower_duals(row.source) = xl_(j); break;
      case RowKind::Upper: r.upper_duals(row.source) = xl_(j); break;
      case RowKind::Block: break;
    }
  }
  r.eq_duals = RealVector::Zero(prob_.linear_eqs.size());
  for (int i = 0; i < static_cast<int>(prob_.linear_eqs.size()) && i < w_.size(); ++i)
    r.eq_duals(i) = w_(i) / cp_.eq_scale(i);
  r.kkt_residuals = check_kkt(prob_, r);
  return r;
}

}  // namespace

SolverResult solve(const SDPProblem& problem, double tol, int max_iters) {
  return solve(problem, SolverOptions{tol, max_iters});
}

bool usable(const SolverResult& r, double relaxed_tol) {
  if (r.status == SolverStatus::Optimal) return true;
  if (r.status == SolverStatus::Infeasible || r.x.size() == 0) return false;
  const auto& k = r.kkt_residuals;
  return std::max({k.primal, k.dual, k.gap}) <= relaxed_tol;
}

SolverResult solve(const SDPProblem& problem, const SolverOptions& options) {
  problem.validate();
  InteriorPoint ipm(problem, options);
  return ipm.run();
}

// ---------------------------------------------------------------------------
// Independent residual recomputation

KktResiduals check_kkt(const SDPProblem& problem, const SolverResult& result) {
  KktResiduals out;
  const RealVector& x = result.x;
  if (x.size() != problem.num_vars) {
    out.primal = out.dual = out.gap = kInf;
    return out;
  }
  const double pobj = problem.num_vars > 0 ? problem.objective.dot(x) : 0.0;

  double primal = 0.0;
  for (const auto& b : problem.lmi_blocks) {
    const HermitianMatrix F = b.evaluate(x);
    primal = std::max(primal, std::max(0.0, -min_eigenvalue(F)) / (1.0 + F.frobenius_norm()));
  }
  for (const auto& r : problem.linear_ineqs)
    primal = std::max(primal, std::max(0.0, r.dot(x) - r.rhs) / (1.0 + std::abs(r.rhs)));
  for (const auto& r : problem.linear_eqs)
    primal = std::max(primal, std::abs(r.dot(x) - r.rhs) / (1.0 + std::abs(r.rhs)));
  for (std::size_t i = 0; i < problem.var_bounds.size(); ++i) {
    const auto& vb = problem.var_bounds[i];
    if (std::isfinite(vb.lower))
      primal = std::max(primal, std::max(0.0, vb.lower - x(i)) / (1.0 + std::abs(vb.lower)));
    if (std::isfinite(vb.upper))
      primal = std::max(primal, std::max(0.0, x(i) - vb.upper) / (1.0 + std::abs(vb.upper)));
  }
  out.primal = primal;

  const bool have_duals = result.block_duals.size() == problem.lmi_blocks.size() &&
                          result.ineq_duals.size() == static_cast<Eigen::Index>(problem.linear_ineqs.size()) &&
                          result.eq_duals.size() == static_cast<Eigen::Index>(problem.linear_eqs.size()) &&
                          result.lower_duals.size() == static_cast<Eigen::Index>(problem.var_bounds.size()) &&
                          result.upper_duals.size() == static_cast<Eigen::Index>(problem.var_bounds.size());
  if (!have_duals) {
    out.dual = out.gap = kInf;
    return out;
  }

  RealVector g = problem.objective;
  double dobj = 0.0;
  double cone_violation = 0.0;
  auto inner = [](const std::vector<MatrixEntry>& es, const HermitianMatrix& X) {
    // Re tr(B X) for B given by its stored triangle.
    double s = 0.0;
    for (const auto& e : es) {
      if (e.row == e.col)
        s += e.value.real() * X(e.row, e.row).real();
      else
        s += 2.0 * (e.value * X(e.col, e.row)).real();
    }
    return s;
  };
  for (std::size_t k = 0; k < problem.lmi_blocks.size(); ++k) {
    const auto& b = problem.lmi_blocks[k];
    const HermitianMatrix& Xk = result.block_duals[k];
    if (Xk.dim() != b.dim) {
      out.dual = out.gap = kInf;
      return out;
    }
    for (const auto& t : b.terms) g(t.var) += inner(t.entries, Xk);
    dobj += inner(b.constant, Xk);
    cone_violation = std::max(cone_violation, std::max(0.0, -min_eigenvalue(Xk)) / (1.0 + Xk.frobenius_norm()));
  }
  for (std::size_t j = 0; j < problem.linear_ineqs.size(); ++j) {
    const double y = result.ineq_duals(j);
    for (const auto& [i, a] : problem.linear_ineqs[j].coeffs) g(i) -= y * a;
    dobj += y * problem.linear_ineqs[j].rhs;
    cone_violation = std::max(cone_violation, std::max(0.0, -y));
  }
  for (std::size_t i = 0; i < problem.var_bounds.size(); ++i) {
    const auto& vb = problem.var_bounds[i];
    const double yl = result.lower_duals(i), yu = result.upper_duals(i);
    g(i) += yl - yu;
    if (std::isfinite(vb.lower)) dobj -= yl * vb.lower;
    if (std::isfinite(vb.upper)) dobj += yu * vb.upper;
    cone_violation = std::max({cone_violation, -yl, -yu});
  }
  for (std::size_t r = 0; r < problem.linear_eqs.size(); ++r) {
    const double w = result.eq_duals(r);
    for (const auto& [i, a] : problem.linear_eqs[r].coeffs) g(i) -= w * a;
    dobj += w * problem.linear_eqs[r].rhs;
  }
  const double cn = problem.num_vars > 0 ? problem.objective.cwiseAbs().maxCoeff() : 0.0;
  const double gres = problem.num_vars > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
  out.dual = std::max(gres / (1.0 + cn), cone_violation);
  out.gap = std::abs(dobj - pobj) / (1.0 + std::abs(pobj));
  return out;
}

}  // namespace marisa
