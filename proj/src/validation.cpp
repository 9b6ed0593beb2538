// SPDX-License-Identifier: Apache-2.0
#include "marisa/validation.hpp"

#include "marisa/driver.hpp"
#include "marisa/rates.hpp"
#include "marisa/stage_precoding.hpp"
#include "marisa/stage_ris.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace marisa {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ComplexVector gaussian_vec(int n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> nd;
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * Complex(nd(rng), nd(rng));
  return v;
}

HermitianMatrix unit_diag_psd(int n, int rank, Rng& rng) {
  ComplexMatrix B(rank, n);
  for (int j = 0; j < n; ++j) {
    const ComplexVector col = gaussian_vec(rank, rng);
    B.col(j) = col / col.norm();
  }
  return HermitianMatrix::from_trusted(B.adjoint() * B);
}

HermitianMatrix random_psd(int n, int rank, Rng& rng) {
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < rank; ++k) {
    const ComplexVector v = gaussian_vec(n, rng);
    a += v * v.adjoint();
  }
  return HermitianMatrix::from_trusted(a);
}

// Uniform in the Frobenius ball of Hermitian n x n matrices (n^2 real
// coordinates).
ComplexMatrix hermitian_in_ball(int n, double radius, Rng& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ComplexMatrix h(n, n);
  for (int r = 0; r < n; ++r) {
    h(r, r) = nd(rng) * std::sqrt(2.0);
    for (int c = r + 1; c < n; ++c) {
      h(r, c) = Complex(nd(rng), nd(rng));
      h(c, r) = std::conj(h(r, c));
    }
  }
  h *= radius * std::pow(u(rng), 1.0 / (n * n)) / h.norm();
  return h;
}

PrecodingSolution random_precoders(const SystemConfig& c, Rng& rng) {
  const ComplexVector pc = gaussian_vec(c.L, rng);
  std::vector<ComplexVector> p;
  double total = pc.squaredNorm();
  for (int m = 0; m < c.M; ++m) {
    p.push_back(gaussian_vec(c.L, rng, 0.5));
    total += p.back().squaredNorm();
  }
  const double s = std::sqrt(c.P_t / total);
  for (auto& v : p) v *= s;
  return PrecodingSolution::from_vectors(s * pc, p);
}

RISConfiguration random_ris(int n, Rng& rng) {
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  RealVector phases(n);
  for (int i = 0; i < n; ++i) phases(i) = ph(rng);
  return RISConfiguration::from_phases(phases);
}

void finish(SuiteReport& r, Clock::time_point t0) {
  r.seconds = seconds_since(t0);
  r.passed = r.violations == 0 && r.checked > 0;
}

}  // namespace

bool ValidationReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteReport& s) { return s.passed; });
}

std::vector<std::string> ValidationReport::failing() const {
  std::vector<std::string> out;
  for (const auto& s : suites)
    if (!s.passed) out.push_back(s.name);
  return out;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  j["passed"] = passed();
  j["failing"] = failing();
  j["suites"] = nlohmann::json::array();
  for (const auto& s : suites)
    j["suites"].push_back({{"name", s.name},
                           {"passed", s.passed},
                           {"checked", s.checked},
                           {"violations", s.violations},
                           {"max_error", s.max_error},
                           {"seconds", s.seconds},
                           {"detail", s.detail}});
  return j;
}

void ValidationOptions::shrink(int factor) {
  if (factor <= 1) return;
  auto f = [factor](int& n) { n = std::max(1, n / factor); };
  f(theorem1_cases);
  f(theorem1_samples);
  f(sprocedure_scenarios);
  f(sprocedure_samples);
  f(gradient_points);
  f(fta_samples);
  f(separation_samples);
}

SuiteReport validate_theorem1(const ValidationOptions& o) {
  const auto t0 = Clock::now();
  SuiteReport r;
  r.name = "theorem1";
  Rng rng = make_rng(o.seed, 101);
  const int n = o.theorem1_dim;
  for (double rho2 : o.theorem1_rho2) {
    for (int k = 0; k < o.theorem1_cases; ++k) {
      const ComplexVector a = gaussian_vec(n, rng);
      const HermitianMatrix Psi = HermitianMatrix::outer(a);
      const ComplexMatrix& P = Psi.matrix();
      // tr(Psi Xi) = sum conj(P_ij) Xi_ij for Hermitian P.
      auto inner = [&P, n](const ComplexMatrix& X) {
        double s = 0.0;
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) s += (std::conj(P(i, j)) * X(i, j)).real();
        return s;
      };
      double best = inner(P * (rho2 / P.norm()));
      for (int s = 0; s < o.theorem1_samples; ++s) best = std::max(best, inner(hermitian_in_ball(n, rho2, rng)));
      const double value = theorem1_value(Psi, rho2);
      const double err = std::abs(value - best) / std::max(1.0, std::abs(best));
      r.max_error = std::max(r.max_error, err);
      ++r.checked;
      if (err > 1e-9) ++r.violations;
    }
  }
  r.detail = "relative error of the closed form against the sampled maximum";
  finish(r, t0);
  return r;
}

SuiteReport validate_s_procedure(const ValidationOptions& o) {
  const auto t0 = Clock::now();
  SuiteReport r;
  r.name = "s_procedure";
  const SystemConfig& c = o.config;
  int iterates = 0;
  for (int trial = 0; trial < o.sprocedure_scenarios; ++trial) {
    Rng rng = make_rng(o.seed, static_cast<std::uint64_t>(trial));
    const ChannelRealization real = sample_realization(c, rng);
    Rng er = make_rng(o.seed, 1000003ull + static_cast<std::uint64_t>(trial));
    const double tol = o.sprocedure_tol;
    auto excess = [tol](double lhs, double rhs) { return (lhs - rhs) / (1.0 + std::abs(rhs)); };
    const PrecodingObserver check = [&](const RateInputs& inp, const P3Result& p) {
      ++iterates;
      const auto& v = p.values;
      const HermitianMatrix S1 = p.lifted.private_sum();
      for (std::size_t m = 0; m < inp.g.size(); ++m) {
        const int dim = static_cast<int>(inp.g[m].size());
        const double radius = std::sqrt(inp.rho_hat2(m));
        const HermitianMatrix S2 = p.lifted.private_sum(static_cast<int>(m));
        for (int k = 0; k < o.sprocedure_samples; ++k) {
          const ComplexVector h = inp.g[m] + sample_error_in_ball(radius, dim, er);
          auto q = [&h](const HermitianMatrix& X) { return (h.adjoint() * X.matrix() * h)(0).real(); };
          const double sp = q(p.lifted.P[m]), ip = q(S2) + inp.sigma2;
          const double sc = q(p.lifted.P_c), ic = q(S1) + inp.sigma2;
          // Each entry is a violation amount; positive beyond tol counts.
          const double e[] = {excess(v.u(m), sp),          excess(ip, v.zeta(m)),
                              excess(v.w(m), sc),          excess(ic, v.beta(m)),
                              excess(v.gamma(m) * ip, sp), excess(v.gamma_c * ic, sc)};
          ++r.checked;
          double worst = *std::max_element(std::begin(e), std::end(e));
          r.max_error = std::max(r.max_error, worst);
          if (worst > tol) ++r.violations;
        }
      }
    };
    try {
      optimize(real, c, rng, {}, check);
    } catch (const InfeasibleScenario&) {
      // Every stage-1 iterate up to the failure has been checked.
    }
  }
  r.detail = std::to_string(iterates) +
             " stage-1 iterates along the optimization; max relative excess over the robust constraints";
  if (iterates == 0) ++r.violations;
  finish(r, t0);
  return r;
}

SuiteReport validate_gradient(const ValidationOptions& o) {
  const auto t0 = Clock::now();
  SuiteReport r;
  r.name = "gradient";
  SystemConfig c = o.config;
  Rng rng = make_rng(o.seed, 202);
  std::uniform_real_distribution<double> u(-c.A / 2.0, c.A / 2.0);
  const double h = o.gradient_step;
  long skipped = 0;
  for (int guard = 0; r.checked < o.gradient_points && guard < 100 * o.gradient_points; ++guard) {
    const ChannelRealization real = sample_realization(c, rng);
    AntennaPositions pos;
    for (int l = 0; l < c.L; ++l) pos.t.push_back({u(rng), u(rng)});
    const RISConfiguration ris = random_ris(c.N, rng);
    const PrecodingSolution sol = random_precoders(c, rng);
    const int l = guard % c.L;
    for (int m = 0; m < c.M && r.checked < o.gradient_points; ++m)
      for (RateKind kind : {RateKind::Private, RateKind::Common}) {
        if (r.checked >= o.gradient_points) break;
        auto at = [&](double dx, double dy) {
          AntennaPositions p = pos;
          p.t[l].x += dx;
          p.t[l].y += dy;
          return worst_case_rate(real, p, ris, sol, m, kind);
        };
        const double xp = at(h, 0), xm = at(-h, 0), yp = at(0, h), ym = at(0, -h);
        const RateGradient g = o.gradient(real, pos, ris, sol, m, l, kind);
        // Stay away from the clamp, where the rate is not differentiable.
        if (g.clamped || xp == 0.0 || xm == 0.0 || yp == 0.0 || ym == 0.0) {
          ++skipped;
          continue;
        }
        const double fx = (xp - xm) / (2 * h), fy = (yp - ym) / (2 * h);
        const double rel = std::hypot(g.dx - fx, g.dy - fy) / std::max(std::hypot(fx, fy), 1e-3);
        r.max_error = std::max(r.max_error, rel);
        ++r.checked;
        if (rel > o.gradient_tol) ++r.violations;
      }
  }
  if (r.checked < o.gradient_points) ++r.violations;
  r.detail = "relative error against central differences; " + std::to_string(skipped) + " clamped points skipped";
  finish(r, t0);
  return r;
}

SuiteReport validate_fta(const ValidationOptions& o) {
  const auto t0 = Clock::now();
  SuiteReport r;
  r.name = "fta";
  Rng rng = make_rng(o.seed, 303);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  const int N = o.config.N;
  double anchor_err = 0.0;
  // A fresh set of rate matrices and anchor every 100 samples.
  HermitianMatrix W2, S2, anchor;
  double rho2 = 0.0, sigma2 = 1.0;
  for (int k = 0; k < o.fta_samples; ++k) {
    if (k % 100 == 0) {
      W2 = random_psd(N, 1 + k / 100 % 3, rng);
      S2 = random_psd(o.config.L, 2, rng);
      anchor = unit_diag_psd(N, 1 + k / 100 % N, rng);
      rho2 = 0.1 * ur(rng);
      sigma2 = 0.01 + ur(rng);
      const double a0 = std::log2(trace_inner(anchor, W2) + rho2 * S2.trace() + sigma2);
      anchor_err = std::max({anchor_err, std::abs(fta_private(anchor, anchor, W2, S2, rho2, sigma2) - a0),
                             std::abs(fta_common(anchor, anchor, W2, S2, rho2, sigma2) - a0)});
    }
    const HermitianMatrix V = unit_diag_psd(N, 1 + k % N, rng);
    const double exact = std::log2(trace_inner(V, W2) + rho2 * S2.trace() + sigma2);
    const double gap = std::min(fta_private(V, anchor, W2, S2, rho2, sigma2),
                                fta_common(V, anchor, W2, S2, rho2, sigma2)) - exact;
    ++r.checked;
    r.max_error = std::max(r.max_error, -gap);
    if (gap < -1e-12) ++r.violations;
  }
  if (anchor_err > 1e-10) ++r.violations;
  std::ostringstream d;
  d << "largest amount below the exact log (should be <= 0); anchor mismatch " << anchor_err;
  r.detail = d.str();
  finish(r, t0);
  return r;
}

SuiteReport validate_separation(const ValidationOptions& o) {
  const auto t0 = Clock::now();
  SuiteReport r;
  r.name = "separation";
  Rng rng = make_rng(o.seed, 404);
  std::uniform_real_distribution<double> u(-0.2, 0.2), ud(0.0, 0.1);
  long active = 0;
  for (int k = 0; k < o.separation_samples; ++k) {
    const Point2 anchor{u(rng), u(rng)}, tj{u(rng), u(rng)}, t{u(rng), u(rng)};
    const double D = ud(rng);
    const SeparationRow row = linearize_separation(anchor, tj, D);
    ++r.checked;
    if (!row.satisfied(t)) continue;
    ++active;
    const double short_by = D - std::hypot(t.x - tj.x, t.y - tj.y);
    r.max_error = std::max(r.max_error, short_by);
    if (short_by > 1e-12) ++r.violations;
  }
  r.detail = std::to_string(active) + " triples satisfied the row; max shortfall below D";
  finish(r, t0);
  return r;
}

ValidationReport run_validation(const ValidationOptions& o) {
  for (const auto& n : o.only)
    if (std::find(kValidationSuites.begin(), kValidationSuites.end(), n) == kValidationSuites.end())
      throw ConfigError("unknown validation suite '" + n + "'");
  auto want = [&o](const std::string& n) {
    return o.only.empty() || std::find(o.only.begin(), o.only.end(), n) != o.only.end();
  };
  ValidationReport rep;
  if (want("theorem1")) rep.suites.push_back(validate_theorem1(o));
  if (want("s_procedure")) rep.suites.push_back(validate_s_procedure(o));
  if (want("gradient")) rep.suites.push_back(validate_gradient(o));
  if (want("fta")) rep.suites.push_back(validate_fta(o));
  if (want("separation")) rep.suites.push_back(validate_separation(o));
  return rep;
}

RateGradient sign_flipped_gradient(const ChannelRealization& r, const AntennaPositions& pos,
                                   const RISConfiguration& ris, const PrecodingSolution& sol, int m, int l,
                                   RateKind which) {
  RateGradient g = rate_gradient(r, pos, ris, sol, m, l, which);
  g.dx = -g.dx;
  g.dy = -g.dy;
  return g;
}

}  // namespace marisa
