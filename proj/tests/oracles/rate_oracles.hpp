// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/linalg.hpp"

#include <random>

namespace oracle {

// Random Hermitian matrix with Frobenius norm at most radius; uniform
// direction, radius scaled by u^(1/dim) with dim = n^2 real coordinates.
marisa::HermitianMatrix random_hermitian_in_ball(int n, double radius, std::mt19937_64& rng);

// max tr(Psi Xi) over `samples` random Xi in the Frobenius ball plus the
// analytic candidate rho2 * Psi / ||Psi||_F.
double theorem1_sampled_max(const marisa::HermitianMatrix& Psi, double rho2, int samples, std::mt19937_64& rng);

// max sum(r) s.t. sum(r) <= capacity, r_m >= lower_m, r >= 0, by
// enumerating vertices of the feasible polytope. Returns -1 when empty.
double allocation_lp_value(double capacity, const marisa::RealVector& lower);

}  // namespace oracle
