// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/config.hpp"
#include "marisa/linalg.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace marisa {

using Rng = std::mt19937_64;

// Independent stream for (seed, stream) pairs, e.g. (master seed, trial).
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

struct PathGeometry {
  RealVector tx_elev, tx_azim;  // L_t angles in [0, pi]
  RealVector rx_elev, rx_azim;  // L_r angles in [0, pi]
  std::vector<Point2> ris_element_positions;
};

struct AntennaPositions {
  std::vector<Point2> t;
};

// Unit-modulus reflection vector with its phases and lifted matrix v v^H.
struct RISConfiguration {
  RealVector phases;  // [0, 2 pi)
  ComplexVector v;
  HermitianMatrix V;

  static RISConfiguration from_phases(const RealVector& phases);
  // Projects every entry to unit modulus first (zero entries map to 1).
  static RISConfiguration from_vector(const ComplexVector& v);
  static RISConfiguration all_ones(int n);
};

struct ChannelRealization {
  double wavelength = 0.1;
  double sigma2 = 1e-11;
  PathGeometry geometry;
  ComplexMatrix Lambda;                 // L_r x L_t, diagonal
  ComplexMatrix F_r;                    // L_r x N, RIS field-response matrix
  std::vector<Point2> user_positions;
  std::vector<ComplexVector> h_ris_user;  // M vectors of length N
  RealVector rho_hat2;                  // per-user squared uncertainty radius

  int num_users() const { return static_cast<int>(h_ris_user.size()); }
  int num_elements() const { return static_cast<int>(F_r.cols()); }
};

// x sin(elev) cos(azim) + y cos(elev)
double distance_diff(Point2 t, double elev, double azim);
ComplexVector frv(Point2 t, const RealVector& elevs, const RealVector& azims, double lambda);
ComplexMatrix frm(const std::vector<Point2>& points, const RealVector& elevs, const RealVector& azims,
                  double lambda);

// lambda/2 grid, rows x cols with rows the largest divisor of n not above
// sqrt(n), centered at the origin.
std::vector<Point2> ris_grid(int n, double lambda);
// L points on a lambda/2 grid (spacing max(lambda/2, D)) centered in C_t.
AntennaPositions initial_positions(const SystemConfig& c);

// Path loss P0 * max(d, 1)^-nu.
double path_gain(const SystemConfig& c, double distance, double nu);

ComplexMatrix sample_path_response(const SystemConfig& c, Rng& rng);
std::vector<Point2> sample_user_positions(const SystemConfig& c, Rng& rng);
std::vector<ComplexVector> sample_ris_user_channels(const SystemConfig& c, const std::vector<Point2>& users,
                                                    Rng& rng);

// Full draw: users, path angles, Lambda, RIS-user channels. The uncertainty
// radii are fixed here from the reference layout (initial antenna grid,
// all-ones RIS): rho_hat2_m = rho * ||g_m g_m^H||.
ChannelRealization sample_realization(const SystemConfig& c, Rng& rng);

// H = F_r^H Lambda F_t(t), N x L.
ComplexMatrix bs_ris_channel(const ChannelRealization& r, const AntennaPositions& pos);
// g_m with g_m^H = h_m^H diag(v) H.
ComplexVector effective_user_channel(const ChannelRealization& r, const ComplexMatrix& H, const ComplexVector& v,
                                     int m);
ComplexVector effective_user_channel(const ChannelRealization& r, const AntennaPositions& pos,
                                     const RISConfiguration& ris, int m);
std::vector<ComplexVector> effective_channels(const ChannelRealization& r, const AntennaPositions& pos,
                                              const ComplexVector& v);

// Uniform in the complex ball {z in C^dim : ||z|| <= radius}.
ComplexVector sample_error_in_ball(double radius, int dim, Rng& rng);

HermitianMatrix estimated_covariance(const ChannelRealization& r, const AntennaPositions& pos,
                                     const RISConfiguration& ris, int m);

nlohmann::json realization_to_json(const ChannelRealization& r);
ChannelRealization realization_from_json(const nlohmann::json& j);

}  // namespace marisa
