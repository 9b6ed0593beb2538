// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "json.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace marisa {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Physical and algorithmic parameters. Powers are linear (W); see
// config_from_json for the dB/dBm inputs accepted at load time.
struct SystemConfig {
  // Dimensions.
  int L = 4;    // movable antennas at the BS
  int N = 8;    // RIS elements
  int M = 3;    // users
  int L_t = 4;  // transmit paths
  int L_r = 4;  // receive paths (must equal L_t)

  // Geometry (meters).
  double lambda = 0.1;
  double A = 0.3;  // region side, C_t = [-A/2, A/2]^2
  double D = 0.05;
  Point2 bs_pos{0.0, 0.0};
  Point2 ris_pos{30.0, 0.0};
  Point2 user_disk_center{30.0, -10.0};
  double user_disk_radius = 10.0;

  // Link budget.
  double P_t = 15.0;
  double sigma2 = 1e-11;  // -80 dBm
  double R_min = 1.0;
  double rician_k = 3.0;          // BS-RIS
  double ris_user_rician_k = 3.0; // RIS-user
  double nu1 = 2.0;
  double nu2 = 2.5;
  double P0 = 1e-3;  // -30 dB at 1 m
  double rho = 0.01;

  // Algorithm.
  std::uint64_t seed = 1;
  int chi_max = 20;
  int eps1 = 3;
  int eps2 = 3;
  int eps3 = 3;
  int randomization_count = 200;
  double rank_threshold = 1e-6;
  double ao_tol = 1e-4;
  double inner_tol = 1e-4;
  double solver_tol = 1e-7;
  int solver_max_iters = 100;
  bool enable_positions = true;  // false = fixed-position (FPA) baseline
  double trust_region = 0.0;     // initial stage-3 radius; 0 means lambda / 4
  double proximal_weight = 1e-6;
  double log_chord_ratio = 1.05;
  double log_chord_fine_ratio = 1.01;

  int L_p() const { return L_t; }
  double initial_trust_region() const { return trust_region > 0.0 ? trust_region : lambda / 4.0; }
  // Throws ConfigError when an invariant fails.
  void validate() const;
};

double db_to_linear(double db);
double dbm_to_watts(double dbm);

// Unknown keys are rejected. Besides the field names above, accepts
// "L_p" (sets L_t and L_r), "sigma2_dbm", "P0_db" and "P_t_dbm".
SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SystemConfig& c);
SystemConfig load_config(const std::string& path);

}  // namespace marisa
