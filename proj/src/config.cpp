// SPDX-License-Identifier: Apache-2.0
#include "marisa/config.hpp"

#include <cmath>
#include <fstream>

namespace marisa {

using nlohmann::json;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

void SystemConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  need(L >= 1 && N >= 1 && M >= 1, "L, N, M must be positive");
  need(L_t >= 1 && L_r >= 1, "path counts must be positive");
  need(L_t == L_r, "L_t must equal L_r");
  need(lambda > 0.0 && A >= 0.0 && D >= 0.0, "lambda > 0, A >= 0, D >= 0 required");
  need(D <= A || L == 1, "D must not exceed A");
  need(P_t > 0.0 && sigma2 > 0.0 && P0 > 0.0, "powers must be positive");
  need(R_min >= 0.0, "R_min must be nonnegative");
  need(rician_k >= 0.0 && ris_user_rician_k >= 0.0, "Rician factors must be nonnegative");
  need(rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
  need(user_disk_radius >= 0.0, "user disk radius must be nonnegative");
  need(chi_max >= 1 && eps1 >= 1 && eps2 >= 1 && eps3 >= 1, "iteration caps must be positive");
  need(randomization_count >= 1, "randomization_count must be positive");
  need(solver_tol > 0.0 && solver_max_iters >= 1, "solver settings invalid");
  need(log_chord_ratio > 1.0 && log_chord_fine_ratio > 1.0, "chord ratios must exceed 1");
  // Initial layout must fit: a ceil(sqrt(L))-wide grid at lambda/2 spacing.
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(L))));
  const double spacing = std::max(lambda / 2.0, D);
  need(L == 1 || (cols - 1) * spacing <= A + 1e-12, "region too small for the initial antenna grid");
}

namespace {

Point2 point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("config: points are [x, y] arrays");
  return {j[0].get<double>(), j[1].get<double>()};
}

json point_to_json(const Point2& p) { return json::array({p.x, p.y}); }

}  // namespace

SystemConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  SystemConfig c;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "L") c.L = v.get<int>();
      else if (key == "N") c.N = v.get<int>();
      else if (key == "M") c.M = v.get<int>();
      else if (key == "L_t") c.L_t = v.get<int>();
      else if (key == "L_r") c.L_r = v.get<int>();
      else if (key == "L_p") c.L_t = c.L_r = v.get<int>();
      else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "A") c.A = v.get<double>();
      else if (key == "D") c.D = v.get<double>();
      else if (key == "bs_pos") c.bs_pos = point_from_json(v);
      else if (key == "ris_pos") c.ris_pos = point_from_json(v);
      else if (key == "user_disk_center") c.user_disk_center = point_from_json(v);
      else if (key == "user_disk_radius") c.user_disk_radius = v.get<double>();
      else if (key == "P_t") c.P_t = v.get<double>();
      else if (key == "P_t_dbm") c.P_t = dbm_to_watts(v.get<double>());
      else if (key == "sigma2") c.sigma2 = v.get<double>();
      else if (key == "sigma2_dbm") c.sigma2 = dbm_to_watts(v.get<double>());
      else if (key == "R_min") c.R_min = v.get<double>();
      else if (key == "rician_k") c.rician_k = v.get<double>();
      else if (key == "ris_user_rician_k") c.ris_user_rician_k = v.get<double>();
      else if (key == "nu1") c.nu1 = v.get<double>();
      else if (key == "nu2") c.nu2 = v.get<double>();
      else if (key == "P0") c.P0 = v.get<double>();
      else if (key == "P0_db") c.P0 = db_to_linear(v.get<double>());
      else if (key == "rho") c.rho = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "chi_max") c.chi_max = v.get<int>();
      else if (key == "eps1") c.eps1 = v.get<int>();
      else if (key == "eps2") c.eps2 = v.get<int>();
      else if (key == "eps3") c.eps3 = v.get<int>();
      else if (key == "randomization_count") c.randomization_count = v.get<int>();
      else if (key == "rank_threshold") c.rank_threshold = v.get<double>();
      else if (key == "ao_tol") c.ao_tol = v.get<double>();
      else if (key == "inner_tol") c.inner_tol = v.get<double>();
      else if (key == "solver_tol") c.solver_tol = v.get<double>();
      else if (key == "solver_max_iters") c.solver_max_iters = v.get<int>();
      else if (key == "enable_positions") c.enable_positions = v.get<bool>();
      else if (key == "trust_region") c.trust_region = v.get<double>();
      else if (key == "proximal_weight") c.proximal_weight = v.get<double>();
      else if (key == "log_chord_ratio") c.log_chord_ratio = v.get<double>();
      else if (key == "log_chord_fine_ratio") c.log_chord_fine_ratio = v.get<double>();
      else throw ConfigError("config: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

json config_to_json(const SystemConfig& c) {
  return json{{"L", c.L},
              {"N", c.N},
              {"M", c.M},
              {"L_t", c.L_t},
              {"L_r", c.L_r},
              {"lambda", c.lambda},
              {"A", c.A},
              {"D", c.D},
              {"bs_pos", point_to_json(c.bs_pos)},
              {"ris_pos", point_to_json(c.ris_pos)},
              {"user_disk_center", point_to_json(c.user_disk_center)},
              {"user_disk_radius", c.user_disk_radius},
              {"P_t", c.P_t},
              {"sigma2", c.sigma2},
              {"R_min", c.R_min},
              {"rician_k", c.rician_k},
              {"ris_user_rician_k", c.ris_user_rician_k},
              {"nu1", c.nu1},
              {"nu2", c.nu2},
              {"P0", c.P0},
              {"rho", c.rho},
              {"seed", c.seed},
              {"chi_max", c.chi_max},
              {"eps1", c.eps1},
              {"eps2", c.eps2},
              {"eps3", c.eps3},
              {"randomization_count", c.randomization_count},
              {"rank_threshold", c.rank_threshold},
              {"ao_tol", c.ao_tol},
              {"inner_tol", c.inner_tol},
              {"solver_tol", c.solver_tol},
              {"solver_max_iters", c.solver_max_iters},
              {"enable_positions", c.enable_positions},
              {"trust_region", c.trust_region},
              {"proximal_weight", c.proximal_weight},
              {"log_chord_ratio", c.log_chord_ratio},
              {"log_chord_fine_ratio", c.log_chord_fine_ratio}};
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace marisa
