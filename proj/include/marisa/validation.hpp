// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/config.hpp"
#include "marisa/stage_positions.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace marisa {

// Property suites run by `marisa validate`. Each suite draws its own random
// instances and compares a closed form or a linearization against direct
// sampling.
struct SuiteReport {
  std::string name;
  bool passed = false;
  long checked = 0;
  long violations = 0;
  double max_error = 0.0;  // suite-specific: absolute or relative, see detail
  double seconds = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<SuiteReport> suites;
  bool passed() const;
  std::vector<std::string> failing() const;
  nlohmann::json to_json() const;
};

struct ValidationOptions {
  std::uint64_t seed = 1;
  SystemConfig config;  // scenario settings for the stage-1 and gradient suites

  int theorem1_cases = 100;  // per radius
  std::vector<double> theorem1_rho2{0.0, 0.1, 1.0};
  int theorem1_samples = 100000;
  int theorem1_dim = 4;

  int sprocedure_scenarios = 20;
  int sprocedure_samples = 10000;  // per user and stage-1 iterate
  double sprocedure_tol = 1e-5;    // relative, solver accuracy

  int gradient_points = 200;
  double gradient_step = 1e-6;  // meters
  double gradient_tol = 1e-5;   // relative
  GradientFn gradient = rate_gradient;

  int fta_samples = 10000;
  int separation_samples = 100000;

  std::vector<std::string> only;  // suite names; empty runs all

  // Divides every sample count by `factor` (at least one sample each).
  void shrink(int factor);
};

inline const std::vector<std::string> kValidationSuites{"theorem1", "s_procedure", "gradient", "fta", "separation"};

SuiteReport validate_theorem1(const ValidationOptions& o);
SuiteReport validate_s_procedure(const ValidationOptions& o);
SuiteReport validate_gradient(const ValidationOptions& o);
SuiteReport validate_fta(const ValidationOptions& o);
SuiteReport validate_separation(const ValidationOptions& o);

// Throws ConfigError for unknown names in `only`.
ValidationReport run_validation(const ValidationOptions& o);

// Rate gradient with both components negated; a deliberately broken model
// for checking that the gradient suite catches sign errors.
RateGradient sign_flipped_gradient(const ChannelRealization& r, const AntennaPositions& pos,
                                   const RISConfiguration& ris, const PrecodingSolution& sol, int m, int l,
                                   RateKind which);

}  // namespace marisa
