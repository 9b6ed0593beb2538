// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "marisa/conic_solver.hpp"

#include "json.hpp"

namespace marisa {

// Schema (see docs/sdp_problem.md):
// {
//   "num_vars": n,
//   "objective": [c_0, ..., c_{n-1}],
//   "lmi_blocks": [{"dim": d, "label": "...",
//                   "constant": [[r, c, re, im], ...],
//                   "terms": [{"var": i, "entries": [[r, c, re, im], ...]}]}],
//   "linear_ineqs": [{"coeffs": [[i, a_i], ...], "rhs": b}],      // a.x <= b
//   "linear_eqs":   [{"coeffs": [[i, a_i], ...], "rhs": b}],
//   "var_bounds":   [[lo, hi], ...]                                // null = infinite
// }
nlohmann::json problem_to_json(const SDPProblem& p);
SDPProblem problem_from_json(const nlohmann::json& j);

nlohmann::json result_to_json(const SolverResult& r);

}  // namespace marisa
