// SPDX-License-Identifier: Apache-2.0
#include "marisa/sdp_json.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace marisa {

using nlohmann::json;

namespace {

json entries_to_json(const std::vector<MatrixEntry>& es) {
  json a = json::array();
  for (const auto& e : es) a.push_back({e.row, e.col, e.value.real(), e.value.imag()});
  return a;
}

std::vector<MatrixEntry> entries_from_json(const json& a) {
  std::vector<MatrixEntry> out;
  for (const auto& e : a) {
    if (!e.is_array() || e.size() < 3 || e.size() > 4)
      throw std::invalid_argument("SDP JSON: matrix entry must be [row, col, re] or [row, col, re, im]");
    const double im = e.size() == 4 ? e[3].get<double>() : 0.0;
    out.push_back({e[0].get<int>(), e[1].get<int>(), Complex(e[2].get<double>(), im)});
  }
  return out;
}

json rows_to_json(const std::vector<LinearRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) {
    json c = json::array();
    for (const auto& [i, v] : r.coeffs) c.push_back({i, v});
    a.push_back({{"coeffs", c}, {"rhs", r.rhs}});
  }
  return a;
}

std::vector<LinearRow> rows_from_json(const json& a) {
  std::vector<LinearRow> out;
  for (const auto& r : a) {
    LinearRow row;
    for (const auto& c : r.at("coeffs")) row.coeffs.emplace_back(c.at(0).get<int>(), c.at(1).get<double>());
    row.rhs = r.at("rhs").get<double>();
    out.push_back(std::move(row));
  }
  return out;
}

json bound_value(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const RealVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

json problem_to_json(const SDPProblem& p) {
  json j;
  j["num_vars"] = p.num_vars;
  j["objective"] = vector_json(p.objective);
  json blocks = json::array();
  for (const auto& b : p.lmi_blocks) {
    json terms = json::array();
    for (const auto& t : b.terms) terms.push_back({{"var", t.var}, {"entries", entries_to_json(t.entries)}});
    blocks.push_back({{"dim", b.dim}, {"label", b.label}, {"constant", entries_to_json(b.constant)}, {"terms", terms}});
  }
  j["lmi_blocks"] = blocks;
  j["linear_ineqs"] = rows_to_json(p.linear_ineqs);
  j["linear_eqs"] = rows_to_json(p.linear_eqs);
  json bounds = json::array();
  for (const auto& vb : p.var_bounds) bounds.push_back({bound_value(vb.lower), bound_value(vb.upper)});
  j["var_bounds"] = bounds;
  return j;
}

SDPProblem problem_from_json(const json& j) {
  SDPProblem p;
  p.num_vars = j.at("num_vars").get<int>();
  const auto& obj = j.at("objective");
  p.objective = RealVector::Zero(obj.size());
  for (std::size_t i = 0; i < obj.size(); ++i) p.objective(i) = obj[i].get<double>();
  if (j.contains("lmi_blocks")) {
    for (const auto& b : j.at("lmi_blocks")) {
      LmiBlock blk(b.at("dim").get<int>(), b.value("label", std::string{}));
      if (b.contains("constant")) blk.constant = entries_from_json(b.at("constant"));
      if (b.contains("terms"))
        for (const auto& t : b.at("terms")) blk.terms.push_back({t.at("var").get<int>(), entries_from_json(t.at("entries"))});
      p.lmi_blocks.push_back(std::move(blk));
    }
  }
  if (j.contains("linear_ineqs")) p.linear_ineqs = rows_from_json(j.at("linear_ineqs"));
  if (j.contains("linear_eqs")) p.linear_eqs = rows_from_json(j.at("linear_eqs"));
  if (j.contains("var_bounds")) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (const auto& b : j.at("var_bounds")) {
      VarBound vb;
      vb.lower = b.at(0).is_null() ? -inf : b.at(0).get<double>();
      vb.upper = b.at(1).is_null() ? inf : b.at(1).get<double>();
      p.var_bounds.push_back(vb);
    }
  }
  p.validate();
  return p;
}

json result_to_json(const SolverResult& r) {
  json j;
  j["status"] = to_string(r.status);
  j["objective_value"] = r.objective_value;
  j["x"] = vector_json(r.x);
  j["iterations"] = r.iterations;
  j["message"] = r.message;
  j["kkt_residuals"] = {{"primal", r.kkt_residuals.primal}, {"dual", r.kkt_residuals.dual}, {"gap", r.kkt_residuals.gap}};
  return j;
}

}  // namespace marisa
