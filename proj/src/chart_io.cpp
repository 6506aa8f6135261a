#include "akdq/chart_io.hpp"

#include <fstream>
#include <sstream>

#include "akdq/expr.hpp"
#include "json.hpp"

namespace akdq {

namespace {

std::vector<std::vector<std::string>> grid_of(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw error(errc::input, std::string("missing or non-array key '") + key + "'");
  std::vector<std::vector<std::string>> out;
  for (auto& row : j.at(key)) {
    if (!row.is_array()) throw error(errc::input, std::string(key) + " rows must be arrays");
    std::vector<std::string> r;
    for (auto& cell : row) {
      if (!cell.is_string())
        throw error(errc::input, std::string(key) + " entries must be expression strings");
      r.push_back(cell.get<std::string>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

GeometrySpec parse_geometry_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::input, std::string("invalid JSON: ") + e.what());
  }
  GeometrySpec s;
  try {
    s.dimension = j.at("dimension").get<int>();
    s.jet_order = j.at("jet_order").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::input, std::string("bad dimension/jet_order: ") + e.what());
  }
  s.omega = grid_of(j, "omega");
  s.J = grid_of(j, "J");
  s.name = j.value("name", std::string());
  s.description = j.value("description", std::string());
  return s;
}

GeometrySpec load_geometry_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::input, "cannot open chart file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_geometry_spec(ss.str());
}

ChartGeometry to_chart(const GeometrySpec& spec) {
  int n = spec.dimension;
  if (n <= 0 || n % 2 != 0)
    throw error(errc::input, "dimension must be a positive even integer");
  if (spec.jet_order < 0) throw error(errc::input, "jet_order must be nonnegative");
  if (static_cast<int>(spec.omega.size()) != n || static_cast<int>(spec.J.size()) != n)
    throw error(errc::input, "omega and J must have 'dimension' rows");

  ChartGeometry c;
  c.dim = n;
  c.order = spec.jet_order;
  c.name = spec.name;
  Jet zero(n, spec.jet_order);
  c.omega = JetMatrix(n, n, zero);
  c.J = JetMatrix(n, n, zero);

  std::vector<std::vector<bool>> given(n, std::vector<bool>(n, false));
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(spec.omega[r].size()) > n)
      throw error(errc::input, "omega row longer than dimension");
    for (int ccol = 0; ccol < static_cast<int>(spec.omega[r].size()); ++ccol) {
      const std::string& e = spec.omega[r][ccol];
      if (e.empty()) continue;
      c.omega.at(r, ccol) = parse_polynomial(e, n, spec.jet_order);
      given[r][ccol] = true;
    }
  }
  for (int r = 0; r < n; ++r)
    for (int ccol = 0; ccol < n; ++ccol) {
      if (r < ccol) continue;
      Jet want = r == ccol ? zero : -c.omega.at(ccol, r);
      if (given[r][ccol]) {
        if (c.omega.at(r, ccol) != want)
          throw error(errc::input, "omega[" + std::to_string(r + 1) + "][" +
                                       std::to_string(ccol + 1) +
                                       "] inconsistent with antisymmetry");
      } else {
        c.omega.at(r, ccol) = want;
      }
    }

  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(spec.J[r].size()) != n)
      throw error(errc::input, "J rows must have 'dimension' entries");
    for (int ccol = 0; ccol < n; ++ccol) {
      const std::string& e = spec.J[r][ccol];
      if (!e.empty()) c.J.at(r, ccol) = parse_polynomial(e, n, spec.jet_order);
    }
  }
  return c;
}

ChartGeometry load_chart(const std::string& path, int order_override) {
  GeometrySpec s = load_geometry_spec(path);
  if (order_override > 0) s.jet_order = order_override;
  return to_chart(s);
}

}  // namespace akdq
