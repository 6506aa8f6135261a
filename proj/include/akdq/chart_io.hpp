#ifndef AKDQ_CHART_IO_HPP
#define AKDQ_CHART_IO_HPP

#include <iosfwd>

#include "akdq/geometry.hpp"

namespace akdq {

// On-disk chart description.  JSON object with keys:
//   name        string
//   description string (optional)
//   dimension   int
//   jet_order   int
//   omega       2D array of expression strings; entries with j < k suffice,
//               the strict lower triangle is filled by antisymmetry (explicit
//               lower/diagonal entries, when present, must be consistent)
//   J           full 2D array of expression strings, J[k][j] = J^k_j
struct GeometrySpec {
  int dimension = 0;
  int jet_order = 0;
  std::vector<std::vector<std::string>> omega;
  std::vector<std::vector<std::string>> J;
  std::string name;
  std::string description;
};

GeometrySpec load_geometry_spec(const std::string& path);
GeometrySpec parse_geometry_spec(const std::string& json_text);

// Lowers expression strings to jets.  Throws errc::input on shape or parse
// problems (including inconsistent redundant omega entries).
ChartGeometry to_chart(const GeometrySpec& spec);

// Optional jet-order override (e.g. a star-order budget); <= 0 keeps the
// file's jet_order.
ChartGeometry load_chart(const std::string& path, int order_override = 0);

}  // namespace akdq

#endif
