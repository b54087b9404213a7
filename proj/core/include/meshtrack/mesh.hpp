#pragma once

#include <array>
#include <string>
#include <vector>

#include "meshtrack/geometry.hpp"

namespace meshtrack {

// Triangulated tracking mesh. Topology (edges, faces) is fixed once built;
// propagation only ever rewrites vertex positions.
struct TriangleMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> faces;

  void validate() const;  // throws on out-of-range indices
  bool same_topology(const TriangleMesh& o) const;
};

// Text format: header "V E F" with the three counts, then "v x y",
// "e i j" and "f i j k" lines. Positions round-trip exactly.
void save_mesh(const TriangleMesh& mesh, const std::string& path);
TriangleMesh load_mesh(const std::string& path);

// Regular cols x rows lattice covering the given rectangle, triangulated
// with two faces per cell; vertex order is row-major.
TriangleMesh lattice_mesh(double x0, double y0, double x1, double y1, int cols, int rows);

}  // namespace meshtrack
