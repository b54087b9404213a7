#include "meshtrack/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "meshtrack/errors.hpp"

namespace meshtrack {

void TriangleMesh::validate() const {
  const int n = int(vertices.size());
  for (const auto& e : edges)
    if (e[0] < 0 || e[0] >= n || e[1] < 0 || e[1] >= n)
      throw std::invalid_argument("TriangleMesh: edge index out of range");
  for (const auto& f : faces)
    if (f[0] < 0 || f[0] >= n || f[1] < 0 || f[1] >= n || f[2] < 0 || f[2] >= n)
      throw std::invalid_argument("TriangleMesh: face index out of range");
}

bool TriangleMesh::same_topology(const TriangleMesh& o) const {
  return vertices.size() == o.vertices.size() && edges == o.edges && faces == o.faces;
}

void save_mesh(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write mesh: " + path);
  out << mesh.vertices.size() << " " << mesh.edges.size() << " " << mesh.faces.size() << "\n";
  char buf[64];
  for (const Vec2& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g\n", v.x, v.y);
    out << buf;
  }
  for (const auto& e : mesh.edges) out << "e " << e[0] << " " << e[1] << "\n";
  for (const auto& f : mesh.faces) out << "f " << f[0] << " " << f[1] << " " << f[2] << "\n";
}

TriangleMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh: " + path);
  std::size_t nv = 0, ne = 0, nf = 0;
  in >> nv >> ne >> nf;
  if (!in) throw InputError("malformed mesh header: " + path);
  TriangleMesh mesh;
  mesh.vertices.reserve(nv);
  mesh.edges.reserve(ne);
  mesh.faces.reserve(nf);
  std::string tag;
  for (std::size_t i = 0; i < nv; ++i) {
    double x, y;
    in >> tag >> x >> y;
    if (!in || tag != "v") throw InputError("malformed mesh vertex line: " + path);
    mesh.vertices.push_back({x, y});
  }
  for (std::size_t i = 0; i < ne; ++i) {
    int a, b;
    in >> tag >> a >> b;
    if (!in || tag != "e") throw InputError("malformed mesh edge line: " + path);
    mesh.edges.push_back({a, b});
  }
  for (std::size_t i = 0; i < nf; ++i) {
    int a, b, c;
    in >> tag >> a >> b >> c;
    if (!in || tag != "f") throw InputError("malformed mesh face line: " + path);
    mesh.faces.push_back({a, b, c});
  }
  mesh.validate();
  return mesh;
}

TriangleMesh lattice_mesh(double x0, double y0, double x1, double y1, int cols, int rows) {
  if (cols < 2 || rows < 2)
    throw std::invalid_argument("lattice_mesh: need at least a 2x2 lattice");
  TriangleMesh mesh;
  mesh.vertices.reserve(std::size_t(cols) * rows);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      mesh.vertices.push_back({x0 + (x1 - x0) * c / (cols - 1), y0 + (y1 - y0) * r / (rows - 1)});

  std::set<std::pair<int, int>> edge_set;
  const auto add_edge = [&](int a, int b) {
    edge_set.insert({std::min(a, b), std::max(a, b)});
  };
  for (int r = 0; r + 1 < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c) {
      const int tl = r * cols + c;
      const int tr = tl + 1;
      const int bl = tl + cols;
      const int br = bl + 1;
      mesh.faces.push_back({tl, tr, bl});
      mesh.faces.push_back({tr, br, bl});
      add_edge(tl, tr);
      add_edge(tl, bl);
      add_edge(tr, bl);
      add_edge(tr, br);
      add_edge(bl, br);
    }
  for (const auto& [a, b] : edge_set) mesh.edges.push_back({a, b});
  return mesh;
}

}  // namespace meshtrack
