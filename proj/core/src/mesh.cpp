#include "eigenshape/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "eigenshape/errors.hpp"

namespace eigenshape {

Mesh build_mesh(const FourierBoundary& boundary, int n_r, int n_theta) {
  if (n_r < 2 || n_theta < 8)
    throw std::invalid_argument("build_mesh: need n_r >= 2 and n_theta >= 8");
  require_star_shaped(boundary);

  Mesh mesh;
  mesh.n_r = n_r;
  mesh.n_theta = n_theta;

  const auto thetas = uniform_angles(n_theta);
  const auto rs = radius_eval(boundary, thetas);

  mesh.vertices.reserve(1 + static_cast<std::size_t>(n_r) * n_theta);
  mesh.vertices.push_back({0.0, 0.0});
  for (int i = 1; i <= n_r; ++i) {
    const double frac = static_cast<double>(i) / n_r;
    for (int j = 0; j < n_theta; ++j) {
      const double r = frac * rs.rho[j];
      mesh.vertices.push_back({r * std::cos(thetas[j]), r * std::sin(thetas[j])});
    }
  }

  auto ring_vertex = [n_theta](int i, int j) { return 1 + (i - 1) * n_theta + (j % n_theta); };

  mesh.triangles.reserve(static_cast<std::size_t>(n_theta) * (2 * n_r - 1));
  for (int j = 0; j < n_theta; ++j)
    mesh.triangles.push_back({0, ring_vertex(1, j), ring_vertex(1, j + 1)});
  for (int i = 1; i < n_r; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      const int v00 = ring_vertex(i, j);
      const int v01 = ring_vertex(i, j + 1);
      const int v10 = ring_vertex(i + 1, j);
      const int v11 = ring_vertex(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }

  mesh.boundary_ids.reserve(n_theta);
  for (int j = 0; j < n_theta; ++j) mesh.boundary_ids.push_back(ring_vertex(n_r, j));
  mesh.boundary_thetas = thetas;
  return mesh;
}

void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_mesh: cannot open " + path);
  char line[80];
  for (const auto& v : mesh.vertices) {
    std::snprintf(line, sizeof line, "%.17g %.17g\n", v[0], v[1]);
    out << line;
  }
  for (const auto& t : mesh.triangles) {
    std::snprintf(line, sizeof line, "%d %d %d\n", t[0], t[1], t[2]);
    out << line;
  }
}

}  // namespace eigenshape
