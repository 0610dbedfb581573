#pragma once

#include <array>
#include <string>
#include <vector>

#include "eigenshape/geometry.hpp"

namespace eigenshape {

// Structured polar triangulation: one center vertex, n_r rings of n_theta
// vertices each, radially graded as r_i(theta_j) = (i/n_r) * rho(theta_j).
// Vertex order and triangle order are fixed functions of (n_r, n_theta), so
// identical inputs yield bit-identical meshes.
struct Mesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW
  std::vector<int> boundary_ids;              // outer ring, increasing theta
  std::vector<double> boundary_thetas;        // angle of each boundary vertex
  int n_r = 0;
  int n_theta = 0;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int interior_count() const { return vertex_count() - static_cast<int>(boundary_ids.size()); }
};

Mesh build_mesh(const FourierBoundary& boundary, int n_r, int n_theta);

// Plain text dump: one "x y" line per vertex, then one "i j k" line per triangle.
void write_mesh(const std::string& path, const Mesh& mesh);

}  // namespace eigenshape
