#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "eigenshape/geometry.hpp"
#include "eigenshape/mesh.hpp"

namespace eigenshape {

// P1 stiffness and consistent mass over all mesh vertices.
struct AssembledForms {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SparseMatrix<double> mass;
  std::vector<int> interior_ids;          // mesh vertex index per interior dof
  std::vector<int> dof_of_vertex;         // -1 for boundary vertices
};

AssembledForms assemble_p1(const Mesh& mesh);

// Lowest K Dirichlet eigenpairs. Modes are mass-orthonormal; rows follow
// AssembledForms interior dof order (stored in interior_ids here as well).
struct Spectrum {
  std::vector<double> values;   // ascending
  Eigen::MatrixXd modes;        // interior_count x K
  std::vector<int> interior_ids;
  double mass_defect = 0.0;     // max |modes^T M modes - I|
  int iterations = 0;
};

Spectrum solve_spectrum(const Mesh& mesh, int K);

// Outward normal derivatives recovered from the variational flux
//   int_bnd (dn u) v dsigma = int grad u . grad v - lambda int u v
// for boundary hat functions v, projected onto the boundary P1 space and
// interpolated to the BoundaryFields angle grid.
struct NormalTraces {
  Eigen::MatrixXd values;  // M x K, column per eigenfunction
};

NormalTraces normal_trace(const Mesh& mesh, const Spectrum& spectrum, const BoundaryFields& fields);

// Single-mode flux recovery; mode is a full interior dof vector.
Eigen::VectorXd flux_trace(const Mesh& mesh, const AssembledForms& forms,
                           const Eigen::VectorXd& interior_mode, double lambda,
                           const BoundaryFields& fields);

// Maximal index range around k (1-based) whose consecutive relative gaps stay
// below tau. Throws ClusterTouchesTop when the range reaches the last value.
struct Cluster {
  int lo = 0;
  int hi = 0;
  int size() const { return hi - lo + 1; }
};

Cluster detect_cluster(const std::vector<double>& values, int k, double tau);

// CSV with header "index,lambda", one row per eigenvalue, full precision.
void write_spectrum_csv(const std::string& path, const std::vector<double>& values);

}  // namespace eigenshape
