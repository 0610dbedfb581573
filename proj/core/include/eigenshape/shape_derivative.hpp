#pragma once

#include <Eigen/Dense>

#include "eigenshape/eigensolver.hpp"
#include "eigenshape/geometry.hpp"

namespace eigenshape {

// Quadrature weights of the normal-velocity measure V.n dsigma for a radial
// perturbation field: w_i = delta_rho(theta_i) * rho(theta_i) * dtheta.
// (The normal component of delta_rho e_r times the arclength element collapses
// to this product, so no normals enter explicitly.)
Eigen::VectorXd vn_measure(const BoundaryFields& fields, const Direction& direction);

// d lambda / d eps = - int (dn u)^2 V.n dsigma for a simple eigenvalue.
double simple_eig_derivative(const Eigen::VectorXd& trace, const Eigen::VectorXd& vn_weights);

// Cluster derivative matrix a_ij = - int (dn u_i)(dn u_j) V.n dsigma for the
// trace columns of an eigenvalue cluster. Symmetric as assembled.
Eigen::MatrixXd cluster_matrix(const Eigen::MatrixXd& traces, const Eigen::VectorXd& vn_weights);

// One-sided directional rates of the penalized objective along the direction:
// sorted eigenvalues of the cluster matrix, each shifted by the perimeter rate.
// rate_k picks the branch belonging to index k inside the cluster.
struct DirectionalRates {
  Eigen::VectorXd rates;  // ascending
  double rate_k = 0.0;
};

DirectionalRates objective_directional(const Eigen::MatrixXd& cluster_mat, double per_rate,
                                       int k, const Cluster& cluster);

// Perimeter rate along a direction: coefficient directions contract against
// perimeter_gradient; grid directions integrate curvature against V.n dsigma.
double perimeter_rate(const FourierBoundary& boundary, const BoundaryFields& fields,
                      const Direction& direction);

}  // namespace eigenshape
