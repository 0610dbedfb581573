#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "eigenshape/eigensolver.hpp"

namespace eigenshape {

// Best fit of boundary curvature by a quadratic form of the cluster traces,
//   kappa(theta) ~ sum_ij M_ij (dn u_i)(dn u_j),
// with M positive semidefinite and trace one. mu are the eigenvalues of M
// (descending, summing to one) and basis_rotation its eigenvectors; in the
// rotated trace basis the fit is the convex combination sum_i mu_i (dn v_i)^2.
struct Certificate {
  Eigen::MatrixXd M_psd;
  Eigen::VectorXd mu;
  Eigen::MatrixXd basis_rotation;
  double residual_l2 = 0.0;
  double residual_rel = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct CertificateOptions {
  int max_iters = 20000;
  double tol = 1e-14;  // relative step-size stop
};

Certificate fit_certificate(const Eigen::VectorXd& curvature, const Eigen::MatrixXd& traces,
                            const Eigen::VectorXd& dsigma, const CertificateOptions& opts = {});

// Minimum-norm point of the convex hull of the columns of C: returns simplex
// weights gamma minimizing ||C gamma||. Projected gradient with exact
// Lipschitz step plus an active-support polish solve.
Eigen::VectorXd simplex_min_norm(const Eigen::MatrixXd& columns, int max_iters = 20000,
                                 double tol = 1e-15);

// Dichotomy for a finite family of nonzero vectors: either a direction nu with
// <zeta_i, nu> < 0 for all i, or nonnegative nonzero weights gamma with
// sum gamma_i zeta_i = 0. Decided through the minimum-norm point of the hull.
struct PositiveDependence {
  bool dependent = false;   // true: gamma case
  Eigen::VectorXd gamma;    // simplex weights (dependent case)
  Eigen::VectorXd nu;       // unit separating direction (independent case)
  double margin = 0.0;      // dependent: hull min-norm; else max_i <zeta_i, nu>
};

PositiveDependence positive_dependence(const std::vector<Eigen::VectorXd>& zetas,
                                       double eps_rel = 1e-9);

// Greedy max-volume selection of m angle samples whose trace vectors
// psi(theta) = (dn u_1, ..., dn u_m)(theta) are safely independent, restricted
// to angles with curvature above kappa_min. Returns indices into the grid.
std::vector<int> select_points(const Eigen::MatrixXd& traces, const Eigen::VectorXd& curvature,
                               double kappa_min = 1e-6, double eps_indep = 1e-8);

void write_certificate_json(const std::string& path, const Certificate& cert,
                            const Cluster& cluster);

}  // namespace eigenshape
