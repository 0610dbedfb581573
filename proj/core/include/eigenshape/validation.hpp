#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "eigenshape/geometry.hpp"

namespace eigenshape {

// Bessel function of the first kind, integer order. Long-double power series
// below the crossover radius, Hankel asymptotic expansion above it. The term
// caps exist so tests can verify stability under doubled truncation.
double bessel_j(int m, double x, int series_terms = 64, int asym_terms = 40);

// n-th positive zero of J_m (n >= 1) by scan plus bisection.
double bessel_zero(int m, int n, int series_terms = 64, int asym_terms = 40);

struct DiskEigenvalue {
  double value = 0.0;      // (j_{m,n} / R)^2
  int angular_order = 0;   // m
  int radial_index = 0;    // n
  int multiplicity = 1;    // 1 for m = 0, else 2
};

// Lowest `count` Dirichlet eigenvalues of the disk of radius R, multiplicities
// expanded so the list aligns index-by-index with solver output.
std::vector<DiskEigenvalue> disk_reference(double R, int count);

enum class HessianTestField { unit, interior_bump };

// Both sides of the distributional identity
//   int phi |D^2 u|^2 + int_bnd phi H |grad u|^2
//     = int phi (Lap u)^2 + int (grad u . grad phi) Lap u - int grad phi . D^2 u grad u
// evaluated for the first disk eigenfunction with analytic Bessel derivatives
// and piecewise Gauss-Legendre quadrature in r.
struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double err = 0.0;            // |lhs - rhs| / max(|lhs|, |rhs|)
  double boundary_term = 0.0;  // vanishes identically for compact phi
};

IdentityCheck hessian_identity_check(double R, HessianTestField phi, int quad_order = 96);

// Shape-derivative formulas against finite differences of the discrete
// eigenvalues under remeshing at fixed (n_r, n_theta). Simple eigenvalues use
// central differences; cluster branches use one-sided three-point stencils
// from the degenerate point, because sorted branches symmetrize under central
// differencing.
struct DerivativeAudit {
  bool is_simple = true;
  double formula = 0.0;           // simple case
  double fd = 0.0;                // simple case
  Eigen::VectorXd branch_formula; // cluster case, ascending
  Eigen::VectorXd branch_fd;      // cluster case, ascending
  double rel_err = 0.0;
  bool pass = false;
};

DerivativeAudit fd_derivative_audit(const FourierBoundary& boundary, int k,
                                    const Direction& direction, int n_r, int n_theta,
                                    double eps = 1e-4, double tau_cluster = 1e-3);

struct CheckLine {
  std::string name;
  bool ok = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double err = 0.0;
};

std::vector<CheckLine> run_validation_suite();

// One "name status lhs rhs err" line per check.
void write_validation_report(const std::string& path, const std::vector<CheckLine>& lines);

}  // namespace eigenshape
