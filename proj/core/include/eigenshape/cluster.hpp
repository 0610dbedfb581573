#pragma once

#include <Eigen/Dense>
#include <vector>

#include "eigenshape/eigensolver.hpp"
#include "eigenshape/geometry.hpp"

namespace eigenshape {

// A perimeter-neutral boundary field built from cosine-taper bumps at
// independently-selected trace points, tuned so the cluster derivative matrix
// has exactly ell negative and m - ell positive eigenvalues.
struct SignatureField {
  Direction direction;            // grid form on the BoundaryFields angles
  std::vector<int> points;        // selected angle indices
  std::vector<double> magnitudes; // bump coefficients, first ell outward (positive)
  double delta = 0.0;             // final bump half-width (radians)
  Eigen::VectorXd cluster_rates;  // eigenvalues of the derivative matrix, ascending
  double per_rate = 0.0;
  double margin = 0.0;            // min |rate| / max |rate|
  int retries = 0;
};

struct SignatureOptions {
  double delta0 = 0.4;
  int max_retries = 10;
  double kappa_min = 1e-6;
  double eps_indep = 1e-8;
  double margin_min = 1e-6;
};

// ell must satisfy 1 <= ell <= m-1 for the m trace columns.
SignatureField signature_field(const Eigen::MatrixXd& traces, const BoundaryFields& fields,
                               int ell, const SignatureOptions& opts = {});

struct GapReport {
  bool gap_ok = false;
  double lambda_k = 0.0;
  double lambda_next = 0.0;
  double rel_gap = 0.0;
};

// gap_ok iff (lambda_{k+1} - lambda_k) / lambda_k >= tau.
GapReport verify_gap(const Spectrum& spectrum, int k, double tau);

}  // namespace eigenshape
