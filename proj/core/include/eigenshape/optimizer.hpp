#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eigenshape/cluster.hpp"
#include "eigenshape/eigensolver.hpp"
#include "eigenshape/geometry.hpp"
#include "eigenshape/optimality.hpp"

namespace eigenshape {

enum class RunMode { penalized, constrained };

struct RunConfig {
  int k = 1;
  int fourier_order = 8;
  int n_r = 40;
  int n_theta = 80;
  double tau_cluster = 1e-3;
  double eps_opt = 1e-3;
  double eps_cert = 5e-2;
  int max_iters = 300;
  int restarts = 3;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::penalized;
  double perimeter_target = 6.283185307179586476925286766559;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double lambda_k = 0.0;
  double perimeter = 0.0;
  double stationarity = 0.0;
  double step = 0.0;
  int cluster_size = 1;
};

struct RunResult {
  FourierBoundary boundary;
  double objective = 0.0;
  double perimeter = 0.0;
  std::vector<double> lambdas;
  Cluster cluster;
  Certificate certificate;
  GapReport gap;
  std::vector<IterationRecord> log;
  int iterations = 0;
  bool converged = false;
  std::string status;  // converged | max_iters | no_descent
};

// Descent on the Fourier coefficients. Simple eigenvalues take the gradient
// step; clusters assemble directional-gradient candidates over the eigenspace
// and descend along the minimum-norm element of their convex hull. Armijo
// backtracking guards every step; constrained mode projects directions onto
// the zero-perimeter-rate hyperplane and renormalizes the perimeter after
// accepted steps. Terminates once the stationarity measure drops below
// eps_opt and the curvature certificate fits with residual below eps_cert.
RunResult minimize(const RunConfig& config, const FourierBoundary& init);

struct CostCurve {
  std::vector<double> costs;       // entry k-1: best objective for index k
  std::vector<RunResult> results;  // the run behind each cost
  std::vector<bool> flagged;       // true when no restart converged
};

// Best-of-restarts cost for k = 1..k_max. Restart r reruns with seed+r and a
// seeded coefficient perturbation of the initial boundary.
CostCurve cost_curve(int k_max, const RunConfig& base, const FourierBoundary& init);

void write_result_json(const std::string& path, const RunResult& result, const RunConfig& config,
                       const std::string& timestamp);

// 1000x1000 viewBox, centered, max radius scaled to 450 units, 512 samples.
void write_shape_svg(const std::string& path, const FourierBoundary& boundary);

// Fixed-format serialization of the iteration log (for determinism checks).
std::string iteration_log_text(const RunResult& result);

}  // namespace eigenshape
