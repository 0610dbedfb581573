#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "eigenshape/eigensolver.hpp"
#include "eigenshape/geometry.hpp"
#include "eigenshape/mesh.hpp"
#include "eigenshape/optimality.hpp"
#include "eigenshape/rng.hpp"
#include "eigenshape/shape_derivative.hpp"
#include "eigenshape/validation.hpp"

using namespace eigenshape;

namespace {

const FourierBoundary kWavy{1.0, {0.05, 0.1, 0.0, 0.02}, {0.0, -0.04, 0.01, 0.0}};

void BM_build_mesh(benchmark::State& state) {
  const int n_r = static_cast<int>(state.range(0));
  const int n_theta = 2 * n_r;
  for (auto _ : state) {
    Mesh mesh = build_mesh(kWavy, n_r, n_theta);
    benchmark::DoNotOptimize(mesh.vertices.data());
  }
}
BENCHMARK(BM_build_mesh)->Arg(20)->Arg(40)->Arg(80);

void BM_assemble_forms(benchmark::State& state) {
  const Mesh mesh = build_mesh(kWavy, 40, 80);
  for (auto _ : state) {
    AssembledForms forms = assemble_p1(mesh);
    benchmark::DoNotOptimize(forms.stiffness.valuePtr());
  }
}
BENCHMARK(BM_assemble_forms);

void BM_solve_spectrum(benchmark::State& state) {
  const int n_r = static_cast<int>(state.range(0));
  const Mesh mesh = build_mesh(kWavy, n_r, 2 * n_r);
  for (auto _ : state) {
    Spectrum s = solve_spectrum(mesh, 6);
    benchmark::DoNotOptimize(s.values.data());
  }
}
BENCHMARK(BM_solve_spectrum)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_normal_trace(benchmark::State& state) {
  const Mesh mesh = build_mesh(kWavy, 40, 80);
  const Spectrum s = solve_spectrum(mesh, 6);
  const BoundaryFields fields = boundary_fields(kWavy, 80);
  for (auto _ : state) {
    NormalTraces t = normal_trace(mesh, s, fields);
    benchmark::DoNotOptimize(t.values.data());
  }
}
BENCHMARK(BM_normal_trace);

void BM_perimeter_gradient(benchmark::State& state) {
  for (auto _ : state) {
    std::vector<double> g = perimeter_gradient(kWavy);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_perimeter_gradient);

void BM_fit_certificate(benchmark::State& state) {
  constexpr double kPi = std::numbers::pi;
  const int M = 80;
  Rng rng(7);
  Eigen::MatrixXd traces(M, 2);
  Eigen::VectorXd kappa(M);
  const Eigen::VectorXd dsigma = Eigen::VectorXd::Constant(M, 2.0 * kPi / M);
  for (int i = 0; i < M; ++i) {
    const double th = 2.0 * kPi * i / M;
    traces(i, 0) = 1.0 + 0.3 * std::cos(th);
    traces(i, 1) = 1.0 + 0.3 * std::sin(th);
    kappa[i] = 1.0 + 0.1 * std::cos(2.0 * th) + 0.02 * rng.normal();
  }
  for (auto _ : state) {
    Certificate cert = fit_certificate(kappa, traces, dsigma);
    benchmark::DoNotOptimize(cert.residual_rel);
  }
}
BENCHMARK(BM_fit_certificate);

void BM_simplex_min_norm(benchmark::State& state) {
  const int n = 17, m = static_cast<int>(state.range(0));
  Rng rng(11);
  Eigen::MatrixXd cols(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) cols(i, j) = rng.normal();
  for (auto _ : state) {
    Eigen::VectorXd g = simplex_min_norm(cols);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_simplex_min_norm)->Arg(4)->Arg(12)->Arg(24);

void BM_vn_measure_and_cluster_matrix(benchmark::State& state) {
  const Mesh mesh = build_mesh(kWavy, 40, 80);
  const Spectrum s = solve_spectrum(mesh, 4);
  const BoundaryFields fields = boundary_fields(kWavy, 80);
  const Eigen::MatrixXd traces = normal_trace(mesh, s, fields).values.leftCols(3);
  std::vector<double> g(80);
  for (int i = 0; i < 80; ++i) g[static_cast<std::size_t>(i)] = std::sin(0.2 * i);
  const Direction dir = Direction::grid_samples(g);
  for (auto _ : state) {
    Eigen::VectorXd w = vn_measure(fields, dir);
    Eigen::MatrixXd a = cluster_matrix(traces, w);
    benchmark::DoNotOptimize(a.data());
  }
}
BENCHMARK(BM_vn_measure_and_cluster_matrix);

void BM_bessel_zero(benchmark::State& state) {
  for (auto _ : state) {
    double z = bessel_zero(static_cast<int>(state.range(0)), 2);
    benchmark::DoNotOptimize(z);
  }
}
BENCHMARK(BM_bessel_zero)->Arg(0)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
