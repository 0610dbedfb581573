#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "eigenshape/eigensolver.hpp"
#include "eigenshape/errors.hpp"
#include "eigenshape/geometry.hpp"
#include "eigenshape/mesh.hpp"
#include "eigenshape/optimality.hpp"
#include "eigenshape/rng.hpp"

using namespace eigenshape;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kJ01 = 2.404825557695773;

// Decides 0 in conv{z_i} by Caratheodory enumeration: some subset of at most
// dim+1 vectors admits convex weights summing to one with zero combination.
// Exact for generic inputs, independent of the projected-gradient route.
bool hull_contains_origin(const std::vector<Eigen::VectorXd>& z) {
  const int n = static_cast<int>(z[0].size());
  const int m = static_cast<int>(z.size());
  double scale = 0.0;
  for (const auto& v : z) scale = std::max(scale, v.norm());
  if (scale == 0.0) return true;
  for (int mask = 1; mask < (1 << m); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i)
      if (mask & (1 << i)) idx.push_back(i);
    if (static_cast<int>(idx.size()) > n + 1) continue;
    const int s = static_cast<int>(idx.size());
    // rows: the n vector equations plus the sum-to-one constraint
    Eigen::MatrixXd A(n + 1, s);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs[n] = 1.0;
    for (int c = 0; c < s; ++c) {
      A.block(0, c, n, 1) = z[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])];
      A(n, c) = 1.0;
    }
    const Eigen::VectorXd gamma = A.completeOrthogonalDecomposition().solve(rhs);
    if ((A * gamma - rhs).norm() > 1e-9 * std::max(1.0, scale)) continue;
    bool nonneg = true;
    for (int c = 0; c < s; ++c) nonneg = nonneg && gamma[c] >= -1e-10;
    if (nonneg) return true;
  }
  return false;
}

Eigen::MatrixXd smooth_traces(int M, int m, Rng& rng) {
  Eigen::MatrixXd t(M, m);
  for (int c = 0; c < m; ++c) {
    const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
    const double w = rng.uniform(-0.5, 0.5);
    for (int i = 0; i < M; ++i) {
      const double th = 2.0 * kPi * i / M;
      t(i, c) = 1.0 + a * std::cos(th) + b * std::sin(2.0 * th) + w * std::cos(3.0 * th);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("certificate recovers an exactly representable curvature") {
  Rng rng(31);
  const int M = 96;
  const Eigen::MatrixXd traces = smooth_traces(M, 2, rng);
  const Eigen::VectorXd dsigma = Eigen::VectorXd::Constant(M, 2.0 * kPi / M);

  // plant a PSD trace-one target and synthesize kappa from it
  Eigen::Matrix2d target;
  target << 0.7, 0.1, 0.1, 0.3;
  Eigen::VectorXd kappa(M);
  for (int i = 0; i < M; ++i) {
    const Eigen::Vector2d t = traces.row(i).transpose();
    kappa[i] = t.dot(target * t);
  }

  const Certificate cert = fit_certificate(kappa, traces, dsigma);
  CHECK(cert.converged);
  CHECK(cert.residual_rel < 1e-6);
  CHECK((cert.M_psd - target).cwiseAbs().maxCoeff() < 1e-5);

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(target);
  CHECK(cert.mu[0] == doctest::Approx(es.eigenvalues()[1]).epsilon(1e-5));
  CHECK(cert.mu[1] == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-5));
}

TEST_CASE("certificate output is a valid convex combination") {
  Rng rng(77);
  const int M = 80;
  const Eigen::MatrixXd traces = smooth_traces(M, 3, rng);
  const Eigen::VectorXd dsigma = Eigen::VectorXd::Constant(M, 2.0 * kPi / M);
  Eigen::VectorXd kappa(M);
  for (int i = 0; i < M; ++i) kappa[i] = 1.0 + 0.2 * std::sin(2.0 * kPi * i / M);

  const Certificate cert = fit_certificate(kappa, traces, dsigma);
  REQUIRE(cert.mu.size() == 3);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    CHECK(cert.mu[i] >= -1e-12);
    if (i > 0) CHECK(cert.mu[i] <= cert.mu[i - 1] + 1e-14);
    sum += cert.mu[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((cert.M_psd - cert.M_psd.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  // rotation diagonalizes M
  const Eigen::MatrixXd d =
      cert.basis_rotation.transpose() * cert.M_psd * cert.basis_rotation;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(d(i, j)) < 1e-10);
  CHECK((cert.basis_rotation.transpose() * cert.basis_rotation -
         Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("unit disk first eigenfunction cannot match curvature") {
  // kappa = 1 but (dn u)^2 = lambda_1 / pi, so the best scalar fit leaves
  // a relative residual of lambda_1/pi - 1, about 0.8409
  const Mesh mesh = build_mesh(FourierBoundary{1.0, {}, {}}, 40, 80);
  const Spectrum s = solve_spectrum(mesh, 1);
  const BoundaryFields f = boundary_fields(FourierBoundary{1.0, {}, {}}, 80);
  const Eigen::MatrixXd traces = normal_trace(mesh, s, f).values;
  Eigen::Map<const Eigen::VectorXd> kappa(f.curvature.data(), 80);
  Eigen::Map<const Eigen::VectorXd> dsig(f.dsigma.data(), 80);
  const Certificate cert = fit_certificate(kappa, traces.leftCols(1), dsig);
  const double expected = kJ01 * kJ01 / kPi - 1.0;
  CHECK(cert.residual_rel == doctest::Approx(expected).epsilon(0.01));
  CHECK(cert.mu.size() == 1);
  CHECK(cert.mu[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("simplex minimum-norm point on closed forms") {
  SUBCASE("single column") {
    Eigen::MatrixXd c(3, 1);
    c << 1.0, -2.0, 0.5;
    const Eigen::VectorXd g = simplex_min_norm(c);
    REQUIRE(g.size() == 1);
    CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("opposite vectors cancel") {
    Eigen::MatrixXd c(2, 2);
    c << 1.0, -1.0, 2.0, -2.0;
    const Eigen::VectorXd g = simplex_min_norm(c);
    CHECK((c * g).norm() < 1e-9);
    CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("orthonormal pair") {
    Eigen::MatrixXd c(2, 2);
    c << 1.0, 0.0, 0.0, 1.0;
    const Eigen::VectorXd g = simplex_min_norm(c);
    CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK((c * g).norm() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  }
  SUBCASE("two points with an interior minimizer") {
    Eigen::MatrixXd c(2, 2);
    c << 1.0, 0.6, 0.0, 0.8;
    const Eigen::VectorXd g = simplex_min_norm(c);
    // analytic weight on the first column is 0.5, point (0.8, 0.4)
    CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK((c * g).norm() == doctest::Approx(std::sqrt(0.8))
                                .epsilon(1e-10));
  }
}

TEST_CASE("simplex minimum-norm satisfies the variational inequality") {
  Rng rng(5150);
  for (int inst = 0; inst < 25; ++inst) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 4);
    const int m = 2 + static_cast<int>(rng.next_u64() % 6);
    Eigen::MatrixXd c(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) c(i, j) = rng.normal();
    const Eigen::VectorXd g = simplex_min_norm(c);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      CHECK(g[j] >= -1e-14);
      sum += g[j];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    const Eigen::VectorXd p = c * g;
    // optimality: every column sees <c_j, p> >= |p|^2
    for (int j = 0; j < m; ++j) {
      CHECK(c.col(j).dot(p) >= p.squaredNorm() - 1e-8 * std::max(1.0, p.squaredNorm()));
    }
  }
}

TEST_CASE("simplex minimum-norm matches a dense grid search on triples") {
  Rng rng(999);
  for (int inst = 0; inst < 10; ++inst) {
    Eigen::MatrixXd c(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c(i, j) = rng.uniform(-2.0, 2.0);
    const double ours = (c * simplex_min_norm(c)).norm();
    double best = 1e30;
    const int G = 400;
    for (int i = 0; i <= G; ++i) {
      for (int j = 0; j <= G - i; ++j) {
        const double g0 = static_cast<double>(i) / G;
        const double g1 = static_cast<double>(j) / G;
        const double g2 = 1.0 - g0 - g1;
        best = std::min(best, (c.col(0) * g0 + c.col(1) * g1 + c.col(2) * g2).norm());
      }
    }
    CHECK(ours <= best + 1e-5);
    CHECK(ours >= best - 1e-3);  // grid is only 1/400 fine
  }
}

TEST_CASE("positive dependence dichotomy agrees with hull enumeration") {
  Rng rng(4242);
  int dependents = 0, independents = 0;
  for (int inst = 0; inst < 40; ++inst) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 3);
    const int m = 2 + static_cast<int>(rng.next_u64() % 4);
    std::vector<Eigen::VectorXd> z;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v[i] = rng.normal();
      z.push_back(v);
    }
    // plant exact dependence in a third of the instances
    if (inst % 3 == 0 && m >= 3) {
      z[static_cast<std::size_t>(m - 1)] = -(z[0] + z[1]);
    }
    const bool oracle = hull_contains_origin(z);
    const PositiveDependence pd = positive_dependence(z);
    CHECK(pd.dependent == oracle);
    if (pd.dependent) {
      ++dependents;
      double scale = 0.0;
      Eigen::VectorXd combo = Eigen::VectorXd::Zero(z[0].size());
      double gsum = 0.0;
      for (int j = 0; j < m; ++j) {
        CHECK(pd.gamma[j] >= -1e-14);
        combo += pd.gamma[j] * z[static_cast<std::size_t>(j)];
        gsum += pd.gamma[j];
        scale = std::max(scale, z[static_cast<std::size_t>(j)].norm());
      }
      CHECK(gsum > 0.5);  // normalized to the simplex
      CHECK(combo.norm() < 1e-8 * scale);
    } else {
      ++independents;
      CHECK(pd.nu.norm() == doctest::Approx(1.0).epsilon(1e-10));
      for (int j = 0; j < m; ++j) {
        CHECK(z[static_cast<std::size_t>(j)].dot(pd.nu) < 0.0);
      }
    }
  }
  // the blend should exercise both branches
  CHECK(dependents > 5);
  CHECK(independents > 5);
}

TEST_CASE("point selection returns independent trace tuples") {
  Rng rng(808);
  const int M = 120;
  SUBCASE("well separated harmonics") {
    Eigen::MatrixXd traces(M, 2);
    for (int i = 0; i < M; ++i) {
      const double t = 2.0 * kPi * i / M;
      traces(i, 0) = std::cos(t);
      traces(i, 1) = std::sin(t);
    }
    const Eigen::VectorXd kappa = Eigen::VectorXd::Ones(M);
    const std::vector<int> pts = select_points(traces, kappa);
    REQUIRE(pts.size() == 2);
    Eigen::Matrix2d g;
    g.row(0) = traces.row(pts[0]);
    g.row(1) = traces.row(pts[1]);
    CHECK(std::abs(g.determinant()) > 0.5);
  }
  SUBCASE("parallel traces throw") {
    Eigen::MatrixXd traces(M, 2);
    for (int i = 0; i < M; ++i) {
      const double t = 2.0 * kPi * i / M;
      traces(i, 0) = std::cos(t);
      traces(i, 1) = 2.0 * std::cos(t);
    }
    const Eigen::VectorXd kappa = Eigen::VectorXd::Ones(M);
    CHECK_THROWS_AS(select_points(traces, kappa), DependentTraces);
  }
  SUBCASE("negative curvature regions are excluded") {
    Eigen::MatrixXd traces(M, 2);
    Eigen::VectorXd kappa(M);
    for (int i = 0; i < M; ++i) {
      const double t = 2.0 * kPi * i / M;
      traces(i, 0) = std::cos(t);
      traces(i, 1) = std::sin(t);
      kappa[i] = (i < M / 2) ? 1.0 : -0.5;  // only the first half admissible
    }
    const std::vector<int> pts = select_points(traces, kappa);
    for (int p : pts) CHECK(p < M / 2);
  }
  SUBCASE("random smooth tuples never select dependent points") {
    for (int inst = 0; inst < 50; ++inst) {
      const int m = 2 + static_cast<int>(rng.next_u64() % 2);
      const Eigen::MatrixXd traces = smooth_traces(M, m, rng);
      const Eigen::VectorXd kappa = Eigen::VectorXd::Ones(M);
      const std::vector<int> pts = select_points(traces, kappa);
      REQUIRE(static_cast<int>(pts.size()) == m);
      Eigen::MatrixXd g(m, m);
      for (int r = 0; r < m; ++r) g.row(r) = traces.row(pts[static_cast<std::size_t>(r)]);
      CHECK(std::abs(g.determinant()) > 1e-8);
    }
  }
}

TEST_CASE("certificate json has exactly the documented keys") {
  Rng rng(2024);
  const int M = 64;
  const Eigen::MatrixXd traces = smooth_traces(M, 2, rng);
  const Eigen::VectorXd dsigma = Eigen::VectorXd::Constant(M, 2.0 * kPi / M);
  Eigen::VectorXd kappa = Eigen::VectorXd::Ones(M);
  const Certificate cert = fit_certificate(kappa, traces, dsigma);
  Cluster cl;
  cl.lo = 2;
  cl.hi = 3;
  const std::string path = "certificate_keys_test.json";
  write_certificate_json(path, cert, cl);
  std::ifstream in(path);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  REQUIRE(j.is_object());
  CHECK(j.size() == 4);
  CHECK(j.contains("mu"));
  CHECK(j.contains("residual_rel"));
  CHECK(j.contains("basis_rotation"));
  CHECK(j.contains("cluster"));
  CHECK(j["cluster"]["lo"] == 2);
  CHECK(j["cluster"]["hi"] == 3);
  CHECK(j["mu"].size() == 2);
  std::remove(path.c_str());
}
