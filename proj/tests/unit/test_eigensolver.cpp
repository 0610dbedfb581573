#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <vector>

#include "eigenshape/eigensolver.hpp"
#include "eigenshape/errors.hpp"
#include "eigenshape/geometry.hpp"
#include "eigenshape/mesh.hpp"

using namespace eigenshape;

namespace {

constexpr double kPi = std::numbers::pi;
// classical first zeros of J0 and J1
constexpr double kJ01 = 2.404825557695773;
constexpr double kJ11 = 3.831705970207512;

double polygon_area(const Mesh& m) {
  double area = 0.0;
  for (const auto& tri : m.triangles) {
    const auto& p0 = m.vertices[static_cast<std::size_t>(tri[0])];
    const auto& p1 = m.vertices[static_cast<std::size_t>(tri[1])];
    const auto& p2 = m.vertices[static_cast<std::size_t>(tri[2])];
    area += 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
  }
  return area;
}

}  // namespace

TEST_CASE("assembled forms reproduce exact quadratic forms") {
  const Mesh m = build_mesh(FourierBoundary{1.2, {0.15}, {0.1}}, 6, 16);
  const AssembledForms f = assemble_p1(m);

  // values of an affine function at the vertices
  Eigen::VectorXd u(m.vertex_count());
  for (int i = 0; i < m.vertex_count(); ++i) {
    const auto& p = m.vertices[static_cast<std::size_t>(i)];
    u[i] = 2.0 * p[0] - 3.0 * p[1] + 0.7;
  }

  SUBCASE("stiffness energy of an affine function is |grad|^2 times area") {
    const double energy = u.dot(f.stiffness * u);
    CHECK(energy == doctest::Approx((4.0 + 9.0) * polygon_area(m)).epsilon(1e-12));
  }

  SUBCASE("stiffness annihilates constants") {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.vertex_count());
    CHECK((f.stiffness * ones).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("mass integrates quadratics exactly") {
    // midpoint-rule oracle, exact for polynomials of degree two per triangle
    double exact = 0.0;
    for (const auto& tri : m.triangles) {
      const auto& p0 = m.vertices[static_cast<std::size_t>(tri[0])];
      const auto& p1 = m.vertices[static_cast<std::size_t>(tri[1])];
      const auto& p2 = m.vertices[static_cast<std::size_t>(tri[2])];
      const double area =
          0.5 * std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
      auto affine = [&](double x, double y) { return 2.0 * x - 3.0 * y + 0.7; };
      const double m01 = affine(0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1]));
      const double m12 = affine(0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1]));
      const double m20 = affine(0.5 * (p2[0] + p0[0]), 0.5 * (p2[1] + p0[1]));
      exact += area / 3.0 * (m01 * m01 + m12 * m12 + m20 * m20);
    }
    CHECK(u.dot(f.mass * u) == doctest::Approx(exact).epsilon(1e-12));
  }

  SUBCASE("total mass equals the polygon area") {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.vertex_count());
    CHECK(ones.dot(f.mass * ones) == doctest::Approx(polygon_area(m)).epsilon(1e-12));
  }

  SUBCASE("interior dof bookkeeping is consistent") {
    int interior = 0;
    for (int v = 0; v < m.vertex_count(); ++v) {
      const int dof = f.dof_of_vertex[static_cast<std::size_t>(v)];
      if (dof >= 0) {
        CHECK(f.interior_ids[static_cast<std::size_t>(dof)] == v);
        ++interior;
      }
    }
    CHECK(interior == m.interior_count());
  }
}

TEST_CASE("disk eigenvalues approach the Bessel references") {
  const Mesh m = build_mesh(FourierBoundary{1.0, {}, {}}, 30, 64);
  const Spectrum s = solve_spectrum(m, 5);
  REQUIRE(s.values.size() == 5);
  CHECK(s.values[0] == doctest::Approx(kJ01 * kJ01).epsilon(0.02));
  CHECK(s.values[1] == doctest::Approx(kJ11 * kJ11).epsilon(0.02));
  CHECK(s.values[2] == doctest::Approx(kJ11 * kJ11).epsilon(0.02));
  // the symmetric mesh keeps the pair numerically degenerate
  CHECK(std::abs(s.values[2] - s.values[1]) < 1e-10 * s.values[1]);
  for (std::size_t i = 1; i < s.values.size(); ++i) CHECK(s.values[i] >= s.values[i - 1]);
}

TEST_CASE("discrete eigenpairs satisfy the matrix equation") {
  const Mesh m = build_mesh(FourierBoundary{1.0, {0.12, -0.05}, {0.0, 0.08}}, 16, 48);
  const AssembledForms f = assemble_p1(m);
  const Spectrum s = solve_spectrum(m, 4);

  // restrict forms to interior dofs and verify K u = lambda M u directly
  const int n = static_cast<int>(f.interior_ids.size());
  Eigen::MatrixXd K(n, n), M(n, n);
  Eigen::MatrixXd Kd = Eigen::MatrixXd(f.stiffness);
  Eigen::MatrixXd Md = Eigen::MatrixXd(f.mass);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      K(i, j) = Kd(f.interior_ids[static_cast<std::size_t>(i)], f.interior_ids[static_cast<std::size_t>(j)]);
      M(i, j) = Md(f.interior_ids[static_cast<std::size_t>(i)], f.interior_ids[static_cast<std::size_t>(j)]);
    }
  }
  for (int c = 0; c < 4; ++c) {
    const Eigen::VectorXd u = s.modes.col(c);
    const double lambda = s.values[static_cast<std::size_t>(c)];
    const double res = (K * u - lambda * (M * u)).norm() / (lambda * (M * u).norm());
    CHECK(res < 1e-9);
  }
}

TEST_CASE("modes are mass-orthonormal") {
  const Mesh m = build_mesh(FourierBoundary{1.0, {0.1}, {0.05}}, 18, 56);
  const AssembledForms f = assemble_p1(m);
  const Spectrum s = solve_spectrum(m, 6);
  CHECK(s.mass_defect < 1e-10);

  const int n = static_cast<int>(f.interior_ids.size());
  Eigen::SparseMatrix<double> Mi(n, n);
  std::vector<Eigen::Triplet<double>> trips;
  for (int col = 0; col < f.mass.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(f.mass, col); it; ++it) {
      const int di = f.dof_of_vertex[static_cast<std::size_t>(it.row())];
      const int dj = f.dof_of_vertex[static_cast<std::size_t>(it.col())];
      if (di >= 0 && dj >= 0) trips.emplace_back(di, dj, it.value());
    }
  }
  Mi.setFromTriplets(trips.begin(), trips.end());
  const Eigen::MatrixXd gram = s.modes.transpose() * (Mi * s.modes);
  const Eigen::MatrixXd defect = gram - Eigen::MatrixXd::Identity(6, 6);
  CHECK(defect.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("eigenvalues scale exactly under homothety of the mesh") {
  const FourierBoundary c{1.0, {0.15, 0.0, -0.07}, {0.0, 0.1, 0.0}};
  const double t = 2.3;
  const Mesh m1 = build_mesh(c, 14, 40);
  const Mesh m2 = build_mesh(scale(c, t), 14, 40);
  const Spectrum s1 = solve_spectrum(m1, 3);
  const Spectrum s2 = solve_spectrum(m2, 3);
  for (int i = 0; i < 3; ++i) {
    // scaled mesh is the same triangulation scaled by t, so the generalized
    // eigenvalues divide by t^2 up to solver round-off
    CHECK(s2.values[static_cast<std::size_t>(i)] * t * t ==
          doctest::Approx(s1.values[static_cast<std::size_t>(i)]).epsilon(1e-9));
  }
}

TEST_CASE("eigenvalue error decreases under mesh refinement") {
  const double exact = kJ01 * kJ01;
  double prev_err = 1e9;
  for (int scale_step : {1, 2, 4}) {
    const Mesh m = build_mesh(FourierBoundary{1.0, {}, {}}, 8 * scale_step, 20 * scale_step);
    const Spectrum s = solve_spectrum(m, 1);
    const double err = std::abs(s.values[0] - exact);
    CHECK(err < prev_err);
    prev_err = err;
  }
  // O(h^2): the last error is below 1% of lambda_1
  CHECK(prev_err < 0.01 * exact);
}

TEST_CASE("solver refuses too-coarse meshes for the requested count") {
  const Mesh m = build_mesh(FourierBoundary{1.0, {}, {}}, 2, 8);
  CHECK_THROWS_AS(solve_spectrum(m, 10), MeshTooCoarse);
}

TEST_CASE("normal trace on the disk matches the analytic flux") {
  const double R = 1.0;
  const Mesh m = build_mesh(FourierBoundary{R, {}, {}}, 40, 80);
  const Spectrum s = solve_spectrum(m, 1);
  const BoundaryFields fields = boundary_fields(FourierBoundary{R, {}, {}}, 80);
  const NormalTraces tr = normal_trace(m, s, fields);
  REQUIRE(tr.values.rows() == 80);
  // |dn u_1| = j01 / sqrt(pi) for the mass-normalized first mode
  const double expected = kJ01 / std::sqrt(kPi);
  for (int i = 0; i < 80; ++i) {
    CHECK(std::abs(tr.values(i, 0)) == doctest::Approx(expected).epsilon(0.01));
  }
  // constant around the boundary on the symmetric mesh
  const double spread = tr.values.col(0).maxCoeff() - tr.values.col(0).minCoeff();
  CHECK(std::abs(spread) < 1e-8 * expected);
}

TEST_CASE("boundary flux satisfies the Rellich identity on a wavy domain") {
  const FourierBoundary c{1.1, {0.12, 0.0, 0.04}, {0.0, -0.06, 0.0}};
  const Mesh m = build_mesh(c, 40, 80);
  const Spectrum s = solve_spectrum(m, 2);
  const BoundaryFields fields = boundary_fields(c, 80);
  const NormalTraces tr = normal_trace(m, s, fields);
  for (int k = 0; k < 2; ++k) {
    double integral = 0.0;
    for (int i = 0; i < 80; ++i) {
      const auto& p = fields.points[static_cast<std::size_t>(i)];
      const auto& n = fields.normals[static_cast<std::size_t>(i)];
      const double xdotn = p[0] * n[0] + p[1] * n[1];
      integral += tr.values(i, k) * tr.values(i, k) * xdotn *
                  fields.dsigma[static_cast<std::size_t>(i)];
    }
    // int (dn u)^2 (x . n) dsigma = 2 lambda for mass-normalized u
    CHECK(integral == doctest::Approx(2.0 * s.values[static_cast<std::size_t>(k)]).epsilon(0.02));
  }
}

TEST_CASE("cluster detection walks relative gaps") {
  const std::vector<double> values = {1.0, 2.0, 2.0005, 2.001, 3.0};
  const double tau = 1e-3;
  SUBCASE("singleton") {
    const Cluster c = detect_cluster(values, 1, tau);
    CHECK(c.lo == 1);
    CHECK(c.hi == 1);
    CHECK(c.size() == 1);
  }
  SUBCASE("interior cluster expands both ways") {
    for (int k : {2, 3, 4}) {
      const Cluster c = detect_cluster(values, k, tau);
      CHECK(c.lo == 2);
      CHECK(c.hi == 4);
    }
  }
  SUBCASE("touching the top of the computed range throws") {
    CHECK_THROWS_AS(detect_cluster(values, 5, tau), ClusterTouchesTop);
  }
  SUBCASE("k out of range") {
    CHECK_THROWS_AS(detect_cluster(values, 0, tau), std::invalid_argument);
    CHECK_THROWS_AS(detect_cluster(values, 6, tau), std::invalid_argument);
  }
}

TEST_CASE("spectrum csv format") {
  const std::string path = "spectrum_format_test.csv";
  write_spectrum_csv(path, {5.25, 14.5});
  std::ifstream in(path);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(header == "index,lambda");
  CHECK(row1 == "1,5.25");
  CHECK(row2 == "2,14.5");
  std::remove(path.c_str());
}
