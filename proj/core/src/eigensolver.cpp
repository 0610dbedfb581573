#include "eigenshape/eigensolver.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "eigenshape/errors.hpp"
#include "eigenshape/rng.hpp"

namespace eigenshape {

AssembledForms assemble_p1(const Mesh& mesh) {
  const int nv = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(9 * mesh.triangles.size());
  mt.reserve(9 * mesh.triangles.size());

  for (const auto& tri : mesh.triangles) {
    const auto& p0 = mesh.vertices[tri[0]];
    const auto& p1 = mesh.vertices[tri[1]];
    const auto& p2 = mesh.vertices[tri[2]];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    if (!(det > 0.0)) throw std::runtime_error("assemble_p1: non-positive triangle area");
    const double area = 0.5 * det;
    // Hat gradient components: grad phi_i = (b_i, c_i) / (2 area).
    const double b[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
    const double c[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        kt.emplace_back(tri[i], tri[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area));
        mt.emplace_back(tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }

  AssembledForms f;
  f.stiffness.resize(nv, nv);
  f.mass.resize(nv, nv);
  f.stiffness.setFromTriplets(kt.begin(), kt.end());
  f.mass.setFromTriplets(mt.begin(), mt.end());

  f.dof_of_vertex.assign(nv, 0);
  for (int bid : mesh.boundary_ids) f.dof_of_vertex[bid] = -1;
  f.interior_ids.reserve(nv - mesh.boundary_ids.size());
  for (int v = 0; v < nv; ++v) {
    if (f.dof_of_vertex[v] == 0) {
      f.dof_of_vertex[v] = static_cast<int>(f.interior_ids.size());
      f.interior_ids.push_back(v);
    }
  }
  return f;
}

namespace {

Eigen::SparseMatrix<double> interior_block(const Eigen::SparseMatrix<double>& full,
                                           const AssembledForms& f) {
  const int n = static_cast<int>(f.interior_ids.size());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(full.nonZeros());
  for (int col = 0; col < full.outerSize(); ++col) {
    const int cj = f.dof_of_vertex[col];
    if (cj < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(full, col); it; ++it) {
      const int ri = f.dof_of_vertex[it.row()];
      if (ri >= 0) t.emplace_back(ri, cj, it.value());
    }
  }
  Eigen::SparseMatrix<double> out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

// Symmetric whitening in the M inner product: X <- X G^{-1/2} with G = X^T M X.
void m_orthonormalize(Eigen::MatrixXd& X, const Eigen::SparseMatrix<double>& M) {
  const Eigen::MatrixXd G = X.transpose() * (M * X);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const auto& d = es.eigenvalues();
  const double floor = d(d.size() - 1) * 1e-14;
  Eigen::VectorXd inv_sqrt(d.size());
  for (int i = 0; i < d.size(); ++i)
    inv_sqrt(i) = d(i) > floor ? 1.0 / std::sqrt(d(i)) : 0.0;
  X = X * (es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace

Spectrum solve_spectrum(const Mesh& mesh, int K) {
  if (K < 1) throw std::invalid_argument("solve_spectrum: K must be positive");
  const AssembledForms forms = assemble_p1(mesh);
  const int n = static_cast<int>(forms.interior_ids.size());
  if (n < 4 * K)
    throw MeshTooCoarse("solve_spectrum: interior vertex count below 4K");

  const Eigen::SparseMatrix<double> Kii = interior_block(forms.stiffness, forms);
  const Eigen::SparseMatrix<double> Mii = interior_block(forms.mass, forms);

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Kii);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("solve_spectrum: stiffness factorization failed");

  // Block inverse iteration with Rayleigh-Ritz. The start basis is a fixed
  // pseudo-random block, so the solve is a pure function of the mesh.
  const int q = std::min(n, K + 8);
  Rng rng(0x5eed5eed5eed5eedull);
  Eigen::MatrixXd X(n, q);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = rng.uniform(-1.0, 1.0);
  m_orthonormalize(X, Mii);

  Eigen::VectorXd ritz = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(q, -1.0);
  int it = 0;
  const int max_iters = 500;
  double resid_prev = std::numeric_limits<double>::infinity();
  for (it = 1; it <= max_iters; ++it) {
    Eigen::MatrixXd Y = llt.solve(Mii * X);
    m_orthonormalize(Y, Mii);
    const Eigen::MatrixXd KY = Kii * Y;
    const Eigen::MatrixXd Ar = Y.transpose() * KY;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ar);
    X = Y * es.eigenvectors();
    ritz = es.eigenvalues();
    double rel = 0.0;
    for (int i = 0; i < K; ++i)
      rel = std::max(rel, std::abs(ritz(i) - prev(i)) / std::abs(ritz(i)));
    prev = ritz;
    if (it < 3 || rel >= 5e-14) continue;

    // Ritz values stagnate one order earlier than the vectors (value error is
    // quadratic in the subspace angle), so gate the exit on the actual block
    // residual of the first K pairs. Stop early if the residual has hit its
    // rounding floor and no longer improves.
    const Eigen::MatrixXd KX = KY * es.eigenvectors().leftCols(K);
    const Eigen::MatrixXd MX = Mii * X.leftCols(K);
    double resid = 0.0;
    for (int i = 0; i < K; ++i)
      resid = std::max(resid, (KX.col(i) - ritz(i) * MX.col(i)).norm() /
                                  (ritz(i) * MX.col(i).norm()));
    if (resid < 1e-11 || resid >= resid_prev) break;
    resid_prev = resid;
  }

  Spectrum s;
  s.values.assign(ritz.data(), ritz.data() + K);
  s.modes = X.leftCols(K);
  s.interior_ids = forms.interior_ids;
  s.iterations = it;

  // Final Gram correction keeps the orthonormality defect at roundoff level.
  {
    const Eigen::MatrixXd G = s.modes.transpose() * (Mii * s.modes);
    const Eigen::LLT<Eigen::MatrixXd> chol(G);
    s.modes = chol.matrixU().solve<Eigen::OnTheRight>(s.modes);
    const Eigen::MatrixXd G2 = s.modes.transpose() * (Mii * s.modes);
    s.mass_defect = (G2 - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff();
  }
  return s;
}

Eigen::VectorXd flux_trace(const Mesh& mesh, const AssembledForms& forms,
                           const Eigen::VectorXd& interior_mode, double lambda,
                           const BoundaryFields& fields) {
  const int nv = mesh.vertex_count();
  const int nb = static_cast<int>(mesh.boundary_ids.size());

  Eigen::VectorXd full = Eigen::VectorXd::Zero(nv);
  for (int d = 0; d < static_cast<int>(forms.interior_ids.size()); ++d)
    full(forms.interior_ids[d]) = interior_mode(d);

  const Eigen::VectorXd residual = forms.stiffness * full - lambda * (forms.mass * full);

  // Consistent boundary mass (cyclic tridiagonal from polyline edge lengths).
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * nb);
  for (int j = 0; j < nb; ++j) {
    const int jn = (j + 1) % nb;
    const auto& pj = mesh.vertices[mesh.boundary_ids[j]];
    const auto& pn = mesh.vertices[mesh.boundary_ids[jn]];
    const double len = std::hypot(pn[0] - pj[0], pn[1] - pj[1]);
    t.emplace_back(j, j, len / 3.0);
    t.emplace_back(jn, jn, len / 3.0);
    t.emplace_back(j, jn, len / 6.0);
    t.emplace_back(jn, j, len / 6.0);
  }
  Eigen::SparseMatrix<double> Mb(nb, nb);
  Mb.setFromTriplets(t.begin(), t.end());

  Eigen::VectorXd rb(nb);
  for (int j = 0; j < nb; ++j) rb(j) = residual(mesh.boundary_ids[j]);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Mb);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("flux_trace: boundary mass factorization failed");
  const Eigen::VectorXd nodal = solver.solve(rb);

  // Periodic linear interpolation from boundary-vertex angles to the field grid.
  const int M = fields.size();
  Eigen::VectorXd out(M);
  const double two_pi = 6.283185307179586476925286766559;
  const double step = two_pi / nb;
  for (int i = 0; i < M; ++i) {
    const double pos = fields.thetas[i] / step;
    const int j0 = static_cast<int>(std::floor(pos)) % nb;
    const double w = pos - std::floor(pos);
    out(i) = (1.0 - w) * nodal(j0) + w * nodal((j0 + 1) % nb);
  }
  return out;
}

NormalTraces normal_trace(const Mesh& mesh, const Spectrum& spectrum, const BoundaryFields& fields) {
  const AssembledForms forms = assemble_p1(mesh);
  const int K = static_cast<int>(spectrum.values.size());
  NormalTraces traces;
  traces.values.resize(fields.size(), K);
  for (int k = 0; k < K; ++k)
    traces.values.col(k) =
        flux_trace(mesh, forms, spectrum.modes.col(k), spectrum.values[k], fields);
  return traces;
}

Cluster detect_cluster(const std::vector<double>& values, int k, double tau) {
  // k == K is allowed: the cluster then trivially reaches the top of the
  // computed range, which is the recoverable ClusterTouchesTop case.
  const int K = static_cast<int>(values.size());
  if (k < 1 || k > K)
    throw std::invalid_argument("detect_cluster: need 1 <= k <= K");
  auto joined = [&](int i) {  // values[i-1], values[i] in the same cluster (0-based i)
    return (values[i] - values[i - 1]) / values[i - 1] < tau;
  };
  Cluster c{k, k};
  while (c.lo > 1 && joined(c.lo - 1)) --c.lo;
  while (c.hi < K && joined(c.hi)) ++c.hi;
  if (c.hi == K)
    throw ClusterTouchesTop("detect_cluster: cluster reaches the last computed eigenvalue");
  return c;
}

void write_spectrum_csv(const std::string& path, const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_spectrum_csv: cannot open " + path);
  out << "index,lambda\n";
  char line[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g\n", i + 1, values[i]);
    out << line;
  }
}

}  // namespace eigenshape
