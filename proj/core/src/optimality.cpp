#include "eigenshape/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "eigenshape/errors.hpp"

namespace eigenshape {

namespace {

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double running = 0.0, tau = 0.0;
  int rho = 0;
  for (int j = 0; j < n; ++j) {
    running += u[j];
    const double t = (running - 1.0) / (j + 1);
    if (u[j] - t > 0.0) {
      rho = j + 1;
      tau = t;
    }
  }
  (void)rho;
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = std::max(0.0, v(i) - tau);
  return out;
}

// Equality-constrained least squares on the active support; returns true when
// the KKT solve yields a valid nonnegative improvement.
bool polish_support(const Eigen::MatrixXd& Q, Eigen::VectorXd& gamma) {
  const int n = static_cast<int>(gamma.size());
  std::vector<int> support;
  for (int i = 0; i < n; ++i)
    if (gamma(i) > 1e-12) support.push_back(i);
  const int s = static_cast<int>(support.size());
  if (s == 0) return false;

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) kkt(i, j) = 2.0 * Q(support[i], support[j]);
  kkt.block(s, 0, 1, s).setOnes();
  kkt.block(0, s, s, 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
  rhs(s) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  const Eigen::VectorXd sol = lu.solve(rhs);
  if ((kkt * sol - rhs).cwiseAbs().maxCoeff() > 1e-9) return false;
  for (int i = 0; i < s; ++i)
    if (sol(i) < -1e-12) return false;

  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(n);
  double total = 0.0;
  for (int i = 0; i < s; ++i) {
    candidate(support[i]) = std::max(0.0, sol(i));
    total += candidate(support[i]);
  }
  if (total <= 0.0) return false;
  candidate /= total;
  if (candidate.dot(Q * candidate) <= gamma.dot(Q * gamma)) {
    gamma = candidate;
    return true;
  }
  return false;
}

}  // namespace

Eigen::VectorXd simplex_min_norm(const Eigen::MatrixXd& columns, int max_iters, double tol) {
  const int k = static_cast<int>(columns.cols());
  if (k == 0) throw std::invalid_argument("simplex_min_norm: no columns");
  Eigen::VectorXd gamma = Eigen::VectorXd::Constant(k, 1.0 / k);
  if (k == 1) return gamma;

  const Eigen::MatrixXd Q = columns.transpose() * columns;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  const double L = std::max(2.0 * es.eigenvalues().maxCoeff(), 1e-300);

  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd next = project_simplex(gamma - (2.0 / L) * (Q * gamma));
    const double step = (next - gamma).norm();
    gamma = next;
    if (step < tol) break;
  }
  polish_support(Q, gamma);
  return gamma;
}

PositiveDependence positive_dependence(const std::vector<Eigen::VectorXd>& zetas, double eps_rel) {
  if (zetas.empty()) throw DegenerateInput("positive_dependence: empty family");
  const int dim = static_cast<int>(zetas.front().size());
  const int k = static_cast<int>(zetas.size());
  double scale = 0.0;
  for (const auto& z : zetas) {
    if (z.size() != dim) throw std::invalid_argument("positive_dependence: mixed dimensions");
    const double n = z.norm();
    if (n == 0.0) throw DegenerateInput("positive_dependence: zero vector in family");
    scale = std::max(scale, n);
  }

  Eigen::MatrixXd C(dim, k);
  for (int j = 0; j < k; ++j) C.col(j) = zetas[j];

  PositiveDependence out;
  Eigen::VectorXd gamma = simplex_min_norm(C);
  Eigen::VectorXd r = C * gamma;
  // Two refinement rounds in case the first pass stopped early on hard input.
  for (int round = 0; round < 2 && r.norm() >= eps_rel * scale; ++round) {
    const Eigen::VectorXd margins = C.transpose() * (-r / r.norm());
    if (margins.maxCoeff() < 0.0) break;
    gamma = simplex_min_norm(C, 200000, 1e-16);
    r = C * gamma;
  }

  if (r.norm() < eps_rel * scale) {
    out.dependent = true;
    out.gamma = gamma;
    out.margin = r.norm();
    return out;
  }
  out.dependent = false;
  out.nu = -r / r.norm();
  const Eigen::VectorXd margins = C.transpose() * out.nu;
  out.margin = margins.maxCoeff();
  if (out.margin >= 0.0)
    throw std::runtime_error("positive_dependence: hull minimization failed to separate");
  out.gamma = gamma;
  return out;
}

std::vector<int> select_points(const Eigen::MatrixXd& traces, const Eigen::VectorXd& curvature,
                               double kappa_min, double eps_indep) {
  const int M = static_cast<int>(traces.rows());
  const int m = static_cast<int>(traces.cols());
  if (curvature.size() != M)
    throw std::invalid_argument("select_points: curvature grid mismatch");

  std::vector<int> candidates;
  candidates.reserve(M);
  for (int i = 0; i < M; ++i)
    if (curvature(i) > kappa_min) candidates.push_back(i);
  if (static_cast<int>(candidates.size()) < m)
    throw DependentTraces("select_points: too few admissible angles");

  // Greedy volume maximization: each step picks the candidate with the largest
  // residual after orthogonalization against the picked set.
  std::vector<Eigen::VectorXd> residual(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c)
    residual[c] = traces.row(candidates[c]).transpose();

  std::vector<int> picked;
  double det_gram = 1.0;
  for (int step = 0; step < m; ++step) {
    int best = -1;
    double best_norm2 = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double n2 = residual[c].squaredNorm();
      if (n2 > best_norm2) {
        best_norm2 = n2;
        best = static_cast<int>(c);
      }
    }
    if (best < 0 || best_norm2 <= 0.0)
      throw DependentTraces("select_points: trace family is numerically dependent");
    det_gram *= best_norm2;
    picked.push_back(candidates[best]);
    const Eigen::VectorXd e = residual[best] / std::sqrt(best_norm2);
    for (auto& r : residual) r -= e.dot(r) * e;
  }
  if (det_gram < eps_indep)
    throw DependentTraces("select_points: Gram determinant below independence threshold");
  return picked;
}

Certificate fit_certificate(const Eigen::VectorXd& curvature, const Eigen::MatrixXd& traces,
                            const Eigen::VectorXd& dsigma, const CertificateOptions& opts) {
  const int M = static_cast<int>(traces.rows());
  const int m = static_cast<int>(traces.cols());
  if (curvature.size() != M || dsigma.size() != M)
    throw std::invalid_argument("fit_certificate: grid size mismatch");
  if (m < 1) throw std::invalid_argument("fit_certificate: empty trace family");

  // Safe Lipschitz bound for the quadratic misfit gradient.
  double L = 0.0;
  for (int s = 0; s < M; ++s) L += dsigma(s) * std::pow(traces.row(s).squaredNorm(), 2);
  L = std::max(2.0 * L, 1e-300);

  auto model = [&](const Eigen::MatrixXd& Mmat, int s) {
    const Eigen::VectorXd t = traces.row(s).transpose();
    return t.dot(Mmat * t);
  };

  auto project = [&](Eigen::MatrixXd Mmat) {
    Mmat = 0.5 * (Mmat + Mmat.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Mmat);
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
    const double tr = d.sum();
    if (tr <= 0.0) return Eigen::MatrixXd(Eigen::MatrixXd::Identity(m, m) / m);
    d /= tr;
    return Eigen::MatrixXd(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
  };

  Certificate cert;
  Eigen::MatrixXd Mmat = Eigen::MatrixXd::Identity(m, m) / m;
  int it = 0;
  for (it = 1; it <= opts.max_iters; ++it) {
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(m, m);
    for (int s = 0; s < M; ++s) {
      const Eigen::VectorXd t = traces.row(s).transpose();
      grad += 2.0 * dsigma(s) * (model(Mmat, s) - curvature(s)) * (t * t.transpose());
    }
    // Keep the step inside the trace-one plane; the projection then only has
    // to repair negative eigenvalues.
    grad -= (grad.trace() / m) * Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd next = project(Mmat - grad / L);
    const double step = (next - Mmat).norm();
    Mmat = next;
    if (step < opts.tol * std::max(1.0, Mmat.norm())) {
      cert.converged = true;
      break;
    }
  }
  cert.iterations = std::min(it, opts.max_iters);
  cert.M_psd = Mmat;

  double misfit = 0.0, kappa_norm2 = 0.0;
  for (int s = 0; s < M; ++s) {
    const double d = curvature(s) - model(Mmat, s);
    misfit += dsigma(s) * d * d;
    kappa_norm2 += dsigma(s) * curvature(s) * curvature(s);
  }
  cert.residual_l2 = std::sqrt(misfit);
  cert.residual_rel = kappa_norm2 > 0.0 ? cert.residual_l2 / std::sqrt(kappa_norm2) : 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Mmat);
  cert.mu.resize(m);
  cert.basis_rotation.resize(m, m);
  for (int i = 0; i < m; ++i) {  // descending
    cert.mu(i) = std::max(0.0, es.eigenvalues()(m - 1 - i));
    cert.basis_rotation.col(i) = es.eigenvectors().col(m - 1 - i);
  }
  return cert;
}

void write_certificate_json(const std::string& path, const Certificate& cert,
                            const Cluster& cluster) {
  nlohmann::json j;
  j["mu"] = std::vector<double>(cert.mu.data(), cert.mu.data() + cert.mu.size());
  j["residual_rel"] = cert.residual_rel;
  std::vector<std::vector<double>> rot;
  for (int r = 0; r < cert.basis_rotation.rows(); ++r) {
    rot.emplace_back();
    for (int c = 0; c < cert.basis_rotation.cols(); ++c)
      rot.back().push_back(cert.basis_rotation(r, c));
  }
  j["basis_rotation"] = rot;
  j["cluster"] = {{"lo", cluster.lo}, {"hi", cluster.hi}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_certificate_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace eigenshape
