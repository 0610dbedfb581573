#include "eigenshape/shape_derivative.hpp"

#include <cmath>
#include <stdexcept>

namespace eigenshape {

Eigen::VectorXd vn_measure(const BoundaryFields& fields, const Direction& direction) {
  const int M = fields.size();
  const std::vector<double> delta = direction_values(direction, fields.thetas);
  const double dtheta = 6.283185307179586476925286766559 / M;
  Eigen::VectorXd w(M);
  for (int i = 0; i < M; ++i) {
    const double rho = std::hypot(fields.points[i][0], fields.points[i][1]);
    w(i) = delta[i] * rho * dtheta;
  }
  return w;
}

double simple_eig_derivative(const Eigen::VectorXd& trace, const Eigen::VectorXd& vn_weights) {
  return -trace.cwiseProduct(trace).dot(vn_weights);
}

Eigen::MatrixXd cluster_matrix(const Eigen::MatrixXd& traces, const Eigen::VectorXd& vn_weights) {
  const int m = static_cast<int>(traces.cols());
  Eigen::MatrixXd A(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const double v = -traces.col(i).cwiseProduct(traces.col(j)).dot(vn_weights);
      A(i, j) = v;
      A(j, i) = v;
    }
  }
  return A;
}

DirectionalRates objective_directional(const Eigen::MatrixXd& cluster_mat, double per_rate,
                                       int k, const Cluster& cluster) {
  if (k < cluster.lo || k > cluster.hi)
    throw std::invalid_argument("objective_directional: k outside cluster");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cluster_mat);
  DirectionalRates out;
  out.rates = es.eigenvalues().array() + per_rate;
  out.rate_k = out.rates(k - cluster.lo);
  return out;
}

double perimeter_rate(const FourierBoundary& boundary, const BoundaryFields& fields,
                      const Direction& direction) {
  if (direction.is_grid()) {
    const Eigen::VectorXd w = vn_measure(fields, direction);
    double rate = 0.0;
    for (int i = 0; i < fields.size(); ++i) rate += fields.curvature[i] * w(i);
    return rate;
  }
  // Orders may differ; align by mode index, padding the boundary with zeros.
  const FourierBoundary d = unpack_coeffs(direction.coeffs);
  const int N = std::max(boundary.order(), d.order());
  FourierBoundary padded = boundary;
  padded.a.resize(N, 0.0);
  padded.b.resize(N, 0.0);
  const std::vector<double> grad = perimeter_gradient(padded);
  double rate = grad[0] * d.a0;
  for (int j = 1; j <= d.order(); ++j)
    rate += grad[j] * d.a[j - 1] + grad[N + j] * d.b[j - 1];
  return rate;
}

}  // namespace eigenshape
