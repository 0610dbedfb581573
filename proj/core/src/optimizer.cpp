#include "eigenshape/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "eigenshape/errors.hpp"
#include "eigenshape/mesh.hpp"
#include "eigenshape/rng.hpp"
#include "eigenshape/shape_derivative.hpp"

namespace eigenshape {

namespace {

// Everything the descent loop needs at one iterate.
struct FullEval {
  Mesh mesh;
  Spectrum spectrum;
  BoundaryFields fields;
  Eigen::MatrixXd traces;  // boundary samples x K
  Cluster cluster;
  double perimeter = 0.0;
  double lambda_k = 0.0;
  double objective = 0.0;
};

struct LightEval {
  double perimeter = 0.0;
  double lambda_k = 0.0;
  double objective = 0.0;
};

double composite_objective(RunMode mode, double lambda_k, double per, double target) {
  if (mode == RunMode::penalized) return lambda_k + per;
  const double s = per / target;
  return lambda_k * s * s;
}

// Solve with enough eigenvalues that the cluster at k does not touch the top
// of the computed range. Retries with a larger block a few times.
Spectrum solve_resolved(const Mesh& mesh, const RunConfig& cfg, Cluster* cluster_out) {
  int count = cfg.k + 4;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Spectrum spec = solve_spectrum(mesh, count);
    try {
      Cluster c = detect_cluster(spec.values, cfg.k, cfg.tau_cluster);
      if (cluster_out != nullptr) *cluster_out = c;
      return spec;
    } catch (const ClusterTouchesTop&) {
      count += 4;
    }
  }
  throw ClusterTouchesTop("cluster still touches the computed range after enlarging it");
}

LightEval evaluate_light(const FourierBoundary& boundary, const RunConfig& cfg) {
  Mesh mesh = build_mesh(boundary, cfg.n_r, cfg.n_theta);
  Spectrum spec = solve_spectrum(mesh, cfg.k + 4);
  LightEval ev;
  ev.perimeter = perimeter(boundary);
  ev.lambda_k = spec.values[static_cast<std::size_t>(cfg.k - 1)];
  ev.objective = composite_objective(cfg.mode, ev.lambda_k, ev.perimeter, cfg.perimeter_target);
  return ev;
}

FullEval evaluate_full(const FourierBoundary& boundary, const RunConfig& cfg) {
  FullEval fe;
  fe.mesh = build_mesh(boundary, cfg.n_r, cfg.n_theta);
  fe.spectrum = solve_resolved(fe.mesh, cfg, &fe.cluster);
  fe.fields = boundary_fields(boundary, cfg.n_theta);
  fe.traces = normal_trace(fe.mesh, fe.spectrum, fe.fields).values;
  fe.perimeter = perimeter(boundary);
  fe.lambda_k = fe.spectrum.values[static_cast<std::size_t>(cfg.k - 1)];
  fe.objective = composite_objective(cfg.mode, fe.lambda_k, fe.perimeter, cfg.perimeter_target);
  return fe;
}

// Values of each packed Fourier mode on the boundary sample grid.
Eigen::MatrixXd mode_basis(const std::vector<double>& thetas, int order) {
  const int m = static_cast<int>(thetas.size());
  Eigen::MatrixXd basis(m, 2 * order + 1);
  for (int i = 0; i < m; ++i) {
    basis(i, 0) = 1.0;
    for (int j = 1; j <= order; ++j) {
      basis(i, j) = std::cos(j * thetas[static_cast<std::size_t>(i)]);
      basis(i, order + j) = std::sin(j * thetas[static_cast<std::size_t>(i)]);
    }
  }
  return basis;
}

// Gradient of lambda against the packed coefficients for the eigenfunction
// combination with boundary trace `s`: the shape derivative contracted with
// the boundary motion each coefficient generates.
Eigen::VectorXd eigen_gradient(const Eigen::VectorXd& s, const Eigen::VectorXd& rho,
                               const Eigen::MatrixXd& basis, double dtheta) {
  const Eigen::VectorXd w = s.array().square() * rho.array() * dtheta;
  return -(basis.transpose() * w);
}

// Traces used for the certificate fit. At a constrained optimum the curvature
// identity holds for the domain rescaled so that perimeter balances the
// eigenvalue; that homothety multiplies the squared traces by
// Per / (2 lambda_k), so scaling the raw traces by its square root applies the
// Lagrange multiplier without re-solving. The penalized objective already has
// multiplier one.
Eigen::MatrixXd certificate_traces(const Eigen::MatrixXd& cluster_traces, const FullEval& fe,
                                   const RunConfig& config) {
  if (config.mode == RunMode::penalized) return cluster_traces;
  return cluster_traces * std::sqrt(fe.perimeter / (2.0 * fe.lambda_k));
}

Eigen::VectorXd project_zero_per_rate(const Eigen::VectorXd& g, const Eigen::VectorXd& per_grad) {
  const double denom = per_grad.squaredNorm();
  if (denom <= 0.0) return g;
  return g - (per_grad.dot(g) / denom) * per_grad;
}

FourierBoundary padded_to_order(const FourierBoundary& b, int order) {
  FourierBoundary out = b;
  if (out.order() < order) {
    out.a.resize(static_cast<std::size_t>(order), 0.0);
    out.b.resize(static_cast<std::size_t>(order), 0.0);
  }
  return out;
}

}  // namespace

RunResult minimize(const RunConfig& config, const FourierBoundary& init) {
  if (config.k < 1) throw std::invalid_argument("minimize: k must be at least 1");
  if (config.max_iters < 1) throw std::invalid_argument("minimize: max_iters must be positive");
  if (config.fourier_order < 1) throw std::invalid_argument("minimize: fourier_order must be positive");
  if (config.perimeter_target <= 0.0)
    throw std::invalid_argument("minimize: perimeter_target must be positive");

  FourierBoundary boundary = padded_to_order(init, config.fourier_order);
  require_star_shaped(boundary);

  const int order = boundary.order();
  const int ncoeff = 2 * order + 1;
  const std::vector<double> thetas = uniform_angles(config.n_theta);
  const Eigen::MatrixXd basis = mode_basis(thetas, order);
  const double dtheta = 2.0 * std::numbers::pi / config.n_theta;

  Rng rng(config.seed);
  RunResult result;
  result.status = "max_iters";

  // Constrained mode starts on the constraint manifold.
  if (config.mode == RunMode::constrained) {
    boundary = scale(boundary, config.perimeter_target / perimeter(boundary));
  }

  double prev_step = 1.0;
  FullEval fe = evaluate_full(boundary, config);

  int iter = 0;
  for (iter = 1; iter <= config.max_iters; ++iter) {
    const int m = fe.cluster.size();
    const int lo = fe.cluster.lo;

    Eigen::VectorXd rho(config.n_theta);
    for (int i = 0; i < config.n_theta; ++i) {
      const auto& p = fe.fields.points[static_cast<std::size_t>(i)];
      rho[i] = std::hypot(p[0], p[1]);
    }

    std::vector<double> per_grad_v = perimeter_gradient(boundary);
    Eigen::Map<const Eigen::VectorXd> per_grad(per_grad_v.data(),
                                               static_cast<Eigen::Index>(per_grad_v.size()));

    const Eigen::MatrixXd cluster_traces = fe.traces.middleCols(lo - 1, m);

    // Candidate directional gradients over the eigenspace: the basis
    // combinations plus seeded random ones when the eigenvalue is multiple.
    std::vector<Eigen::VectorXd> combos;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
      e[j] = 1.0;
      combos.push_back(e);
    }
    if (m > 1) {
      for (int j = 0; j < 2 * m; ++j) {
        std::vector<double> u = rng.unit_vector(m);
        combos.push_back(Eigen::Map<const Eigen::VectorXd>(u.data(), m));
      }
    }

    Eigen::MatrixXd candidates(ncoeff, static_cast<Eigen::Index>(combos.size()));
    for (std::size_t c = 0; c < combos.size(); ++c) {
      const Eigen::VectorXd s = cluster_traces * combos[c];
      Eigen::VectorXd g = eigen_gradient(s, rho, basis, dtheta);
      if (config.mode == RunMode::penalized) {
        g += per_grad;
      } else {
        g = project_zero_per_rate(g, per_grad);
      }
      candidates.col(static_cast<Eigen::Index>(c)) = g;
    }

    const Eigen::VectorXd gamma = simplex_min_norm(candidates);
    const Eigen::VectorXd d = candidates * gamma;
    const double snorm = d.norm();

    IterationRecord rec;
    rec.iter = iter;
    rec.objective = fe.objective;
    rec.lambda_k = fe.lambda_k;
    rec.perimeter = fe.perimeter;
    rec.stationarity = snorm;
    rec.cluster_size = m;
    rec.step = 0.0;

    if (snorm < config.eps_opt) {
      Eigen::Map<const Eigen::VectorXd> kappa(fe.fields.curvature.data(),
                                              static_cast<Eigen::Index>(fe.fields.curvature.size()));
      Eigen::Map<const Eigen::VectorXd> dsig(fe.fields.dsigma.data(),
                                             static_cast<Eigen::Index>(fe.fields.dsigma.size()));
      Certificate cert =
          fit_certificate(kappa, certificate_traces(cluster_traces, fe, config), dsig);
      const GapReport gap = verify_gap(fe.spectrum, config.k, config.tau_cluster);
      if (cert.converged && cert.residual_rel < config.eps_cert && gap.gap_ok) {
        result.log.push_back(rec);
        result.converged = true;
        result.status = "converged";
        break;
      }
      // Stationary by the hull measure but uncertified: keep descending.
    }

    // Armijo backtracking along -d on the composite objective.
    std::vector<double> xv = pack_coeffs(boundary);
    Eigen::Map<const Eigen::VectorXd> x(xv.data(), ncoeff);
    double t = std::min(1.0, 2.0 * prev_step);
    bool accepted = false;
    FourierBoundary next;
    LightEval next_ev;
    while (t >= 1e-12) {
      Eigen::VectorXd xt = x - t * d;
      FourierBoundary trial =
          unpack_coeffs(std::vector<double>(xt.data(), xt.data() + xt.size()));
      try {
        LightEval ev = evaluate_light(trial, config);
        if (ev.objective <= fe.objective - 1e-4 * t * snorm * snorm) {
          next = trial;
          next_ev = ev;
          accepted = true;
          break;
        }
      } catch (const NonStarShaped&) {
        // rejected trial, shrink
      } catch (const MeshTooCoarse&) {
        // rejected trial, shrink
      }
      t *= 0.5;
    }

    if (!accepted) {
      result.log.push_back(rec);
      result.status = "no_descent";
      break;
    }

    rec.step = t;
    result.log.push_back(rec);
    prev_step = t;
    boundary = next;
    if (config.mode == RunMode::constrained) {
      boundary = scale(boundary, config.perimeter_target / next_ev.perimeter);
    }
    fe = evaluate_full(boundary, config);
  }
  result.iterations = static_cast<int>(result.log.size());

  // Final report at the last iterate: recompute everything once.
  fe = evaluate_full(boundary, config);
  result.boundary = boundary;
  result.perimeter = fe.perimeter;
  result.objective = fe.objective;
  result.lambdas = fe.spectrum.values;
  result.cluster = fe.cluster;
  result.gap = verify_gap(fe.spectrum, config.k, config.tau_cluster);
  {
    Eigen::Map<const Eigen::VectorXd> kappa(fe.fields.curvature.data(),
                                            static_cast<Eigen::Index>(fe.fields.curvature.size()));
    Eigen::Map<const Eigen::VectorXd> dsig(fe.fields.dsigma.data(),
                                           static_cast<Eigen::Index>(fe.fields.dsigma.size()));
    const Eigen::MatrixXd cluster_traces =
        fe.traces.middleCols(fe.cluster.lo - 1, fe.cluster.size());
    result.certificate =
        fit_certificate(kappa, certificate_traces(cluster_traces, fe, config), dsig);
  }
  return result;
}

CostCurve cost_curve(int k_max, const RunConfig& base, const FourierBoundary& init) {
  if (k_max < 1) throw std::invalid_argument("cost_curve: k_max must be at least 1");
  CostCurve curve;
  for (int k = 1; k <= k_max; ++k) {
    RunConfig cfg = base;
    cfg.k = k;
    bool any_converged = false;
    bool have = false;
    RunResult best;
    for (int r = 0; r < std::max(1, base.restarts); ++r) {
      RunConfig cfg_r = cfg;
      cfg_r.seed = base.seed + static_cast<std::uint64_t>(r);
      FourierBoundary start = padded_to_order(init, cfg.fourier_order);
      if (r > 0) {
        // Seeded perturbation of the initial coefficients; shrink it until
        // the result is star-shaped.
        Rng prng(cfg_r.seed * 1000003ull + 17ull);
        std::vector<double> da(start.a.size()), db(start.b.size());
        for (double& v : da) v = prng.uniform(-0.05, 0.05);
        for (double& v : db) v = prng.uniform(-0.05, 0.05);
        // Leave the first harmonics alone: to leading order they translate
        // the domain, which the objective cannot see, so a restart along them
        // only plants a slowly decaying residue.
        if (!da.empty()) da[0] = 0.0;
        if (!db.empty()) db[0] = 0.0;
        double shrink = 1.0;
        for (int tries = 0; tries < 30; ++tries) {
          FourierBoundary cand = start;
          for (std::size_t i = 0; i < da.size(); ++i) cand.a[i] += shrink * da[i];
          for (std::size_t i = 0; i < db.size(); ++i) cand.b[i] += shrink * db[i];
          try {
            require_star_shaped(cand);
            start = cand;
            break;
          } catch (const NonStarShaped&) {
            shrink *= 0.5;
          }
        }
      }
      RunResult res = minimize(cfg_r, start);
      const bool better = !have || res.objective < best.objective;
      if (res.converged && !any_converged) {
        // First converged run replaces any unconverged placeholder.
        best = res;
        have = true;
        any_converged = true;
      } else if (res.converged == any_converged && better) {
        best = res;
        have = true;
      }
    }
    curve.costs.push_back(best.objective);
    curve.results.push_back(best);
    curve.flagged.push_back(!any_converged);
  }
  return curve;
}

void write_result_json(const std::string& path, const RunResult& result, const RunConfig& config,
                       const std::string& timestamp) {
  nlohmann::json j;
  j["boundary"]["a0"] = result.boundary.a0;
  j["boundary"]["a"] = result.boundary.a;
  j["boundary"]["b"] = result.boundary.b;
  j["cluster"]["lo"] = result.cluster.lo;
  j["cluster"]["hi"] = result.cluster.hi;
  j["converged"] = result.converged;
  j["gap_ok"] = result.gap.gap_ok;
  j["iterations"] = result.iterations;
  j["k"] = config.k;
  j["lambda"] = result.lambdas;
  j["mode"] = config.mode == RunMode::penalized ? "penalized" : "constrained";
  j["mu"] = std::vector<double>(result.certificate.mu.data(),
                                result.certificate.mu.data() + result.certificate.mu.size());
  j["objective"] = result.objective;
  j["perimeter"] = result.perimeter;
  j["residual_rel"] = result.certificate.residual_rel;
  j["timestamp"] = timestamp;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_result_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

void write_shape_svg(const std::string& path, const FourierBoundary& boundary) {
  const int samples = 512;
  std::vector<double> th = uniform_angles(samples);
  RadiusSamples rs = radius_eval(boundary, th);
  std::vector<double> xs(samples), ys(samples);
  double cx = 0.0, cy = 0.0;
  for (int i = 0; i < samples; ++i) {
    xs[static_cast<std::size_t>(i)] = rs.rho[static_cast<std::size_t>(i)] * std::cos(th[static_cast<std::size_t>(i)]);
    ys[static_cast<std::size_t>(i)] = rs.rho[static_cast<std::size_t>(i)] * std::sin(th[static_cast<std::size_t>(i)]);
    cx += xs[static_cast<std::size_t>(i)];
    cy += ys[static_cast<std::size_t>(i)];
  }
  cx /= samples;
  cy /= samples;
  double rmax = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double dx = xs[static_cast<std::size_t>(i)] - cx;
    const double dy = ys[static_cast<std::size_t>(i)] - cy;
    rmax = std::max(rmax, std::hypot(dx, dy));
  }
  if (rmax <= 0.0) throw DegenerateInput("write_shape_svg: degenerate boundary");
  const double s = 450.0 / rmax;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_shape_svg: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\">\n";
  out << "  <polygon fill=\"none\" stroke=\"#1a1a1a\" stroke-width=\"3\" points=\"";
  char buf[64];
  for (int i = 0; i < samples; ++i) {
    const double px = 500.0 + (xs[static_cast<std::size_t>(i)] - cx) * s;
    const double py = 500.0 - (ys[static_cast<std::size_t>(i)] - cy) * s;
    std::snprintf(buf, sizeof(buf), "%s%.4f,%.4f", i == 0 ? "" : " ", px, py);
    out << buf;
  }
  out << "\"/>\n</svg>\n";
}

std::string iteration_log_text(const RunResult& result) {
  std::string text;
  char buf[256];
  for (const IterationRecord& r : result.log) {
    std::snprintf(buf, sizeof(buf), "%d %.17g %.17g %.17g %.17g %.17g %d\n", r.iter, r.objective,
                  r.lambda_k, r.perimeter, r.stationarity, r.step, r.cluster_size);
    text += buf;
  }
  return text;
}

}  // namespace eigenshape
