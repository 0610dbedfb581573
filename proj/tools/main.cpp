// Command line front end: optimize | certify | spectrum | cluster-demo |
// validate | cost-curve. Every run writes manifest.txt with the resolved
// configuration next to its outputs.
//
// Exit codes: 0 success, 2 invalid configuration or usage, 3 the computation
// ran but did not reach its goal (non-convergence, failed checks).

#include <climits>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eigenshape/cluster.hpp"
#include "eigenshape/config.hpp"
#include "eigenshape/eigensolver.hpp"
#include "eigenshape/errors.hpp"
#include "eigenshape/geometry.hpp"
#include "eigenshape/mesh.hpp"
#include "eigenshape/optimality.hpp"
#include "eigenshape/optimizer.hpp"
#include "eigenshape/validation.hpp"

namespace fs = std::filesystem;
using namespace eigenshape;

namespace {

constexpr int kNoOverride = INT_MIN;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> sets;
  int k = kNoOverride;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file (key = value lines)");
  cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--set", args.sets, "override a configuration key, key=value (repeatable)");
  cmd->add_option("--k", args.k, "eigenvalue index (overrides the config)");
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

FileConfig resolve_config(const CommonArgs& args) {
  FileConfig cfg;
  if (!args.config_path.empty()) cfg = load_config_file(args.config_path);
  for (const std::string& s : args.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_override(cfg, trimmed(s.substr(0, eq)), trimmed(s.substr(eq + 1)));
  }
  if (args.k != kNoOverride) cfg.run.k = args.k;
  validate_config(cfg);
  return cfg;
}

fs::path prepare_out(const CommonArgs& args, const FileConfig& cfg) {
  fs::path out(args.out_dir);
  fs::create_directories(out);
  std::ofstream f(out / "manifest.txt");
  if (!f) throw std::runtime_error("cannot write manifest in " + out.string());
  f << manifest_text(cfg);
  return out;
}

std::string now_timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[40];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

// Spectrum with the cluster at k fully inside the computed range.
Spectrum solve_with_cluster(const Mesh& mesh, int k, double tau, int count0, Cluster* cluster) {
  int count = count0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Spectrum spec = solve_spectrum(mesh, count);
    try {
      *cluster = detect_cluster(spec.values, k, tau);
      return spec;
    } catch (const ClusterTouchesTop&) {
      count += 4;
    }
  }
  throw ClusterTouchesTop("cluster still touches the computed range after enlarging it");
}

int run_optimize(const CommonArgs& args) {
  const FileConfig cfg = resolve_config(args);
  const fs::path out = prepare_out(args, cfg);
  RunResult res = minimize(cfg.run, cfg.init);
  write_result_json((out / "result.json").string(), res, cfg.run, now_timestamp());
  write_shape_svg((out / "shape.svg").string(), res.boundary);
  write_spectrum_csv((out / "spectrum.csv").string(), res.lambdas);
  write_certificate_json((out / "certificate.json").string(), res.certificate, res.cluster);
  if (cfg.dump_mesh) {
    Mesh mesh = build_mesh(res.boundary, cfg.run.n_r, cfg.run.n_theta);
    write_mesh((out / "mesh.txt").string(), mesh);
  }
  std::printf("optimize k=%d status=%s iterations=%d objective=%.12g perimeter=%.12g "
              "lambda_k=%.12g residual_rel=%.4g\n",
              cfg.run.k, res.status.c_str(), res.iterations, res.objective, res.perimeter,
              res.lambdas[static_cast<std::size_t>(cfg.run.k - 1)], res.certificate.residual_rel);
  return res.converged ? 0 : 3;
}

int run_certify(const CommonArgs& args) {
  const FileConfig cfg = resolve_config(args);
  const fs::path out = prepare_out(args, cfg);
  require_star_shaped(cfg.init);
  Mesh mesh = build_mesh(cfg.init, cfg.run.n_r, cfg.run.n_theta);
  Cluster cluster;
  Spectrum spec =
      solve_with_cluster(mesh, cfg.run.k, cfg.run.tau_cluster, cfg.run.k + 4, &cluster);
  BoundaryFields fields = boundary_fields(cfg.init, cfg.run.n_theta);
  NormalTraces traces = normal_trace(mesh, spec, fields);
  Eigen::Map<const Eigen::VectorXd> kappa(fields.curvature.data(),
                                          static_cast<Eigen::Index>(fields.curvature.size()));
  Eigen::Map<const Eigen::VectorXd> dsig(fields.dsigma.data(),
                                         static_cast<Eigen::Index>(fields.dsigma.size()));
  const Eigen::MatrixXd cluster_traces =
      traces.values.middleCols(cluster.lo - 1, cluster.size());
  Certificate cert = fit_certificate(kappa, cluster_traces, dsig);
  write_certificate_json((out / "certificate.json").string(), cert, cluster);
  std::printf("certify k=%d cluster=[%d,%d] residual_rel=%.6g fit_converged=%s\n", cfg.run.k,
              cluster.lo, cluster.hi, cert.residual_rel, cert.converged ? "yes" : "no");
  return cert.converged ? 0 : 3;
}

int run_spectrum(const CommonArgs& args) {
  const FileConfig cfg = resolve_config(args);
  const fs::path out = prepare_out(args, cfg);
  require_star_shaped(cfg.init);
  Mesh mesh = build_mesh(cfg.init, cfg.run.n_r, cfg.run.n_theta);
  const int count = cfg.spectrum_count > 0 ? cfg.spectrum_count : cfg.run.k + 4;
  Spectrum spec = solve_spectrum(mesh, count);
  write_spectrum_csv((out / "spectrum.csv").string(), spec.values);
  if (cfg.dump_mesh) write_mesh((out / "mesh.txt").string(), mesh);
  std::printf("spectrum count=%d lambda_1=%.12g lambda_%d=%.12g\n", count, spec.values.front(),
              count, spec.values.back());
  return 0;
}

int run_cluster_demo(const CommonArgs& args) {
  const FileConfig cfg = resolve_config(args);
  const fs::path out = prepare_out(args, cfg);
  require_star_shaped(cfg.init);
  Mesh mesh = build_mesh(cfg.init, cfg.run.n_r, cfg.run.n_theta);
  Cluster cluster;
  Spectrum spec =
      solve_with_cluster(mesh, cfg.run.k, cfg.run.tau_cluster, cfg.run.k + 4, &cluster);
  if (cluster.size() < 2) {
    std::fprintf(stderr, "cluster-demo: eigenvalue %d is simple at tau=%g, nothing to split\n",
                 cfg.run.k, cfg.run.tau_cluster);
    return 3;
  }
  if (cfg.ell >= cluster.size()) {
    throw ConfigError("ell must be below the cluster size (" +
                      std::to_string(cluster.size()) + ")");
  }
  BoundaryFields fields = boundary_fields(cfg.init, cfg.run.n_theta);
  NormalTraces traces = normal_trace(mesh, spec, fields);
  const Eigen::MatrixXd cluster_traces =
      traces.values.middleCols(cluster.lo - 1, cluster.size());
  SignatureField sig = signature_field(cluster_traces, fields, cfg.ell);

  DerivativeAudit audit = fd_derivative_audit(cfg.init, cfg.run.k, sig.direction, cfg.run.n_r,
                                              cfg.run.n_theta, 1e-4, cfg.run.tau_cluster);

  nlohmann::json j;
  j["cluster"]["lo"] = cluster.lo;
  j["cluster"]["hi"] = cluster.hi;
  j["delta"] = sig.delta;
  j["ell"] = cfg.ell;
  j["fd_branch_rates"] =
      std::vector<double>(audit.branch_fd.data(), audit.branch_fd.data() + audit.branch_fd.size());
  j["magnitudes"] = sig.magnitudes;
  j["margin"] = sig.margin;
  j["per_rate"] = sig.per_rate;
  std::vector<double> angles;
  for (int idx : sig.points) angles.push_back(fields.thetas[static_cast<std::size_t>(idx)]);
  j["point_angles"] = angles;
  j["rates"] =
      std::vector<double>(sig.cluster_rates.data(), sig.cluster_rates.data() + sig.cluster_rates.size());
  j["retries"] = sig.retries;
  std::ofstream f(out / "cluster_demo.json");
  f << j.dump(2) << "\n";

  int neg = 0;
  for (Eigen::Index i = 0; i < sig.cluster_rates.size(); ++i)
    if (sig.cluster_rates[i] < 0.0) ++neg;
  std::printf("cluster-demo k=%d cluster=[%d,%d] ell=%d negative_rates=%d per_rate=%.3g "
              "fd_agrees=%s\n",
              cfg.run.k, cluster.lo, cluster.hi, cfg.ell, neg, sig.per_rate,
              audit.pass ? "yes" : "no");
  return audit.pass ? 0 : 3;
}

int run_validate(const CommonArgs& args) {
  const FileConfig cfg = resolve_config(args);
  const fs::path out = prepare_out(args, cfg);
  std::vector<CheckLine> lines = run_validation_suite();
  write_validation_report((out / "validate.txt").string(), lines);
  bool all_ok = true;
  for (const CheckLine& line : lines) {
    std::printf("%-32s %s  err=%.3g\n", line.name.c_str(), line.ok ? "ok" : "FAIL", line.err);
    all_ok = all_ok && line.ok;
  }
  return all_ok ? 0 : 3;
}

int run_cost_curve(const CommonArgs& args) {
  const FileConfig cfg = resolve_config(args);
  const fs::path out = prepare_out(args, cfg);
  const int k_max = cfg.run.k;  // here k names the top index of the sweep
  CostCurve curve = cost_curve(k_max, cfg.run, cfg.init);
  std::ofstream f(out / "cost_curve.csv");
  f << "k,cost,converged\n";
  char buf[80];
  bool all_converged = true;
  for (int k = 1; k <= k_max; ++k) {
    const bool conv = !curve.flagged[static_cast<std::size_t>(k - 1)];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%d\n", k,
                  curve.costs[static_cast<std::size_t>(k - 1)], conv ? 1 : 0);
    f << buf;
    all_converged = all_converged && conv;
    std::printf("cost-curve k=%d cost=%.12g converged=%s\n", k,
                curve.costs[static_cast<std::size_t>(k - 1)], conv ? "yes" : "no");
  }
  return all_converged ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral shape optimization over star-shaped planar domains"};
  app.require_subcommand(1);

  CommonArgs a_optimize, a_certify, a_spectrum, a_demo, a_validate, a_curve;
  CLI::App* c_optimize =
      app.add_subcommand("optimize", "minimize the eigenvalue objective over boundaries");
  add_common(c_optimize, a_optimize);
  CLI::App* c_certify =
      app.add_subcommand("certify", "fit the curvature certificate at the given boundary");
  add_common(c_certify, a_certify);
  CLI::App* c_spectrum = app.add_subcommand("spectrum", "compute low Dirichlet eigenvalues");
  add_common(c_spectrum, a_spectrum);
  CLI::App* c_demo = app.add_subcommand(
      "cluster-demo", "build a signature field that splits a multiple eigenvalue");
  add_common(c_demo, a_demo);
  CLI::App* c_validate =
      app.add_subcommand("validate", "run the analytic cross-check suite");
  add_common(c_validate, a_validate);
  CLI::App* c_curve =
      app.add_subcommand("cost-curve", "best-of-restarts optimal cost for k = 1..k_max");
  add_common(c_curve, a_curve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_optimize->parsed()) return run_optimize(a_optimize);
    if (c_certify->parsed()) return run_certify(a_certify);
    if (c_spectrum->parsed()) return run_spectrum(a_spectrum);
    if (c_demo->parsed()) return run_cluster_demo(a_demo);
    if (c_validate->parsed()) return run_validate(a_validate);
    if (c_curve->parsed()) return run_cost_curve(a_curve);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const NonStarShaped& e) {
    std::fprintf(stderr, "invalid boundary: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return 2;
  } catch (const SignatureFailed& e) {
    std::fprintf(stderr, "signature construction failed: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
