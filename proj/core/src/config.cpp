#include "eigenshape/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "eigenshape/errors.hpp"

namespace eigenshape {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw ConfigError(key + ": trailing characters in '" + value + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + value + "' as a number");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw ConfigError(key + ": trailing characters in '" + value + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + value + "' as an integer");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw ConfigError(key + ": trailing characters in '" + value + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + value + "' as an unsigned integer");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(key, trim(item)));
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

void apply_override(FileConfig& config, const std::string& key, const std::string& value) {
  if (key == "k") {
    config.run.k = static_cast<int>(parse_int(key, value));
  } else if (key == "fourier_order") {
    config.run.fourier_order = static_cast<int>(parse_int(key, value));
  } else if (key == "n_r") {
    config.run.n_r = static_cast<int>(parse_int(key, value));
  } else if (key == "n_theta") {
    config.run.n_theta = static_cast<int>(parse_int(key, value));
  } else if (key == "tau_cluster") {
    config.run.tau_cluster = parse_double(key, value);
  } else if (key == "eps_opt") {
    config.run.eps_opt = parse_double(key, value);
  } else if (key == "eps_cert") {
    config.run.eps_cert = parse_double(key, value);
  } else if (key == "max_iters") {
    config.run.max_iters = static_cast<int>(parse_int(key, value));
  } else if (key == "restarts") {
    config.run.restarts = static_cast<int>(parse_int(key, value));
  } else if (key == "seed") {
    config.run.seed = parse_u64(key, value);
  } else if (key == "mode") {
    if (value == "penalized") {
      config.run.mode = RunMode::penalized;
    } else if (value == "constrained") {
      config.run.mode = RunMode::constrained;
    } else {
      throw ConfigError("mode: expected penalized or constrained, got '" + value + "'");
    }
  } else if (key == "perimeter_target") {
    config.run.perimeter_target = parse_double(key, value);
  } else if (key == "init_a0") {
    config.init.a0 = parse_double(key, value);
  } else if (key == "init_a") {
    config.init.a = parse_list(key, value);
    const std::size_t n = std::max(config.init.a.size(), config.init.b.size());
    config.init.a.resize(n, 0.0);
    config.init.b.resize(n, 0.0);
  } else if (key == "init_b") {
    config.init.b = parse_list(key, value);
    const std::size_t n = std::max(config.init.a.size(), config.init.b.size());
    config.init.a.resize(n, 0.0);
    config.init.b.resize(n, 0.0);
  } else if (key == "ell") {
    config.ell = static_cast<int>(parse_int(key, value));
  } else if (key == "dump_mesh") {
    config.dump_mesh = parse_bool(key, value);
  } else if (key == "spectrum_count") {
    config.spectrum_count = static_cast<int>(parse_int(key, value));
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

FileConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  FileConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    }
    apply_override(config, key, value);
  }
  return config;
}

void validate_config(const FileConfig& config) {
  const RunConfig& r = config.run;
  if (r.k < 1) throw ConfigError("k must be at least 1");
  if (r.fourier_order < 1) throw ConfigError("fourier_order must be at least 1");
  if (r.n_r < 2) throw ConfigError("n_r must be at least 2");
  if (r.n_theta < 64 || r.n_theta % 2 != 0)
    throw ConfigError("n_theta must be even and at least 64");
  if (!(r.tau_cluster > 0.0)) throw ConfigError("tau_cluster must be positive");
  if (!(r.eps_opt > 0.0)) throw ConfigError("eps_opt must be positive");
  if (!(r.eps_cert > 0.0)) throw ConfigError("eps_cert must be positive");
  if (r.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (r.restarts < 1) throw ConfigError("restarts must be at least 1");
  if (!(r.perimeter_target > 0.0)) throw ConfigError("perimeter_target must be positive");
  if (config.ell < 1) throw ConfigError("ell must be at least 1");
  if (config.spectrum_count < 0) throw ConfigError("spectrum_count must be nonnegative");
  if (!(config.init.a0 > 0.0)) throw ConfigError("init_a0 must be positive");
}

std::string manifest_text(const FileConfig& config) {
  std::map<std::string, std::string> kv;
  kv["k"] = std::to_string(config.run.k);
  kv["fourier_order"] = std::to_string(config.run.fourier_order);
  kv["n_r"] = std::to_string(config.run.n_r);
  kv["n_theta"] = std::to_string(config.run.n_theta);
  kv["tau_cluster"] = format_double(config.run.tau_cluster);
  kv["eps_opt"] = format_double(config.run.eps_opt);
  kv["eps_cert"] = format_double(config.run.eps_cert);
  kv["max_iters"] = std::to_string(config.run.max_iters);
  kv["restarts"] = std::to_string(config.run.restarts);
  kv["seed"] = std::to_string(config.run.seed);
  kv["mode"] = config.run.mode == RunMode::penalized ? "penalized" : "constrained";
  kv["perimeter_target"] = format_double(config.run.perimeter_target);
  kv["init_a0"] = format_double(config.init.a0);
  kv["init_a"] = format_list(config.init.a);
  kv["init_b"] = format_list(config.init.b);
  kv["ell"] = std::to_string(config.ell);
  kv["dump_mesh"] = config.dump_mesh ? "true" : "false";
  kv["spectrum_count"] = std::to_string(config.spectrum_count);
  std::string out;
  for (const auto& [key, value] : kv) {
    out += key + " = " + value + "\n";
  }
  return out;
}

}  // namespace eigenshape
