#pragma once

#include <string>

#include "eigenshape/geometry.hpp"
#include "eigenshape/optimizer.hpp"

namespace eigenshape {

// Resolved tool configuration: the run parameters plus the initial boundary
// and the handful of knobs that only the command line tool consumes.
struct FileConfig {
  RunConfig run;
  FourierBoundary init{1.0, {0.0, 0.1}, {0.0, 0.0}};  // rho = 1 + 0.1 cos 2t
  int ell = 1;             // requested negative-direction count for signature fields
  bool dump_mesh = false;
  int spectrum_count = 0;  // 0 means k + 4
};

// Parses "key = value" lines; '#' starts a comment, blank lines are skipped.
// Unknown keys and malformed values raise ConfigError.
FileConfig load_config_file(const std::string& path);

// Applies a single key=value override on top of an existing configuration.
void apply_override(FileConfig& config, const std::string& key, const std::string& value);

// Range checks; raises ConfigError with the offending key in the message.
void validate_config(const FileConfig& config);

// Deterministic manifest: every key on its own "key = value" line, sorted.
std::string manifest_text(const FileConfig& config);

}  // namespace eigenshape
