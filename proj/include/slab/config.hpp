#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "slab/collision.hpp"
#include "slab/grid.hpp"
#include "slab/params.hpp"
#include "slab/solver.hpp"

namespace slab {

/// Everything a run needs, assembled from a plain-text config file plus CLI
/// overrides. Defaults reproduce the standard verification setup.
struct RunConfig {
  GridSpec grid;
  CollisionParams params;
  QuadratureSpec quad;
  BoundaryConditions boundary;
  PicardOptions solver;

  std::vector<double> eps_sweep{0.2, 0.1, 0.05, 0.025};
  long sigma_configs = 2000;       // random kernel configs of the sigma-integral check
  long symmetry_samples = 200000;  // MC samples per symmetry estimate
  std::string output_dir = "out";

  /// Consolidated sanity checks across sub-structs (parameter ranges, boundary
  /// admissibility against the norm weight, sweep monotonicity). Throws
  /// ConfigError with the first violation.
  void validate() const;
};

/// Apply one `key = value` entry. Returns false when the key is unknown (the
/// caller decides how to report), throws ConfigError on a malformed value.
bool apply_config_entry(RunConfig& rc, const std::string& key, const std::string& value);

/// Parse config text: one `key = value` per line, `#` comments, blank lines
/// ignored. Unknown keys are collected and reported together in one error.
RunConfig parse_config_text(const std::string& text);

/// Load and parse a config file.
RunConfig load_config(const std::string& path);

/// The fully resolved configuration, for embedding into run artifacts.
nlohmann::json config_to_json(const RunConfig& rc);

}  // namespace slab
