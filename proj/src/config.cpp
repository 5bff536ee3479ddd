#include "slab/config.hpp"

#include <cstddef>
#include <fstream>
#include <sstream>

#include "slab/error.hpp"

namespace slab {

namespace {

double parse_double(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + s + "' as a number");
  }
  if (pos != s.size()) throw ConfigError(key + ": trailing junk in '" + s + "'");
  return v;
}

long parse_long(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + s + "' as an integer");
  }
  if (pos != s.size()) throw ConfigError(key + ": trailing junk in '" + s + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& s) {
  return static_cast<int>(parse_long(key, s));
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + s + "' as an unsigned integer");
  }
  if (pos != s.size()) throw ConfigError(key + ": trailing junk in '" + s + "'");
  return v;
}

std::vector<double> parse_csv_doubles(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError(key + ": empty element in '" + s + "'");
    out.push_back(parse_double(key, item.substr(b, e - b + 1)));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool apply_boundary_side(BoundarySide& side, const std::string& key, const std::string& field,
                         const std::string& value) {
  if (field == "family") {
    if (value == "cutoff_maxwellian")
      side.family = BoundaryFamily::cutoff_maxwellian;
    else if (value == "custom_table")
      side.family = BoundaryFamily::custom_table;
    else
      throw ConfigError(key + ": unknown family '" + value + "'");
  } else if (field == "n") {
    side.n = parse_double(key, value);
  } else if (field == "T") {
    side.T = parse_double(key, value);
  } else if (field == "u1") {
    side.u[0] = parse_double(key, value);
  } else if (field == "u2") {
    side.u[1] = parse_double(key, value);
  } else if (field == "u3") {
    side.u[2] = parse_double(key, value);
  } else if (field == "beta") {
    side.beta = parse_double(key, value);
  } else if (field == "table") {
    side.table_path = value;
  } else {
    return false;
  }
  return true;
}

}  // namespace

bool apply_config_entry(RunConfig& rc, const std::string& key, const std::string& value) {
  // grid.*
  if (key == "grid.n_x") rc.grid.n_x = parse_int(key, value);
  else if (key == "grid.n_v") rc.grid.n_v = parse_int(key, value);
  else if (key == "grid.v_max") rc.grid.v_max = parse_double(key, value);
  else if (key == "grid.n_I") rc.grid.n_I = parse_int(key, value);
  else if (key == "grid.I_max") rc.grid.I_max = parse_double(key, value);
  else if (key == "grid.i_spacing") {
    if (value == "uniform") rc.grid.i_spacing = ISpacing::uniform;
    else if (value == "stretched") rc.grid.i_spacing = ISpacing::stretched;
    else throw ConfigError(key + ": unknown spacing '" + value + "'");
  }
  else if (key == "grid.i_stretch_T") rc.grid.i_stretch_T = parse_double(key, value);
  // params.*
  else if (key == "params.gamma") rc.params.gamma = parse_double(key, value);
  else if (key == "params.alpha") rc.params.alpha = parse_double(key, value);
  else if (key == "params.weight_a") rc.params.weight_a = parse_double(key, value);
  else if (key == "params.epsilon") rc.params.epsilon = parse_double(key, value);
  else if (key == "params.kernel") rc.params.kernel = kernel_model_from_string(value);
  else if (key == "params.mutation") rc.params.mutation = mutation_from_string(value);
  // quad.*
  else if (key == "quad.method") {
    if (value == "mc") rc.quad.method = QuadratureSpec::Method::mc;
    else if (value == "tensor") rc.quad.method = QuadratureSpec::Method::tensor;
    else throw ConfigError(key + ": unknown method '" + value + "'");
  }
  else if (key == "quad.n_samples") rc.quad.n_samples = parse_long(key, value);
  else if (key == "quad.seed") rc.quad.seed = parse_u64(key, value);
  else if (key == "quad.nt_r") rc.quad.nt_r = parse_int(key, value);
  else if (key == "quad.nt_R") rc.quad.nt_R = parse_int(key, value);
  else if (key == "quad.nt_cos") rc.quad.nt_cos = parse_int(key, value);
  else if (key == "quad.nt_phi") rc.quad.nt_phi = parse_int(key, value);
  // boundary.left.* / boundary.right.*
  else if (key.rfind("boundary.left.", 0) == 0) {
    return apply_boundary_side(rc.boundary.left, key, key.substr(14), value);
  }
  else if (key.rfind("boundary.right.", 0) == 0) {
    return apply_boundary_side(rc.boundary.right, key, key.substr(15), value);
  }
  // solver.*
  else if (key == "solver.tol_rel") rc.solver.tol_rel = parse_double(key, value);
  else if (key == "solver.max_iter") rc.solver.max_iter = parse_int(key, value);
  else if (key == "solver.divergence_streak") rc.solver.divergence_streak = parse_int(key, value);
  else if (key == "solver.max_halvings") rc.solver.max_halvings = parse_int(key, value);
  // sweep / suite / output
  else if (key == "sweep.eps_list") rc.eps_sweep = parse_csv_doubles(key, value);
  else if (key == "suite.sigma_configs") rc.sigma_configs = parse_long(key, value);
  else if (key == "suite.symmetry_samples") rc.symmetry_samples = parse_long(key, value);
  else if (key == "output.dir") rc.output_dir = value;
  else return false;
  return true;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig rc;
  std::vector<std::string> unknown;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                        line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!apply_config_entry(rc, key, value)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config key(s):";
    for (const std::string& k : unknown) msg += " '" + k + "'";
    throw ConfigError(msg);
  }
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void RunConfig::validate() const {
  params.validate();

  if (grid.n_x < 2) throw ConfigError("grid.n_x must be >= 2");
  if (grid.n_v < 2 || grid.n_v % 2 != 0)
    throw ConfigError("grid.n_v must be even and >= 2 (no node may sit on v1 = 0)");
  if (!(grid.v_max > 0)) throw ConfigError("grid.v_max must be > 0");
  if (grid.n_I < 2) throw ConfigError("grid.n_I must be >= 2");
  if (!(grid.I_max > 0)) throw ConfigError("grid.I_max must be > 0");
  if (!(grid.i_stretch_T > 0)) throw ConfigError("grid.i_stretch_T must be > 0");

  if (quad.n_samples < 1) throw ConfigError("quad.n_samples must be >= 1");
  if (quad.nt_r < 1 || quad.nt_R < 1 || quad.nt_cos < 1 || quad.nt_phi < 1)
    throw ConfigError("quad.nt_* resolutions must be >= 1");

  for (const BoundarySide* side : {&boundary.left, &boundary.right}) {
    if (side->family == BoundaryFamily::cutoff_maxwellian) {
      if (!(side->n >= 0)) throw ConfigError("boundary density must be >= 0");
      if (!(side->T > 0)) throw ConfigError("boundary temperature must be > 0");
      if (params.weight_a * side->T >= 1.0)
        throw ConfigError("weight_a * T must stay below 1 for boundary Maxwellians (got a*T = " +
                          std::to_string(params.weight_a * side->T) + ")");
      if (side->beta < 0) throw ConfigError("boundary beta must be >= 0");
    } else if (side->table_path.empty()) {
      throw ConfigError("custom_table boundary requires a table path");
    }
  }

  if (!(solver.tol_rel > 0)) throw ConfigError("solver.tol_rel must be > 0");
  if (solver.max_iter < 1) throw ConfigError("solver.max_iter must be >= 1");
  if (solver.divergence_streak < 1) throw ConfigError("solver.divergence_streak must be >= 1");
  if (solver.max_halvings < 0) throw ConfigError("solver.max_halvings must be >= 0");

  if (eps_sweep.empty()) throw ConfigError("sweep.eps_list must not be empty");
  for (std::size_t i = 0; i < eps_sweep.size(); ++i) {
    if (!(eps_sweep[i] > 0) || eps_sweep[i] > 1.0)
      throw ConfigError("sweep.eps_list entries must lie in (0,1]");
    if (i > 0 && eps_sweep[i] >= eps_sweep[i - 1])
      throw ConfigError("sweep.eps_list must be strictly decreasing");
  }

  if (sigma_configs < 1) throw ConfigError("suite.sigma_configs must be >= 1");
  if (symmetry_samples < 1) throw ConfigError("suite.symmetry_samples must be >= 1");
}

nlohmann::json config_to_json(const RunConfig& rc) {
  nlohmann::json side_l{{"family", rc.boundary.left.family == BoundaryFamily::cutoff_maxwellian
                                       ? "cutoff_maxwellian"
                                       : "custom_table"},
                        {"n", rc.boundary.left.n},
                        {"T", rc.boundary.left.T},
                        {"u", {rc.boundary.left.u[0], rc.boundary.left.u[1], rc.boundary.left.u[2]}},
                        {"beta", rc.boundary.left.beta},
                        {"table", rc.boundary.left.table_path}};
  nlohmann::json side_r{{"family", rc.boundary.right.family == BoundaryFamily::cutoff_maxwellian
                                       ? "cutoff_maxwellian"
                                       : "custom_table"},
                        {"n", rc.boundary.right.n},
                        {"T", rc.boundary.right.T},
                        {"u", {rc.boundary.right.u[0], rc.boundary.right.u[1], rc.boundary.right.u[2]}},
                        {"beta", rc.boundary.right.beta},
                        {"table", rc.boundary.right.table_path}};
  return nlohmann::json{
      {"grid",
       {{"n_x", rc.grid.n_x},
        {"n_v", rc.grid.n_v},
        {"v_max", rc.grid.v_max},
        {"n_I", rc.grid.n_I},
        {"I_max", rc.grid.I_max},
        {"i_spacing", rc.grid.i_spacing == ISpacing::stretched ? "stretched" : "uniform"},
        {"i_stretch_T", rc.grid.i_stretch_T}}},
      {"params",
       {{"gamma", rc.params.gamma},
        {"alpha", rc.params.alpha},
        {"weight_a", rc.params.weight_a},
        {"epsilon", rc.params.epsilon},
        {"kernel", to_string(rc.params.kernel)},
        {"mutation", to_string(rc.params.mutation)}}},
      {"quad",
       {{"method", rc.quad.method == QuadratureSpec::Method::mc ? "mc" : "tensor"},
        {"n_samples", rc.quad.n_samples},
        {"seed", rc.quad.seed},
        {"nt_r", rc.quad.nt_r},
        {"nt_R", rc.quad.nt_R},
        {"nt_cos", rc.quad.nt_cos},
        {"nt_phi", rc.quad.nt_phi}}},
      {"boundary", {{"left", side_l}, {"right", side_r}}},
      {"solver",
       {{"tol_rel", rc.solver.tol_rel},
        {"max_iter", rc.solver.max_iter},
        {"divergence_streak", rc.solver.divergence_streak},
        {"max_halvings", rc.solver.max_halvings}}},
      {"sweep", {{"eps_list", rc.eps_sweep}}},
      {"suite", {{"sigma_configs", rc.sigma_configs}, {"symmetry_samples", rc.symmetry_samples}}},
      {"output", {{"dir", rc.output_dir}}}};
}

}  // namespace slab
