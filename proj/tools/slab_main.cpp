// Command-line front end: solve the stationary slab problem, run the
// verification suite, or sweep the contraction behaviour over epsilon.
//
// Exit codes: 0 success, 1 a verification check failed, 2 configuration
// error, 3 the fixed-point iteration diverged.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "slab/config.hpp"
#include "slab/error.hpp"
#include "slab/verify.hpp"

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw slab::ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json picard_json(const slab::PicardResult& res) {
  return nlohmann::json{{"converged", res.converged},
                        {"diverged", res.diverged},
                        {"iterations", res.iterations},
                        {"eps_used", res.eps_used},
                        {"halvings", res.halvings},
                        {"residuals", res.residuals},
                        {"ratios", res.ratios},
                        {"fitted_rate", res.fitted_rate},
                        {"fresh_seed_residual", res.fresh_seed_residual},
                        {"tol_abs", res.tol_abs},
                        {"negative_clamps", res.clamp_total}};
}

int run_solve(const slab::RunConfig& rc) {
  const slab::PhaseGrid g = slab::build_grid(rc.grid);
  const slab::BoundaryData bdata = slab::make_boundary(g, rc.boundary, rc.params);
  const slab::PicardResult res =
      slab::picard_solve(g, bdata, rc.params, rc.quad, rc.solver);

  const std::filesystem::path dir(rc.output_dir);
  std::filesystem::create_directories(dir);

  nlohmann::json doc{{"config", slab::config_to_json(rc)}, {"picard", picard_json(res)}};
  std::string csv = "x,density,u1,u2,u3,T_kinetic,T_internal\n";
  if (res.converged) {
    nlohmann::json rows = nlohmann::json::array();
    for (const slab::MomentRow& m : slab::moments(res.f, rc.params)) {
      rows.push_back({{"x", m.x},
                      {"density", m.density},
                      {"velocity", {m.velocity[0], m.velocity[1], m.velocity[2]}},
                      {"T_kinetic", m.T_kinetic},
                      {"T_internal", m.T_internal}});
      csv += csv_num(m.x) + "," + csv_num(m.density) + "," + csv_num(m.velocity[0]) + "," +
             csv_num(m.velocity[1]) + "," + csv_num(m.velocity[2]) + "," + csv_num(m.T_kinetic) +
             "," + csv_num(m.T_internal) + "\n";
    }
    doc["moments"] = rows;
  }
  write_text(dir / "solution.json", doc.dump(2) + "\n");
  write_text(dir / "moments.csv", csv);

  if (!res.converged) {
    std::cerr << "picard iteration did not converge (diverged = " << res.diverged
              << ", iterations = " << res.iterations << ")\n";
    return 3;
  }
  std::cout << "converged in " << res.iterations << " iterations at epsilon = " << res.eps_used
            << " (residual rate " << res.fitted_rate << ")\n"
            << "artifacts: " << (dir / "solution.json").string() << ", "
            << (dir / "moments.csv").string() << "\n";
  return 0;
}

int run_verify(const slab::RunConfig& rc) {
  const slab::PhaseGrid g = slab::build_grid(rc.grid);
  slab::SuiteOptions opt;
  opt.sigma_configs = rc.sigma_configs;
  opt.symmetry_samples = rc.symmetry_samples;
  opt.eps_sweep = rc.eps_sweep;
  const slab::SuiteReport rep = slab::run_suite(g, rc.boundary, rc.params, rc.quad, opt);

  for (const slab::BoundCheck& c : rep.checks) {
    const char* tag = c.skipped ? "SKIP" : (c.passed ? "pass" : "FAIL");
    std::cout << tag << "  " << c.name;
    if (!c.skipped && c.statistical) std::cout << "  (sigma " << c.sigma_level << ")";
    if (!c.note.empty()) std::cout << "  [" << c.note << "]";
    std::cout << "\n";
  }
  std::cout << (rep.all_passed ? "all checks passed" : "CHECKS FAILED") << " ("
            << rep.checks.size() << " checks, manifest "
            << (rep.manifest_covered ? "covered" : "NOT covered") << ")\n";

  const std::filesystem::path dir(rc.output_dir);
  std::filesystem::create_directories(dir);
  nlohmann::json doc = slab::suite_to_json(rep);
  doc["config"] = slab::config_to_json(rc);
  write_text(dir / "verify_report.json", doc.dump(2) + "\n");
  std::cout << "report: " << (dir / "verify_report.json").string() << "\n";
  return rep.all_passed ? 0 : 1;
}

int run_sweep(const slab::RunConfig& rc) {
  const slab::PhaseGrid g = slab::build_grid(rc.grid);
  const slab::BoundaryData bdata = slab::make_boundary(g, rc.boundary, rc.params);
  const slab::Field f0 = slab::boundary_field(g, bdata);

  nlohmann::json rows = nlohmann::json::array();
  std::string csv = "epsilon,contraction_ratio,converged,iterations,fitted_rate\n";
  bool any_diverged = false;
  for (double eps : rc.eps_sweep) {
    slab::RunConfig rce = rc;
    rce.params.epsilon = eps;
    rce.solver.max_halvings = 0;  // a sweep point is meaningful only at its own eps

    const slab::ProposalParams prop = slab::proposal_from_field(f0);
    const slab::PsiResult pf = slab::apply_psi(f0, bdata, rce.params, rce.quad, prop);
    const slab::ContractionResult contr =
        slab::measure_contraction(f0, pf.psi, bdata, rce.params, rce.quad);
    const slab::PicardResult res =
        slab::picard_solve(g, bdata, rce.params, rce.quad, rce.solver);
    any_diverged = any_diverged || !res.converged;

    rows.push_back({{"epsilon", eps},
                    {"contraction_ratio", contr.ratio},
                    {"picard", picard_json(res)}});
    csv += csv_num(eps) + "," + csv_num(contr.ratio) + "," + (res.converged ? "1" : "0") + "," +
           std::to_string(res.iterations) + "," + csv_num(res.fitted_rate) + "\n";
    std::cout << "epsilon " << eps << ": contraction ratio " << contr.ratio << ", picard "
              << (res.converged ? "converged" : "DID NOT CONVERGE") << " in " << res.iterations
              << " iterations\n";
  }

  const std::filesystem::path dir(rc.output_dir);
  std::filesystem::create_directories(dir);
  nlohmann::json doc{{"config", slab::config_to_json(rc)}, {"sweep", rows}};
  write_text(dir / "sweep.json", doc.dump(2) + "\n");
  write_text(dir / "sweep.csv", csv);
  std::cout << "artifacts: " << (dir / "sweep.json").string() << ", "
            << (dir / "sweep.csv").string() << "\n";
  return any_diverged ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Stationary polyatomic slab solver and verification harness.\n"
      "Worker threads: set SLAB_THREADS (default 1; results are identical\n"
      "for any thread count)."};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> eps_list;
  std::string mutation = "none";

  app.add_option("-c,--config", config_path, "config file (key = value lines)");
  app.add_option("--seed", seed, "override quad.seed");
  app.add_option("-o,--out", out_dir, "override output.dir");
  app.add_option("--eps-list", eps_list, "override sweep.eps_list (comma separated)");
  app.add_option("--mutation", mutation, "inject a named implementation defect (testing only)")
      ->group("");  // hidden: not a user-facing knob

  CLI::App* solve = app.add_subcommand("solve", "run the fixed-point solver");
  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  CLI::App* sweep = app.add_subcommand("sweep", "contraction/convergence sweep over epsilon");

  CLI11_PARSE(app, argc, argv);

  try {
    slab::RunConfig rc;
    if (!config_path.empty()) rc = slab::load_config(config_path);
    if (seed) rc.quad.seed = *seed;
    if (out_dir) rc.output_dir = *out_dir;
    if (eps_list && !slab::apply_config_entry(rc, "sweep.eps_list", *eps_list))
      throw slab::ConfigError("cannot apply --eps-list");
    rc.params.mutation = slab::mutation_from_string(mutation);
    rc.validate();

    if (solve->parsed()) return run_solve(rc);
    if (verify->parsed()) return run_verify(rc);
    if (sweep->parsed()) return run_sweep(rc);
    return 2;  // unreachable: a subcommand is required
  } catch (const slab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
