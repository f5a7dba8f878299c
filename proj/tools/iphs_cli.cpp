// Command-line front end: simulate, plot, ports and audit.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "iphs/error.hpp"
#include "iphs/run.hpp"
#include "iphs/scenario.hpp"

namespace fs = std::filesystem;

namespace {

int report_error(const iphs::Error& e) {
  if (const auto* pe = dynamic_cast<const iphs::ParseError*>(&e); pe != nullptr && pe->line() > 0) {
    std::cerr << "error: line " << pe->line() << ": " << e.what() << "\n";
  } else {
    std::cerr << "error: " << e.what() << "\n";
  }
  return iphs::kExitInputError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving conduction-diffusion simulator with port and balance audits"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<std::string> scheme;
  std::optional<std::string> out;

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write trajectory, snapshots and summary");
  simulate->add_option("scenario", scenario_file, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--dt", dt, "Override the time step");
  simulate->add_option("--t-end", t_end, "Override the final time");
  simulate->add_option("--scheme", scheme, "implicit-midpoint | explicit-rk4");
  simulate->add_option("--out", out, std::string("Run directory (default: $") + iphs::kOutputRootEnv +
                                         "/<output.directory or name>)");

  std::string run_dir;
  auto* plot = app.add_subcommand("plot", "Write SVG line plots and PPM heat maps of a run");
  plot->add_option("run-dir", run_dir, "Run directory")->required();

  std::string audit_dir;
  auto* audit = app.add_subcommand("audit", "Recompute balances and residuals from a run's snapshots");
  audit->add_option("run-dir", audit_dir, "Run directory")->required();

  std::string matrices_file;
  std::string xi_file;
  std::optional<std::string> ports_out;
  auto* ports = app.add_subcommand("ports", "Synthesize boundary port matrices W_B, W_C");
  ports->add_option("matrices", matrices_file, "Structure matrices JSON")->required()->check(CLI::ExistingFile);
  ports->add_option("xi", xi_file, "Xi1/Xi2 JSON")->required();
  ports->add_option("--out", ports_out, "Output directory (default: $" + std::string(iphs::kOutputRootEnv) + "/ports)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      iphs::RunOverrides ov;
      ov.dt = dt;
      ov.t_end = t_end;
      if (scheme) {
        ov.scheme = iphs::parse_scheme(*scheme);
      }
      if (out) {
        ov.out = fs::path(*out);
      }
      const iphs::Scenario sc = iphs::apply_overrides(iphs::load_scenario(scenario_file), ov);
      const fs::path dir = iphs::run_directory(sc, ov, iphs::default_output_root());
      const iphs::RunSummary summary = iphs::run_scenario(sc, dir, std::cout);
      std::cout << "outputs in " << dir.string() << "\n";
      return iphs::exit_code(summary);
    }
    if (plot->parsed()) {
      iphs::plot_run(run_dir, std::cout);
      return iphs::kExitOk;
    }
    if (audit->parsed()) {
      const iphs::AuditResult r = iphs::audit_run(audit_dir, std::cout);
      return r.passed ? iphs::kExitOk : iphs::kExitToleranceFailed;
    }
    if (ports->parsed()) {
      const fs::path dir = ports_out ? fs::path(*ports_out) : iphs::default_output_root() / "ports";
      return iphs::ports_command(matrices_file, xi_file, dir, std::cout);
    }
  } catch (const iphs::Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return iphs::kExitInputError;
  }
  return iphs::kExitOk;
}
