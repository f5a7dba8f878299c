#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "iphs/dynamics.hpp"
#include "iphs/scenario.hpp"

namespace iphs {

/// Process exit codes shared by the command-line entry points.
enum ExitCode : int {
  kExitOk = 0,
  kExitToleranceFailed = 1,  // run finished but a configured check failed
  kExitInputError = 2,       // parse, validation or missing-file errors
  kExitRuntimeError = 3,     // step rejected or Newton failure mid-run
};

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "IPHS_OUTPUT_ROOT";

/// $IPHS_OUTPUT_ROOT if set and non-empty, "runs" otherwise.
std::filesystem::path default_output_root();

struct RunOverrides {
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<Scheme> scheme;
  std::optional<std::filesystem::path> out;  // run directory, used as given
};

/// Applies the overrides and validates the result.
Scenario apply_overrides(Scenario scenario, const RunOverrides& overrides);

/// Directory a scenario writes to: the override, else output.directory
/// (relative to `root`), else root / name.
std::filesystem::path run_directory(const Scenario& scenario, const RunOverrides& overrides,
                                    const std::filesystem::path& root);

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool upper_bound = true;  // value <= tolerance, else value >= tolerance
  bool passed = false;
};

struct RunSummary {
  std::string status;  // "completed" or "failed"
  std::string diagnostic;
  std::size_t steps = 0;
  double t_final = 0.0;
  double max_first_law_residual = 0.0;
  double max_second_law_residual = 0.0;
  double min_sigma = 0.0;
  std::vector<double> mass_drift;  // relative, per species
  bool insulated = false;
  double min_entropy_increment = 0.0;
  bool entropy_nondecreasing = true;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  bool passed = false;
};

/// Integrates the scenario and writes into `directory`:
///   scenario.json   effective scenario
///   trajectory.csv  time,H,S,boundary_power,entropy_production,
///                   first_law_residual,second_law_residual,min_sigma
///   ports.csv       boundary port powers per time level
///   snapshots/      step_<k>_{s,T,c<i>,mu<i>}.csv field snapshots
///   summary.json    residual maxima, checks and overall pass/fail
/// Rows are flushed as the run proceeds, so a failed run leaves its partial
/// outputs plus the diagnostic in summary.json.
RunSummary run_scenario(const Scenario& scenario, const std::filesystem::path& directory,
                        std::ostream& log);

/// Exit code for a finished summary.
int exit_code(const RunSummary& summary);

struct AuditResult {
  double max_first_law_residual = 0.0;
  double max_second_law_residual = 0.0;
  double min_sigma = 0.0;
  /// Largest difference between the stored trajectory rows and the
  /// balances recomputed from the stored snapshots.
  double snapshot_mismatch = 0.0;
  /// Largest difference between stored and recomputed residual columns.
  double residual_mismatch = 0.0;
  std::size_t snapshots_checked = 0;
  std::vector<Check> checks;
  bool passed = false;
};

/// Reloads a run directory, recomputes the balances of every snapshot and
/// the residual series, and writes audit.json next to the inputs.
AuditResult audit_run(const std::filesystem::path& directory, std::ostream& log);

/// Writes line plots (SVG) of H, S, port power and residuals and heat maps
/// (PPM) of the final T and mu_i into directory/plots. Returns the files.
std::vector<std::filesystem::path> plot_run(const std::filesystem::path& directory,
                                            std::ostream& log);

/// Reads structure matrices and (Xi1, Xi2) from JSON and writes W_B.csv,
/// W_C.csv and ports_report.json to `out`. Returns an exit code; invalid Xi
/// pairs print their residuals and return kExitInputError.
int ports_command(const std::filesystem::path& matrices_file, const std::filesystem::path& xi_file,
                  const std::filesystem::path& out, std::ostream& log);

/// Writes a dense matrix as plain CSV with 17 significant digits.
void write_matrix_csv(const Eigen::MatrixXd& A, const std::filesystem::path& path);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

}  // namespace iphs
