#include "iphs/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "iphs/error.hpp"
#include "iphs/ports.hpp"
#include "iphs/summation.hpp"

namespace iphs {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kTrajectoryHeader =
    "time,H,S,boundary_power,entropy_production,first_law_residual,second_law_residual,min_sigma";
constexpr const char* kPortsHeader = "time,energy_port_power,balance_power,entropy_boundary";

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << std::setprecision(17);
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Columns of a headed numeric CSV file.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error("column '" + name + "' not found");
    }
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    out.push_back(cell);
  }
  return out;
}

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("missing " + path.string());
  }
  Table t;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(path.string() + " is empty");
  }
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw Error(path.string() + ": ragged row");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      row.push_back(std::strtod(c.c_str(), nullptr));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string snapshot_name(std::size_t step, const std::string& field) {
  std::ostringstream os;
  os << "step_" << std::setw(6) << std::setfill('0') << step << "_" << field << ".csv";
  return os.str();
}

void write_snapshot(const MimeticGrid& grid, const ThermoState& state, const CoEnergyFields& coe,
                    const fs::path& dir, std::size_t step, std::ofstream& index) {
  write_snapshot_csv(grid, state.entropy_density, dir / snapshot_name(step, "s"));
  write_snapshot_csv(grid, coe.temperature, dir / snapshot_name(step, "T"));
  for (std::size_t i = 0; i < state.n_species(); ++i) {
    write_snapshot_csv(grid, state.concentrations[i], dir / snapshot_name(step, "c" + std::to_string(i)));
    write_snapshot_csv(grid, coe.chemical_potentials[i],
                       dir / snapshot_name(step, "mu" + std::to_string(i)));
  }
  index << step << "," << state.time << "\n";
  index.flush();
}

bool all_insulated(const BoundaryConditions& bc) {
  for (const auto& g : bc.groups) {
    if (g.thermal.kind != ThermalBcKind::Insulated) {
      return false;
    }
    for (const auto& s : g.species) {
      if (s.kind != SpeciesBcKind::ZeroFlux) {
        return false;
      }
    }
  }
  return true;
}

bool species_closed(const BoundaryConditions& bc, std::size_t i) {
  for (const auto& g : bc.groups) {
    if (i < g.species.size() && g.species[i].kind != SpeciesBcKind::ZeroFlux) {
      return false;
    }
  }
  return true;
}

Check make_check(std::string name, double value, double tolerance, bool upper) {
  Check c{std::move(name), value, tolerance, upper, false};
  c.passed = std::isfinite(value) && (upper ? value <= tolerance : value >= tolerance);
  return c;
}

ordered_json checks_json(const std::vector<Check>& checks) {
  ordered_json out = ordered_json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name},
                   {"value", c.value},
                   {"tolerance", c.tolerance},
                   {"bound", c.upper_bound ? "upper" : "lower"},
                   {"passed", c.passed}});
  }
  return out;
}

/// Incremental first/second-law residuals, identical in arithmetic to
/// audit_first_law / audit_second_law.
class ResidualTracker {
 public:
  void reset(const BalanceSample& s0) {
    first_ = s0;
    last_ = s0;
    energy_ = CompensatedSum();
    entropy_ = CompensatedSum();
  }
  std::pair<double, double> push(const BalanceSample& b) {
    const double dt = b.time - last_.time;
    energy_ += 0.5 * dt * (last_.boundary_power + b.boundary_power);
    entropy_ += 0.5 * dt *
                ((last_.entropy_production + last_.entropy_boundary) +
                 (b.entropy_production + b.entropy_boundary));
    last_ = b;
    return {(b.H - first_.H) - energy_.value(), (b.S - first_.S) - entropy_.value()};
  }

 private:
  BalanceSample first_;
  BalanceSample last_;
  CompensatedSum energy_;
  CompensatedSum entropy_;
};

void write_summary(const fs::path& dir, const Scenario& sc, const RunSummary& s) {
  ordered_json out;
  out["scenario"] = sc.name;
  out["status"] = s.status;
  out["diagnostic"] = s.diagnostic;
  out["scheme"] = scheme_name(sc.integrator.scheme);
  out["dt"] = sc.integrator.dt;
  out["steps"] = s.steps;
  out["t_final"] = s.t_final;
  out["max_first_law_residual"] = s.max_first_law_residual;
  out["max_second_law_residual"] = s.max_second_law_residual;
  out["min_sigma"] = s.min_sigma;
  out["mass_drift"] = s.mass_drift;
  out["insulated"] = s.insulated;
  out["min_entropy_increment"] = s.min_entropy_increment;
  out["entropy_nondecreasing"] = s.entropy_nondecreasing;
  out["checks"] = checks_json(s.checks);
  out["warnings"] = s.warnings;
  out["passed"] = s.passed;
  std::ofstream f = open_out(dir / "summary.json");
  f << out.dump(2) << "\n";
}

}  // namespace

fs::path default_output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  if (env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return fs::path("runs");
}

Scenario apply_overrides(Scenario scenario, const RunOverrides& overrides) {
  if (overrides.dt) {
    scenario.integrator.dt = *overrides.dt;
  }
  if (overrides.t_end) {
    scenario.integrator.t_end = *overrides.t_end;
  }
  if (overrides.scheme) {
    scenario.integrator.scheme = *overrides.scheme;
  }
  scenario.validate();
  return scenario;
}

fs::path run_directory(const Scenario& scenario, const RunOverrides& overrides,
                       const fs::path& root) {
  if (overrides.out) {
    return *overrides.out;
  }
  if (!scenario.output.directory.empty()) {
    const fs::path p(scenario.output.directory);
    return p.is_absolute() ? p : root / p;
  }
  return root / scenario.name;
}

int exit_code(const RunSummary& summary) {
  if (summary.status != "completed") {
    return kExitRuntimeError;
  }
  return summary.passed ? kExitOk : kExitToleranceFailed;
}

RunSummary run_scenario(const Scenario& scenario, const fs::path& directory, std::ostream& log) {
  scenario.validate();
  const fs::path snap_dir = directory / "snapshots";
  fs::create_directories(snap_dir);
  {
    std::ofstream f = open_out(directory / "scenario.json");
    f << serialize_scenario(scenario);
  }

  const Problem problem = scenario.problem();
  problem.validate();
  const MimeticGrid& grid = problem.grid;
  ThermoState state = scenario.initial_state();
  const std::size_t n = state.n_species();

  std::ofstream traj = open_out(directory / "trajectory.csv");
  std::ofstream ports = open_out(directory / "ports.csv");
  std::ofstream index = open_out(snap_dir / "index.csv");
  traj << kTrajectoryHeader << "\n";
  ports << kPortsHeader << "\n";
  index << "step,time\n";

  RunSummary summary;
  summary.insulated = all_insulated(scenario.bc);
  summary.min_sigma = std::numeric_limits<double>::infinity();
  summary.min_entropy_increment = std::numeric_limits<double>::infinity();
  summary.mass_drift.assign(n, 0.0);

  ResidualTracker tracker;
  BalanceSample first;
  BalanceSample previous;
  auto write_row = [&](const BalanceSample& b, double r1, double r2, double min_sigma) {
    traj << b.time << "," << b.H << "," << b.S << "," << b.boundary_power << ","
         << b.entropy_production << "," << r1 << "," << r2 << "," << min_sigma << "\n";
    ports << b.time << "," << b.trace_port_power << "," << b.boundary_power << ","
          << b.entropy_boundary << "\n";
    summary.max_first_law_residual = std::max(summary.max_first_law_residual, std::abs(r1));
    summary.max_second_law_residual = std::max(summary.max_second_law_residual, std::abs(r2));
    summary.min_sigma = std::min(summary.min_sigma, min_sigma);
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = std::max(std::abs(first.moles[i]), std::numeric_limits<double>::min());
      summary.mass_drift[i] =
          std::max(summary.mass_drift[i], std::abs(b.moles[i] - first.moles[i]) / scale);
    }
  };

  const std::size_t every = scenario.output.snapshot_every;
  std::size_t last_snapshot = 0;
  try {
    const Evaluation ev0 = evaluate(problem, state, state.time);
    first = balance_sample(problem, state, ev0);
    previous = first;
    tracker.reset(first);
    write_row(first, 0.0, 0.0, first.min_sigma);
    write_snapshot(grid, state, ev0.coe, snap_dir, 0, index);
    traj.flush();
    ports.flush();

    auto observer = [&](std::size_t k, const StepResult& r) {
      for (const auto& w : r.warnings) {
        log << "warning: step " << k << ": " << w << "\n";
        if (summary.warnings.size() < 20) {
          summary.warnings.push_back("step " + std::to_string(k) + ": " + w);
        }
      }
      for (const auto& b : r.samples) {
        const auto [r1, r2] = tracker.push(b);
        write_row(b, r1, r2, std::min(b.min_sigma, r.stage_min_sigma));
        summary.min_entropy_increment = std::min(summary.min_entropy_increment, b.S - previous.S);
        previous = b;
      }
      summary.steps = k;
      summary.t_final = r.state.time;
      const bool is_last = r.state.time >= scenario.integrator.t_end;
      if ((every > 0 && k % every == 0) || is_last) {
        write_snapshot(grid, r.state, co_energy(r.state, problem.model), snap_dir, k, index);
        last_snapshot = k;
      }
      traj.flush();
      ports.flush();
    };
    integrate(problem, state, scenario.integrator, observer);
    summary.status = "completed";
  } catch (const Error& e) {
    summary.status = "failed";
    std::ostringstream os;
    os << e.what() << " (at t = " << state.time << ", after " << summary.steps << " steps)";
    summary.diagnostic = os.str();
    log << "error: " << summary.diagnostic << "\n";
    if (summary.steps > 0 && last_snapshot != summary.steps) {
      try {
        write_snapshot(grid, state, co_energy(state, problem.model), snap_dir, summary.steps, index);
      } catch (const Error&) {
        // the last accepted state could not be evaluated; keep what exists
      }
    }
  }
  if (summary.steps == 0 && summary.status == "completed") {
    summary.t_final = state.time;
  }
  if (!std::isfinite(summary.min_sigma)) {
    summary.min_sigma = 0.0;
  }
  if (!std::isfinite(summary.min_entropy_increment)) {
    summary.min_entropy_increment = 0.0;
  }
  summary.entropy_nondecreasing =
      summary.min_entropy_increment >= scenario.tolerances.entropy_decrease;

  const Tolerances& tol = scenario.tolerances;
  summary.checks.push_back(
      make_check("first_law_residual", summary.max_first_law_residual, tol.first_law, true));
  summary.checks.push_back(
      make_check("second_law_residual", summary.max_second_law_residual, tol.second_law, true));
  summary.checks.push_back(make_check("min_sigma", summary.min_sigma, tol.min_sigma, false));
  for (std::size_t i = 0; i < n; ++i) {
    if (species_closed(scenario.bc, i)) {
      summary.checks.push_back(make_check("mass_drift_c" + std::to_string(i),
                                          summary.mass_drift[i], tol.mass_drift, true));
    }
  }
  if (summary.insulated) {
    summary.checks.push_back(make_check("entropy_increment", summary.min_entropy_increment,
                                        tol.entropy_decrease, false));
  }
  summary.passed = summary.status == "completed" &&
                   std::all_of(summary.checks.begin(), summary.checks.end(),
                               [](const Check& c) { return c.passed; });
  write_summary(directory, scenario, summary);

  log << scenario.name << ": " << summary.status << ", " << summary.steps << " steps, t = "
      << summary.t_final << "\n";
  for (const auto& c : summary.checks) {
    log << "  " << (c.passed ? "PASS" : "FAIL") << " " << c.name << " = " << c.value
        << (c.upper_bound ? " <= " : " >= ") << c.tolerance << "\n";
  }
  return summary;
}

AuditResult audit_run(const fs::path& directory, std::ostream& log) {
  if (!fs::exists(directory / "scenario.json")) {
    throw Error("no scenario.json in " + directory.string());
  }
  const Scenario scenario = load_scenario(directory / "scenario.json");
  const Problem problem = scenario.problem();
  const MimeticGrid& grid = problem.grid;
  const Table traj = read_table(directory / "trajectory.csv");
  const Table ports = read_table(directory / "ports.csv");
  const Table index = read_table(directory / "snapshots" / "index.csv");
  if (traj.rows.empty()) {
    throw Error("trajectory.csv has no rows");
  }
  if (ports.rows.size() != traj.rows.size()) {
    throw Error("ports.csv and trajectory.csv disagree on the number of rows");
  }

  const std::size_t c_time = traj.column("time");
  const std::size_t c_H = traj.column("H");
  const std::size_t c_S = traj.column("S");
  const std::size_t c_P = traj.column("boundary_power");
  const std::size_t c_sig = traj.column("entropy_production");
  const std::size_t c_r1 = traj.column("first_law_residual");
  const std::size_t c_r2 = traj.column("second_law_residual");
  const std::size_t c_min = traj.column("min_sigma");
  const std::size_t p_eb = ports.column("entropy_boundary");

  AuditResult result;
  Trajectory tr;
  for (std::size_t k = 0; k < traj.rows.size(); ++k) {
    BalanceSample b;
    b.time = traj.rows[k][c_time];
    b.H = traj.rows[k][c_H];
    b.S = traj.rows[k][c_S];
    b.boundary_power = traj.rows[k][c_P];
    b.entropy_production = traj.rows[k][c_sig];
    b.entropy_boundary = ports.rows[k][p_eb];
    b.min_sigma = traj.rows[k][c_min];
    tr.samples.push_back(b);
  }
  const ResidualSeries first = audit_first_law(tr);
  const ResidualSeries second = audit_second_law(tr);
  result.max_first_law_residual = first.max_abs;
  result.max_second_law_residual = second.max_abs;
  result.min_sigma = second.min_sigma;
  double scale_H = 0.0;
  double scale_S = 0.0;
  for (std::size_t k = 0; k < traj.rows.size(); ++k) {
    scale_H = std::max(scale_H, std::abs(traj.rows[k][c_H]));
    scale_S = std::max(scale_S, std::abs(traj.rows[k][c_S]));
    result.residual_mismatch =
        std::max({result.residual_mismatch, std::abs(first.residual[k] - traj.rows[k][c_r1]),
                  std::abs(second.residual[k] - traj.rows[k][c_r2])});
  }

  // Recompute every snapshot's balances from its stored extensive fields.
  const std::size_t i_step = index.column("step");
  const std::size_t i_time = index.column("time");
  const std::size_t n = scenario.model.n_species();
  for (const auto& row : index.rows) {
    const auto step = static_cast<std::size_t>(row[i_step]);
    const double time = row[i_time];
    const fs::path dir = directory / "snapshots";
    ThermoState s;
    s.time = time;
    s.entropy_density = read_snapshot_csv(grid, dir / snapshot_name(step, "s"));
    for (std::size_t i = 0; i < n; ++i) {
      s.concentrations.push_back(
          read_snapshot_csv(grid, dir / snapshot_name(step, "c" + std::to_string(i))));
    }
    const BalanceSample b = balance_sample(problem, s, evaluate(problem, s, time));
    const auto it = std::find_if(traj.rows.begin(), traj.rows.end(),
                                 [&](const auto& r) { return r[c_time] == time; });
    if (it == traj.rows.end()) {
      throw Error("snapshot time " + std::to_string(time) + " has no trajectory row");
    }
    const double dH = std::abs(b.H - (*it)[c_H]) / std::max(1.0, scale_H);
    const double dS = std::abs(b.S - (*it)[c_S]) / std::max(1.0, scale_S);
    const double dP = std::abs(b.boundary_power - (*it)[c_P]) / std::max(1.0, std::abs(b.boundary_power));
    const double dG =
        std::abs(b.entropy_production - (*it)[c_sig]) / std::max(1.0, std::abs(b.entropy_production));
    result.snapshot_mismatch = std::max({result.snapshot_mismatch, dH, dS, dP, dG});
    ++result.snapshots_checked;
  }

  const Tolerances& tol = scenario.tolerances;
  result.checks.push_back(
      make_check("first_law_residual", result.max_first_law_residual, tol.first_law, true));
  result.checks.push_back(
      make_check("second_law_residual", result.max_second_law_residual, tol.second_law, true));
  result.checks.push_back(make_check("min_sigma", result.min_sigma, tol.min_sigma, false));
  result.checks.push_back(make_check("snapshot_consistency", result.snapshot_mismatch, 1e-12, true));
  result.checks.push_back(make_check("residual_consistency", result.residual_mismatch,
                                     1e-12 * std::max({1.0, scale_H, scale_S}), true));
  result.passed = std::all_of(result.checks.begin(), result.checks.end(),
                              [](const Check& c) { return c.passed; });

  ordered_json out;
  out["scenario"] = scenario.name;
  out["rows"] = traj.rows.size();
  out["snapshots_checked"] = result.snapshots_checked;
  out["max_first_law_residual"] = result.max_first_law_residual;
  out["max_second_law_residual"] = result.max_second_law_residual;
  out["min_sigma"] = result.min_sigma;
  out["snapshot_mismatch"] = result.snapshot_mismatch;
  out["residual_mismatch"] = result.residual_mismatch;
  out["checks"] = checks_json(result.checks);
  out["passed"] = result.passed;
  {
    std::ofstream f = open_out(directory / "audit.json");
    f << out.dump(2) << "\n";
  }
  log << "audit " << directory.string() << ": " << traj.rows.size() << " rows, "
      << result.snapshots_checked << " snapshots\n";
  for (const auto& c : result.checks) {
    log << "  " << (c.passed ? "PASS" : "FAIL") << " " << c.name << " = " << c.value
        << (c.upper_bound ? " <= " : " >= ") << c.tolerance << "\n";
  }
  return result;
}

// Ports command ---------------------------------------------------------------

namespace {

Eigen::MatrixXd parse_matrix(const json& v, const std::string& name) {
  if (!v.is_array()) {
    throw ParseError("field '" + name + "': expected an array of rows", 0);
  }
  if (v.empty()) {
    return Eigen::MatrixXd(0, 0);
  }
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!v[r].is_array() || (r > 0 && v[r].size() != cols)) {
      throw ParseError("field '" + name + "': rows must be arrays of equal length", 0);
    }
    cols = v[r].size();
  }
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!v[r][c].is_number()) {
        throw ParseError("field '" + name + "[" + std::to_string(r) + "][" + std::to_string(c) +
                             "]': expected a number",
                         0);
      }
      A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r][c].get<double>();
    }
  }
  return A;
}

json parse_json_file(const fs::path& path) {
  const std::string text = slurp(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t k = 0; k < e.byte && k < text.size(); ++k) {
      line += text[k] == '\n' ? 1 : 0;
    }
    throw ParseError(path.string() + ": " + e.what(), line);
  }
}

ordered_json matrix_json(const Eigen::MatrixXd& A) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
      row.push_back(A(r, c));
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace

void write_matrix_csv(const Eigen::MatrixXd& A, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
      out << (c == 0 ? "" : ",") << A(r, c);
    }
    out << "\n";
  }
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot read " + path.string());
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      row.push_back(std::strtod(cell.c_str(), nullptr));
    }
    rows.push_back(std::move(row));
  }
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size());
  Eigen::MatrixXd A(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != c) {
      throw Error(path.string() + ": ragged row");
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      A(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return A;
}

int ports_command(const fs::path& matrices_file, const fs::path& xi_file, const fs::path& out,
                  std::ostream& log) {
  const json mj = parse_json_file(matrices_file);
  if (!mj.is_object()) {
    throw ParseError(matrices_file.string() + ": expected a JSON object", 1);
  }
  Eigen::MatrixXd Pe;
  double scale = kDefinitionScale;
  if (mj.contains("scale")) {
    if (!mj["scale"].is_number()) {
      throw ParseError("field 'scale': expected a number", 0);
    }
    scale = mj["scale"].get<double>();
  }
  if (mj.contains("Pe")) {
    Pe = parse_matrix(mj["Pe"], "Pe");
    if (Pe.rows() != Pe.cols() || (Pe - Pe.transpose()).cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, Pe.cwiseAbs().maxCoeff())) {
      throw ValidationError("Pe must be square and symmetric");
    }
  } else {
    StructureMatrices1D sm;
    for (const char* key : {"P0", "P1", "G0", "G1", "g_s"}) {
      if (!mj.contains(key)) {
        throw ParseError(std::string("field '") + key + "': missing", 0);
      }
    }
    sm.P0 = parse_matrix(mj["P0"], "P0");
    sm.P1 = parse_matrix(mj["P1"], "P1");
    sm.G0 = parse_matrix(mj["G0"], "G0");
    sm.G1 = parse_matrix(mj["G1"], "G1");
    if (!mj["g_s"].is_number()) {
      throw ParseError("field 'g_s': expected a number", 0);
    }
    sm.g_s = mj["g_s"].get<double>();
    Pe = build_Pe(sm, scale);
  }

  fs::create_directories(out);
  ordered_json report;
  report["Pe"] = matrix_json(Pe);
  report["scale"] = scale;

  const ColumnBasis basis = column_basis(Pe);
  report["rank"] = basis.rank;
  report["basis_columns"] = basis.columns;
  if (basis.rank == 0) {
    report["status"] = "rank 0: P_e vanishes, no boundary ports";
    write_matrix_csv(Eigen::MatrixXd(0, 2 * Pe.rows()), out / "W_B.csv");
    write_matrix_csv(Eigen::MatrixXd(0, 2 * Pe.rows()), out / "W_C.csv");
    std::ofstream f = open_out(out / "ports_report.json");
    f << report.dump(2) << "\n";
    log << "rank 0: P_e vanishes, no boundary ports\n";
    return kExitOk;
  }

  const json xj = parse_json_file(xi_file);
  if (!xj.is_object() || !xj.contains("Xi1") || !xj.contains("Xi2")) {
    throw ParseError(xi_file.string() + ": expected an object with Xi1 and Xi2", 0);
  }
  const Eigen::MatrixXd Xi1 = parse_matrix(xj["Xi1"], "Xi1");
  const Eigen::MatrixXd Xi2 = parse_matrix(xj["Xi2"], "Xi2");
  try {
    const PortSynthesis ps = synthesize_ports(Pe, Xi1, Xi2);
    write_matrix_csv(ps.W_B, out / "W_B.csv");
    write_matrix_csv(ps.W_C, out / "W_C.csv");
    report["status"] = "ok";
    report["M"] = matrix_json(ps.M);
    report["Pe_projected"] = matrix_json(ps.Pep);
    report["xi_residuals"] = {{"skew", ps.xi.skew}, {"unit", ps.xi.unit}};
    report["W_B"] = matrix_json(ps.W_B);
    report["W_C"] = matrix_json(ps.W_C);
    std::ofstream f = open_out(out / "ports_report.json");
    f << report.dump(2) << "\n";
    log << "rank " << ps.rank << ", Xi residuals skew " << ps.xi.skew << ", unit " << ps.xi.unit
        << "\nwrote " << (out / "W_B.csv").string() << " and " << (out / "W_C.csv").string()
        << "\n";
    return kExitOk;
  } catch (const XiError& e) {
    report["status"] = "rejected";
    report["xi_residuals"] = {{"skew", e.residuals().skew}, {"unit", e.residuals().unit}};
    std::ofstream f = open_out(out / "ports_report.json");
    f << report.dump(2) << "\n";
    log << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace iphs
