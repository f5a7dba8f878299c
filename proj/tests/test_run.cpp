#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <doctest.h>

#include "iphs/error.hpp"
#include "iphs/run.hpp"

using namespace iphs;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("iphs_test_" + name);
  fs::remove_all(dir);
  return dir;
}

Scenario bundled(const std::string& name) {
  return load_scenario(fs::path(IPHS_SCENARIO_DIR) / (name + ".json"));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

// Largest absolute value of the named trajectory column.
double column_max_abs(const fs::path& csv, const std::string& column) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::size_t index = 0;
  {
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      if (cell == column) {
        index = k;
      }
      ++k;
    }
  }
  double m = 0.0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t k = 0; std::getline(ss, cell, ','); ++k) {
      if (k == index) {
        m = std::max(m, std::abs(std::stod(cell)));
      }
    }
  }
  return m;
}

}  // namespace

TEST_SUITE("run") {

TEST_CASE("insulated heat scenario meets its tolerances") {
  const fs::path dir = fresh_dir("heat1d_insulated");
  std::ostringstream log;
  const RunSummary s = run_scenario(bundled("heat1d_insulated"), dir, log);
  CHECK(s.status == "completed");
  CHECK(exit_code(s) == kExitOk);
  CHECK(s.max_first_law_residual <= 1e-8);
  CHECK(s.insulated);
  CHECK(s.entropy_nondecreasing);
  for (const char* f : {"scenario.json", "trajectory.csv", "ports.csv", "summary.json",
                        "snapshots/index.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK(slurp(dir / "trajectory.csv").rfind(
            "time,H,S,boundary_power,entropy_production,first_law_residual,second_law_residual,min_sigma\n", 0) == 0);

  SUBCASE("audit recomputes the same balances") {
    const AuditResult a = audit_run(dir, log);
    CHECK(a.passed);
    CHECK(a.snapshots_checked >= 2);
    CHECK(a.snapshot_mismatch <= 1e-12);
    CHECK(a.max_first_law_residual == s.max_first_law_residual);
    CHECK(fs::exists(dir / "audit.json"));
  }
  SUBCASE("plots are written") {
    const auto files = plot_run(dir, log);
    CHECK(files.size() >= 5);
    for (const auto& f : files) {
      CHECK(fs::file_size(f) > 0);
    }
    CHECK(log.str().find("(nondecreasing)") != std::string::npos);
  }
}

TEST_CASE("equilibrium scenario keeps every residual at rounding level") {
  const fs::path dir = fresh_dir("equilibrium2d");
  std::ostringstream log;
  const RunSummary s = run_scenario(bundled("equilibrium2d"), dir, log);
  CHECK(s.passed);
  for (const char* col : {"boundary_power", "entropy_production", "first_law_residual",
                          "second_law_residual", "min_sigma"}) {
    CAPTURE(col);
    CHECK(column_max_abs(dir / "trajectory.csv", col) <= 1e-13);
  }
}

TEST_CASE("repeated runs are bitwise identical") {
  const Scenario sc = bundled("multispecies2d");
  std::ostringstream log;
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  (void)run_scenario(sc, a, log);
  (void)run_scenario(sc, b, log);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "ports.csv") == slurp(b / "ports.csv"));
}

TEST_CASE("failed runs keep partial outputs") {
  Scenario sc = bundled("heat1d_driven");
  sc.bc.groups[0].thermal.value = Signal({{0.0, 1.0}, {0.2, 1.0}, {0.3, -1.0}});
  const fs::path dir = fresh_dir("failed");
  std::ostringstream log;
  const RunSummary s = run_scenario(sc, dir, log);
  CHECK(s.status == "failed");
  CHECK(!s.diagnostic.empty());
  CHECK(exit_code(s) == kExitRuntimeError);
  CHECK(s.steps > 0);
  CHECK(slurp(dir / "summary.json").find("\"failed\"") != std::string::npos);
}

TEST_CASE("tolerance failures change the exit code") {
  Scenario sc = bundled("heat1d_driven");
  sc.tolerances.first_law = 1e-20;
  std::ostringstream log;
  const RunSummary s = run_scenario(sc, fresh_dir("tight"), log);
  CHECK(s.status == "completed");
  CHECK_FALSE(s.passed);
  CHECK(exit_code(s) == kExitToleranceFailed);
}

TEST_CASE("plotting an empty directory fails") {
  const fs::path dir = fresh_dir("empty");
  fs::create_directories(dir);
  std::ostringstream log;
  CHECK_THROWS_AS(plot_run(dir, log), Error);
}

TEST_CASE("overrides and output locations") {
  Scenario sc = bundled("heat1d_driven");
  RunOverrides ov;
  ov.dt = 0.01;
  ov.scheme = Scheme::ExplicitRk4;
  const Scenario changed = apply_overrides(sc, ov);
  CHECK(changed.integrator.dt == 0.01);
  CHECK(changed.integrator.scheme == Scheme::ExplicitRk4);
  CHECK(run_directory(sc, {}, "root") == fs::path("root") / "heat1d_driven");
  sc.output.directory = "elsewhere";
  CHECK(run_directory(sc, {}, "root") == fs::path("root") / "elsewhere");
  ov.out = fs::path("/tmp/x");
  CHECK(run_directory(sc, ov, "root") == fs::path("/tmp/x"));
  ov = {};
  ov.dt = -1.0;
  CHECK_THROWS_AS(apply_overrides(sc, ov), ValidationError);

  ::setenv(kOutputRootEnv, "/tmp/iphs_root", 1);
  CHECK(default_output_root() == fs::path("/tmp/iphs_root"));
  ::unsetenv(kOutputRootEnv);
  CHECK(default_output_root() == fs::path("runs"));
}

TEST_CASE("ports command") {
  const fs::path dir = fresh_dir("ports");
  const double r = 0.7071067811865476;
  std::ostringstream heat;
  heat << R"({"P0": [[0.0]], "P1": [[0.0]], "G0": [[0.0]], "G1": [[0.0]], "g_s": 1.0})";
  write(dir / "heat.json", heat.str());
  std::ostringstream xi;
  xi << std::setprecision(17) << "{\"Xi1\": [[" << r << ", 0.0], [" << r << ", 0.0]], \"Xi2\": [[0.0, " << r << "], [0.0, " << -r
     << "]]}";
  write(dir / "xi.json", xi.str());
  std::ostringstream log;

  SUBCASE("heat case") {
    CHECK(ports_command(dir / "heat.json", dir / "xi.json", dir / "out", log) == kExitOk);
    const Eigen::MatrixXd WB = read_matrix_csv(dir / "out" / "W_B.csv");
    REQUIRE(WB.rows() == 2);
    REQUIRE(WB.cols() == 8);
    // v = [r_s T at b; -(r_s T at a)]: picks coordinate 3 of e_b and of e_a.
    CHECK(WB(0, 3) == doctest::Approx(1.0));
    CHECK(WB(1, 7) == doctest::Approx(-1.0));
    CHECK(fs::exists(dir / "out" / "ports_report.json"));
  }
  SUBCASE("invalid Xi") {
    write(dir / "bad.json", "{\"Xi1\": [[1, 0], [0, 1]], \"Xi2\": [[1, 0], [0, 1]]}");
    CHECK(ports_command(dir / "heat.json", dir / "bad.json", dir / "bad", log) == kExitInputError);
    CHECK(log.str().find("Xi") != std::string::npos);
  }
  SUBCASE("zero matrices") {
    write(dir / "zero.json", R"({"P0": [[0]], "P1": [[0]], "G0": [[0]], "G1": [[0]], "g_s": 0})");
    CHECK(ports_command(dir / "zero.json", dir / "missing.json", dir / "zero", log) == kExitOk);
    CHECK(slurp(dir / "zero" / "ports_report.json").find("\"rank\": 0") != std::string::npos);
  }
}

TEST_CASE("matrix CSV round trip") {
  const fs::path dir = fresh_dir("csv");
  fs::create_directories(dir);
  Eigen::MatrixXd A{{1.0 / 3.0, -2.0}, {1e-300, 7.25}};
  write_matrix_csv(A, dir / "a.csv");
  CHECK(read_matrix_csv(dir / "a.csv") == A);
}

}
