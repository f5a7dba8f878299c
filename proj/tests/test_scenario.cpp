#include <filesystem>
#include <string>

#include <doctest.h>

#include "iphs/error.hpp"
#include "iphs/scenario.hpp"

using namespace iphs;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "name": "mini",
  "grid": {"dim": 1, "cells": [8], "lower": [0.0], "upper": [1.0]},
  "model": {"c_v": 1.0, "T_ref": 1.0, "lambda": 0.1, "species": [{"alpha": 1.0, "d": 0.1}]},
  "initial": {
    "temperature": {"profile": "uniform", "base": 1.0},
    "concentrations": [{"profile": "step", "base": 1.0, "amplitude": 0.5, "position": 0.5}]
  },
  "boundary": {
    "left": {"thermal": {"kind": "dirichlet_T", "value": [[0.0, 1.0], [1.0, 2.0]]}},
    "right": {"thermal": {"kind": "insulated"},
              "species": [{"index": 0, "kind": "dirichlet_mu", "value": 0.5}]}
  },
  "integrator": {"scheme": "implicit-midpoint", "dt": 0.1, "t_end": 1.0}
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("parsing a minimal scenario") {
  const Scenario sc = parse_scenario(kMinimal);
  CHECK(sc.name == "mini");
  CHECK(sc.grid.cells[0] == 8);
  CHECK(sc.model.n_species() == 1);
  CHECK(sc.bc.groups.size() == 2);
  CHECK(sc.bc.groups[0].thermal.kind == ThermalBcKind::Temperature);
  CHECK(sc.bc.groups[0].thermal.value(0.5) == 1.5);
  CHECK(sc.bc.groups[1].species[0].kind == SpeciesBcKind::Potential);
  CHECK(sc.bc.groups[0].species[0].kind == SpeciesBcKind::ZeroFlux);
  CHECK(sc.tolerances == Tolerances{});
  const ThermoState s = sc.initial_state();
  CHECK(s.concentrations[0][0] == 1.0);
  CHECK(s.concentrations[0][7] == 1.5);
  CHECK(s.entropy_density[3] == 0.0);
}

TEST_CASE("serializer and parser are inverse") {
  const Scenario sc = parse_scenario(kMinimal);
  const std::string text = serialize_scenario(sc);
  CHECK(parse_scenario(text) == sc);
  CHECK(serialize_scenario(parse_scenario(text)) == text);

  std::size_t bundled = 0;
  for (const auto& entry : fs::directory_iterator(IPHS_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") {
      continue;
    }
    CAPTURE(entry.path().string());
    const Scenario b = load_scenario(entry.path());
    CHECK_NOTHROW(b.validate());
    CHECK(parse_scenario(serialize_scenario(b)) == b);
    ++bundled;
  }
  CHECK(bundled >= 5);
}

TEST_CASE("syntax errors carry a line number") {
  const std::string broken = replace(kMinimal, "\"lambda\": 0.1,", "\"lambda\": 0.1,,");
  try {
    (void)parse_scenario(broken);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("field errors name the field") {
  const std::string bad = replace(kMinimal, "\"dt\": 0.1", "\"dt\": \"fast\"");
  try {
    (void)parse_scenario(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("integrator.dt") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario(replace(kMinimal, "\"kind\": \"insulated\"", "\"kind\": \"adiabatic\"")),
                  ParseError);
  CHECK_THROWS_AS(parse_scenario(replace(kMinimal, "\"profile\": \"uniform\"", "\"profile\": \"ramp\"")),
                  ParseError);
}

TEST_CASE("missing boundary group is named") {
  const std::string text = replace(kMinimal, "\"left\": {\"thermal\": {\"kind\": \"dirichlet_T\", \"value\": [[0.0, 1.0], [1.0, 2.0]]}},", "");
  try {
    (void)parse_scenario(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("'left'") != std::string::npos);
  }
}

TEST_CASE("semantic validation") {
  CHECK_THROWS_AS(parse_scenario(replace(kMinimal, "\"index\": 0", "\"index\": 3")), ValidationError);
  CHECK_THROWS_AS(parse_scenario(replace(kMinimal, "\"right\":", "\"top\": {\"thermal\": {\"kind\": \"insulated\"}}, \"right\":")),
                  ParseError);
  CHECK_THROWS_AS(parse_scenario(replace(kMinimal, "\"lambda\": 0.1", "\"lambda\": -0.1")), ValidationError);
  CHECK_THROWS_AS(parse_scenario(replace(kMinimal, "\"cells\": [8]", "\"cells\": [1]")), ValidationError);
}

TEST_CASE("noise is seeded") {
  const std::string noisy = replace(kMinimal, "\"concentrations\"",
                                    "\"noise\": {\"amplitude\": 0.01, \"seed\": 5}, \"concentrations\"");
  const Scenario a = parse_scenario(noisy);
  const ThermoState s1 = a.initial_state();
  const ThermoState s2 = a.initial_state();
  CHECK(s1.entropy_density == s2.entropy_density);
  CHECK(s1.entropy_density != parse_scenario(kMinimal).initial_state().entropy_density);
  Scenario b = a;
  b.noise.seed = 6;
  CHECK(b.initial_state().entropy_density != s1.entropy_density);
}

}
