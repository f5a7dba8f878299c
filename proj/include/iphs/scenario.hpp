#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iphs/constitutive.hpp"
#include "iphs/dynamics.hpp"
#include "iphs/mesh.hpp"

namespace iphs {

struct GridSpec {
  int dim = 1;
  std::array<std::size_t, 2> cells{16, 1};
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{1.0, 1.0};

  MimeticGrid build() const;
  bool operator==(const GridSpec&) const = default;
};

enum class ProfileKind { Uniform, Gaussian, Step };

/// Initial field shape, evaluated at cell centres.
///   uniform:  base
///   gaussian: base + amplitude exp(-|x - center|^2 / (2 width^2))
///   step:     base for x[axis] < position, base + amplitude otherwise
struct ProfileSpec {
  ProfileKind kind = ProfileKind::Uniform;
  double base = 0.0;
  double amplitude = 0.0;
  std::array<double, 2> center{0.5, 0.5};
  double width = 0.1;
  int axis = 0;
  double position = 0.5;

  double operator()(const std::array<double, 2>& x) const;
  bool operator==(const ProfileSpec&) const = default;
};

/// Seeded uniform perturbation in [-amplitude, amplitude] added to every
/// initial field; amplitude 0 disables it.
struct NoiseSpec {
  double amplitude = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const NoiseSpec&) const = default;
};

/// Pass/fail thresholds of a run. Defaults:
///   first_law        1e-8   max |H(t) - H(0) - int P|
///   second_law       1e-8   max |S(t) - S(0) - int (sigma + boundary flow)|
///   min_sigma       -1e-14  pointwise production at every stage
///   mass_drift       1e-12  relative drift of each species total (zero-flux runs)
///   entropy_decrease -1e-12 smallest allowed S increment (insulated runs)
struct Tolerances {
  double first_law = 1e-8;
  double second_law = 1e-8;
  double min_sigma = -1e-14;
  double mass_drift = 1e-12;
  double entropy_decrease = -1e-12;

  bool operator==(const Tolerances&) const = default;
};

struct OutputSpec {
  /// Field snapshots every this many steps (0: initial and final only). The
  /// final state is always written.
  std::size_t snapshot_every = 0;
  /// Output directory; relative paths resolve against the output root.
  std::string directory;

  bool operator==(const OutputSpec&) const = default;
};

struct Scenario {
  std::string name;
  GridSpec grid;
  ConstitutiveModel model;
  ProfileSpec temperature{ProfileKind::Uniform, 1.0};
  std::vector<ProfileSpec> concentrations;  // one per species
  NoiseSpec noise;
  BoundaryConditions bc;  // one entry per boundary group
  TimeIntegrator integrator;
  OutputSpec output;
  Tolerances tolerances;

  /// Checks species counts, BC coverage and numeric ranges.
  void validate() const;

  Problem problem() const;
  ThermoState initial_state() const;

  bool operator==(const Scenario&) const = default;
};

/// Parses the JSON scenario text. ParseError carries the line of a syntax
/// error or the path of a malformed field; ValidationError reports
/// semantic problems such as a boundary group without conditions.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical JSON text with every field spelled out.
std::string serialize_scenario(const Scenario& scenario);

std::string thermal_kind_name(ThermalBcKind kind);
std::string species_kind_name(SpeciesBcKind kind);
std::string profile_kind_name(ProfileKind kind);

}  // namespace iphs
