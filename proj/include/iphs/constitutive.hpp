#pragma once

#include <cstddef>
#include <vector>

#include "iphs/mesh.hpp"

namespace iphs {

/// Decoupled energy density
///   u(c, s) = sum_i (alpha_i / 2) c_i^2 + c_v T_ref exp(s / c_v)
/// with Fourier conduction (lambda) and Fick diffusion (d_i) coefficients.
/// The exponential thermal part keeps T = du/ds > 0 for every finite s.
struct ConstitutiveModel {
  double c_v = 1.0;
  double T_ref = 1.0;
  double lambda = 1.0;
  std::vector<double> alpha;  // per species, J mol^-2 m^N
  std::vector<double> d;      // per species diffusivity

  std::size_t n_species() const noexcept { return alpha.size(); }

  /// Throws ValidationError unless every coefficient is finite and positive
  /// and alpha/d have the same length.
  void validate() const;

  double temperature(double s) const;
  /// Inverse of temperature(): entropy density giving temperature T > 0.
  double entropy_for_temperature(double T) const;

  bool operator==(const ConstitutiveModel&) const = default;
};

/// Extensive state x = [c_1 .. c_n, s] on the cells of a grid.
struct ThermoState {
  std::vector<CellField> concentrations;
  CellField entropy_density;
  double time = 0.0;

  std::size_t n_species() const noexcept { return concentrations.size(); }
};

/// Co-energy variables e = [mu_1 .. mu_n, T].
struct CoEnergyFields {
  CellField temperature;
  std::vector<CellField> chemical_potentials;

  std::size_t n_species() const noexcept { return chemical_potentials.size(); }
};

/// Checks field sizes against the grid and model, and finiteness.
void validate_state(const ThermoState& state, const ConstitutiveModel& model,
                    const MimeticGrid& grid);

CellField energy_density(const ThermoState& state, const ConstitutiveModel& model);

/// T = T_ref exp(s/c_v), mu_i = alpha_i c_i. SaturationError on overflow.
CoEnergyFields co_energy(const ThermoState& state, const ConstitutiveModel& model);

double total_energy(const ThermoState& state, const ConstitutiveModel& model,
                    const MimeticGrid& grid);
double total_entropy(const ThermoState& state, const MimeticGrid& grid);
double total_moles(const ThermoState& state, std::size_t species, const MimeticGrid& grid);

}  // namespace iphs
