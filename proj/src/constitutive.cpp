#include "iphs/constitutive.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "iphs/error.hpp"

namespace iphs {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_finite(const CellField& f, const char* name) {
  for (std::size_t c = 0; c < f.size(); ++c) {
    if (!std::isfinite(f[c])) {
      std::ostringstream os;
      os << name << " is not finite at cell " << c;
      throw InvalidStateError(os.str());
    }
  }
}

}  // namespace

void ConstitutiveModel::validate() const {
  if (!positive_finite(c_v)) throw ValidationError("c_v must be positive");
  if (!positive_finite(T_ref)) throw ValidationError("T_ref must be positive");
  if (!positive_finite(lambda)) throw ValidationError("lambda must be positive");
  if (alpha.size() != d.size()) {
    throw ValidationError("alpha and d must have one entry per species");
  }
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!positive_finite(alpha[i])) throw ValidationError("alpha must be positive");
    if (!positive_finite(d[i])) throw ValidationError("d must be positive");
  }
}

double ConstitutiveModel::temperature(double s) const { return T_ref * std::exp(s / c_v); }

double ConstitutiveModel::entropy_for_temperature(double T) const {
  if (!positive_finite(T)) {
    throw ConstitutiveError("temperature must be positive");
  }
  return c_v * std::log(T / T_ref);
}

void validate_state(const ThermoState& state, const ConstitutiveModel& model,
                    const MimeticGrid& grid) {
  if (state.n_species() != model.n_species()) {
    throw DimensionError("state and model disagree on the number of species");
  }
  if (state.entropy_density.size() != grid.num_cells()) {
    throw DimensionError("entropy density does not match the grid");
  }
  for (const auto& c : state.concentrations) {
    if (c.size() != grid.num_cells()) {
      throw DimensionError("concentration field does not match the grid");
    }
    require_finite(c, "concentration");
  }
  require_finite(state.entropy_density, "entropy density");
}

CellField energy_density(const ThermoState& state, const ConstitutiveModel& model) {
  if (state.n_species() != model.n_species()) {
    throw DimensionError("state and model disagree on the number of species");
  }
  require_finite(state.entropy_density, "entropy density");
  const std::size_t n = state.entropy_density.size();
  CellField u(n);
  for (std::size_t c = 0; c < n; ++c) {
    double species = 0.0;
    for (std::size_t i = 0; i < state.n_species(); ++i) {
      const double ci = state.concentrations[i][c];
      if (!std::isfinite(ci)) {
        throw InvalidStateError("concentration is not finite");
      }
      species += 0.5 * model.alpha[i] * ci * ci;
    }
    u[c] = species + model.c_v * model.temperature(state.entropy_density[c]);
  }
  return u;
}

CoEnergyFields co_energy(const ThermoState& state, const ConstitutiveModel& model) {
  if (state.n_species() != model.n_species()) {
    throw DimensionError("state and model disagree on the number of species");
  }
  const std::size_t n = state.entropy_density.size();
  CoEnergyFields e;
  e.temperature = CellField(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double T = model.temperature(state.entropy_density[c]);
    if (!std::isfinite(T) || !(T > 0.0)) {
      std::ostringstream os;
      os << "temperature saturated at cell " << c << " (s = " << state.entropy_density[c] << ")";
      throw SaturationError(os.str(), c);
    }
    e.temperature[c] = T;
  }
  e.chemical_potentials.reserve(state.n_species());
  for (std::size_t i = 0; i < state.n_species(); ++i) {
    CellField mu(n);
    for (std::size_t c = 0; c < n; ++c) {
      mu[c] = model.alpha[i] * state.concentrations[i][c];
    }
    e.chemical_potentials.push_back(std::move(mu));
  }
  return e;
}

double total_energy(const ThermoState& state, const ConstitutiveModel& model,
                    const MimeticGrid& grid) {
  return cell_integral(grid, energy_density(state, model));
}

double total_entropy(const ThermoState& state, const MimeticGrid& grid) {
  return cell_integral(grid, state.entropy_density);
}

double total_moles(const ThermoState& state, std::size_t species, const MimeticGrid& grid) {
  return cell_integral(grid, state.concentrations.at(species));
}

}  // namespace iphs
