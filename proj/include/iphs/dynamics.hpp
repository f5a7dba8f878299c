#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "iphs/constitutive.hpp"
#include "iphs/mesh.hpp"
#include "iphs/operators.hpp"
#include "iphs/ports.hpp"

namespace iphs {

/// Piecewise-linear function of time given by (t, value) knots, held
/// constant outside the table. An empty table is the zero signal.
class Signal {
 public:
  Signal() = default;
  explicit Signal(std::vector<std::pair<double, double>> knots);
  static Signal constant(double value);

  double operator()(double t) const;
  const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }
  bool is_constant() const noexcept { return knots_.size() <= 1; }

  bool operator==(const Signal&) const = default;

 private:
  std::vector<std::pair<double, double>> knots_;
};

enum class ThermalBcKind {
  Insulated,    // T_bc = T_cell, no heat flux
  Temperature,  // T_bc = value(t)
  HeatFlux,     // incoming heat flux value(t); T_bc = T_cell + q h / (2 lambda)
};

enum class SpeciesBcKind {
  ZeroFlux,   // mu_bc = mu_cell
  Potential,  // mu_bc = value(t)
};

struct ThermalBc {
  ThermalBcKind kind = ThermalBcKind::Insulated;
  Signal value;

  bool operator==(const ThermalBc&) const = default;
};

struct SpeciesBc {
  SpeciesBcKind kind = SpeciesBcKind::ZeroFlux;
  Signal value;

  bool operator==(const SpeciesBc&) const = default;
};

/// Conditions applied on one boundary group (see MimeticGrid::group_name).
struct GroupBc {
  ThermalBc thermal;
  std::vector<SpeciesBc> species;  // missing entries mean zero flux

  bool operator==(const GroupBc&) const = default;
};

struct BoundaryConditions {
  std::vector<GroupBc> groups;  // indexed by boundary group id

  /// Insulated, zero-flux conditions on every group of `grid`.
  static BoundaryConditions insulated(const MimeticGrid& grid, std::size_t n_species);

  bool operator==(const BoundaryConditions&) const = default;
};

/// Boundary traces of T and mu_i implied by the conditions at time t.
Traces boundary_traces(const MimeticGrid& grid, const ConstitutiveModel& model,
                       const BoundaryConditions& bc, const CoEnergyFields& coe, double t);

struct Problem {
  MimeticGrid grid;
  ConstitutiveModel model;
  BoundaryConditions bc;
  StructureBlocks blocks;

  /// Model coefficients, BC group count and species references.
  void validate() const;
};

/// Everything derived from a state at one time.
struct Evaluation {
  CoEnergyFields coe;
  Traces traces;
  DrivingForces forces;
  Modulators mods;
  Rates rates;
  EntropyProduction sigma;
  Fluxes fluxes;
  NdPortPairs ports;
};

Evaluation evaluate(const Problem& problem, const ThermoState& state, double t);

/// Balance quantities at one time level.
struct BalanceSample {
  double time = 0.0;
  double H = 0.0;                   // total energy
  double S = 0.0;                   // total entropy
  double boundary_power = 0.0;      // balance_power of the ports
  double trace_port_power = 0.0;    // energy_port_power (trace outputs)
  double entropy_production = 0.0;  // integral of sigma
  double entropy_boundary = 0.0;    // integral of g_s r_s.n T over the boundary
  double min_sigma = 0.0;           // min over cells of sigma_s and every sigma_c_i
  std::vector<double> moles;        // per species
};

BalanceSample balance_sample(const Problem& problem, const ThermoState& state,
                             const Evaluation& ev);

enum class Scheme { ImplicitMidpoint, ExplicitRk4 };

std::string scheme_name(Scheme scheme);
/// "implicit-midpoint" or "explicit-rk4"; ValidationError otherwise.
Scheme parse_scheme(const std::string& name);

struct TimeIntegrator {
  Scheme scheme = Scheme::ImplicitMidpoint;
  double dt = 1e-3;
  double t_end = 1.0;
  double newton_tol = 1e-12;
  int max_newton_iters = 50;

  void validate() const;
  bool operator==(const TimeIntegrator&) const = default;
};

/// Largest stable RK4 step for the frozen operator at `coe`.
///
/// Each axis contributes a Gershgorin bound 4 kappa / h^2 with
///   kappa = max(lambda / c_v, alpha_i d_i) * T_max / T_min,
/// the effective diffusivities of the linearized conduction and diffusion
/// rows (the T ratio bounds the modulator variation). RK4 is stable on the
/// negative real axis up to |z| = 2.78; the limit uses 2 for margin.
double explicit_dt_limit(const Problem& problem, const CoEnergyFields& coe);

struct StepResult {
  ThermoState state;
  PortRecord ports;               // at the end of the step
  std::vector<BalanceSample> samples;  // end of every sub-step, last = end of step
  double stage_min_sigma = 0.0;   // min pointwise sigma over all stage states
  int substeps = 1;
  int newton_iterations = 0;
  int linear_iterations = 0;
  std::vector<std::string> warnings;
};

/// Advances one integrator.dt. Modulators are re-evaluated at every stage
/// state. RK4 steps above explicit_dt_limit are split into equal sub-steps
/// with a warning. Throws ConvergenceError when Newton fails and StepError
/// when a stage state is unusable (non-finite, non-positive temperature).
StepResult step(const Problem& problem, const ThermoState& state, const TimeIntegrator& integrator);

/// Recorded balance samples plus the minimum stage production between
/// consecutive samples (stage_min_sigma[k] belongs to the interval ending at
/// samples[k + 1]).
struct Trajectory {
  std::vector<BalanceSample> samples;
  std::vector<double> stage_min_sigma;
};

struct ResidualSeries {
  std::vector<double> time;
  std::vector<double> residual;
  double max_abs = 0.0;
  double min_sigma = 0.0;  // second law only
};

/// r(t) = H(t) - H(0) - int_0^t boundary_power, trapezoid in time.
ResidualSeries audit_first_law(const Trajectory& trajectory);
/// r(t) = S(t) - S(0) - int_0^t (entropy_production + entropy_boundary).
ResidualSeries audit_second_law(const Trajectory& trajectory);

/// Called after every step with the step index (1-based) and its result.
using StepObserver = std::function<void(std::size_t, const StepResult&)>;

/// Integrates from state.time to integrator.t_end. The last step is
/// shortened to land on t_end.
Trajectory integrate(const Problem& problem, ThermoState& state, const TimeIntegrator& integrator,
                     const StepObserver& observer = {});

/// Flattened [c_1, .., c_n, s] and back.
Eigen::VectorXd pack_state(const ThermoState& state);
ThermoState unpack_state(const Eigen::VectorXd& x, std::size_t n_species, std::size_t n_cells,
                         double time);

}  // namespace iphs
