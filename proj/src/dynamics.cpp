#include "iphs/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iphs/error.hpp"
#include "iphs/summation.hpp"

namespace iphs {

// Signals and boundary conditions -----------------------------------------

Signal::Signal(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    if (!std::isfinite(knots_[k].first) || !std::isfinite(knots_[k].second)) {
      throw ValidationError("signal knots must be finite");
    }
    if (k > 0 && !(knots_[k].first > knots_[k - 1].first)) {
      throw ValidationError("signal knot times must be strictly increasing");
    }
  }
}

Signal Signal::constant(double value) { return Signal({{0.0, value}}); }

double Signal::operator()(double t) const {
  if (knots_.empty()) {
    return 0.0;
  }
  if (t <= knots_.front().first) {
    return knots_.front().second;
  }
  if (t >= knots_.back().first) {
    return knots_.back().second;
  }
  const auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double x, const auto& knot) { return x < knot.first; });
  const auto lo = hi - 1;
  const double w = (t - lo->first) / (hi->first - lo->first);
  return (1.0 - w) * lo->second + w * hi->second;
}

BoundaryConditions BoundaryConditions::insulated(const MimeticGrid& grid, std::size_t n_species) {
  BoundaryConditions bc;
  bc.groups.resize(grid.num_boundary_groups());
  for (auto& g : bc.groups) {
    g.species.resize(n_species);
  }
  return bc;
}

Traces boundary_traces(const MimeticGrid& grid, const ConstitutiveModel& model,
                       const BoundaryConditions& bc, const CoEnergyFields& coe, double t) {
  if (bc.groups.size() != grid.num_boundary_groups()) {
    throw DimensionError("boundary conditions must cover every boundary group");
  }
  const std::size_t n = coe.n_species();
  Traces traces = Traces::zero(grid, n);
  const auto& bnd = grid.boundary_faces();
  for (std::size_t k = 0; k < bnd.size(); ++k) {
    const BoundaryFace& b = bnd[k];
    const GroupBc& g = bc.groups[b.group];
    const double T_cell = coe.temperature[b.cell];
    double T_bc = T_cell;
    switch (g.thermal.kind) {
      case ThermalBcKind::Insulated:
        break;
      case ThermalBcKind::Temperature:
        T_bc = g.thermal.value(t);
        break;
      case ThermalBcKind::HeatFlux:
        // -lambda (T_bc - T_cell) (2/h) n . n = -q_out  with q_in = -q_out
        T_bc = T_cell + g.thermal.value(t) * grid.spacing(b.axis) / (2.0 * model.lambda);
        break;
    }
    if (!std::isfinite(T_bc) || !(T_bc > 0.0)) {
      std::ostringstream os;
      os << "boundary temperature " << T_bc << " on group " << MimeticGrid::group_name(b.group)
         << " is not positive";
      throw ConstitutiveError(os.str());
    }
    traces.temperature[k] = T_bc;
    for (std::size_t i = 0; i < n; ++i) {
      const double mu_cell = coe.chemical_potentials[i][b.cell];
      const bool fixed = i < g.species.size() && g.species[i].kind == SpeciesBcKind::Potential;
      traces.chemical_potentials[i][k] = fixed ? g.species[i].value(t) : mu_cell;
    }
  }
  return traces;
}

void Problem::validate() const {
  model.validate();
  if (bc.groups.size() != grid.num_boundary_groups()) {
    std::ostringstream os;
    os << "boundary conditions given for " << bc.groups.size() << " groups, grid has "
       << grid.num_boundary_groups();
    throw ValidationError(os.str());
  }
  for (std::size_t g = 0; g < bc.groups.size(); ++g) {
    if (bc.groups[g].species.size() > model.n_species()) {
      std::ostringstream os;
      os << "group " << MimeticGrid::group_name(g) << " references species "
         << bc.groups[g].species.size() - 1 << " but the model has " << model.n_species();
      throw ValidationError(os.str());
    }
  }
  if (blocks.P0.size() != 0) {
    const auto n = static_cast<Eigen::Index>(model.n_species());
    if (blocks.P0.rows() != n || blocks.P0.cols() != n) {
      throw ValidationError("P0 block must be n_species x n_species");
    }
    if ((blocks.P0 + blocks.P0.transpose()).cwiseAbs().maxCoeff() >
        1e-14 * std::max(1.0, blocks.P0.cwiseAbs().maxCoeff())) {
      throw ValidationError("P0 block must be skew-symmetric");
    }
  }
}

// Evaluation ----------------------------------------------------------------

Evaluation evaluate(const Problem& problem, const ThermoState& state, double t) {
  Evaluation ev;
  ev.coe = co_energy(state, problem.model);
  ev.traces = boundary_traces(problem.grid, problem.model, problem.bc, ev.coe, t);
  ev.forces = driving_forces(problem.grid, ev.coe, ev.traces);
  ev.mods = modulators(problem.grid, ev.coe, ev.forces, problem.model, ev.traces);
  ev.rates = apply_jglob(problem.grid, ev.mods, ev.coe, ev.traces, problem.blocks);
  ev.sigma = entropy_production(problem.grid, ev.mods, ev.forces);
  ev.fluxes = fluxes(ev.mods, ev.forces, problem.model);
  ev.ports = nd_port_pairs(problem.grid, ev.traces, ev.fluxes);
  return ev;
}

BalanceSample balance_sample(const Problem& problem, const ThermoState& state,
                             const Evaluation& ev) {
  const MimeticGrid& grid = problem.grid;
  BalanceSample s;
  s.time = state.time;
  s.H = total_energy(state, problem.model, grid);
  s.S = total_entropy(state, grid);
  s.boundary_power = balance_power(grid, ev.ports, ev.coe);
  s.trace_port_power = energy_port_power(grid, ev.ports);
  s.entropy_production = cell_integral(grid, ev.sigma.total());
  BoundaryField rs_n = normal_trace(grid, ev.mods.r_s);
  for (std::size_t k = 0; k < rs_n.size(); ++k) {
    rs_n[k] *= ev.mods.g_s;
  }
  s.entropy_boundary = boundary_integral(grid, rs_n, ev.traces.temperature);
  double m = std::numeric_limits<double>::infinity();
  for (double v : ev.sigma.sigma_s) {
    m = std::min(m, v);
  }
  for (const auto& sc : ev.sigma.sigma_c) {
    for (double v : sc) {
      m = std::min(m, v);
    }
  }
  s.min_sigma = m;
  s.moles.reserve(state.n_species());
  for (std::size_t i = 0; i < state.n_species(); ++i) {
    s.moles.push_back(total_moles(state, i, grid));
  }
  return s;
}

// Integrator settings -------------------------------------------------------

std::string scheme_name(Scheme scheme) {
  return scheme == Scheme::ImplicitMidpoint ? "implicit-midpoint" : "explicit-rk4";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "implicit-midpoint") {
    return Scheme::ImplicitMidpoint;
  }
  if (name == "explicit-rk4") {
    return Scheme::ExplicitRk4;
  }
  throw ValidationError("unknown scheme '" + name + "' (implicit-midpoint | explicit-rk4)");
}

void TimeIntegrator::validate() const {
  if (!std::isfinite(dt) || !(dt > 0.0)) {
    throw ValidationError("dt must be positive");
  }
  if (!std::isfinite(t_end)) {
    throw ValidationError("t_end must be finite");
  }
  if (!(newton_tol > 0.0)) {
    throw ValidationError("newton_tol must be positive");
  }
  if (max_newton_iters < 1) {
    throw ValidationError("max_newton_iters must be at least 1");
  }
}

double explicit_dt_limit(const Problem& problem, const CoEnergyFields& coe) {
  const auto [tmin_it, tmax_it] =
      std::minmax_element(coe.temperature.begin(), coe.temperature.end());
  const double ratio = *tmax_it / *tmin_it;
  const ConstitutiveModel& m = problem.model;
  double kappa = m.lambda / m.c_v;
  for (std::size_t i = 0; i < m.n_species(); ++i) {
    kappa = std::max(kappa, m.alpha[i] * m.d[i]);
  }
  kappa *= ratio;
  double rho = 0.0;
  for (int axis = 0; axis < problem.grid.dim(); ++axis) {
    const double h = problem.grid.spacing(axis);
    rho += 4.0 * kappa / (h * h);
  }
  return 2.0 / rho;
}

// State packing -------------------------------------------------------------

Eigen::VectorXd pack_state(const ThermoState& state) {
  const std::size_t nc = state.entropy_density.size();
  const std::size_t n = state.n_species();
  Eigen::VectorXd x(static_cast<Eigen::Index>((n + 1) * nc));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < nc; ++c) {
      x(static_cast<Eigen::Index>(i * nc + c)) = state.concentrations[i][c];
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    x(static_cast<Eigen::Index>(n * nc + c)) = state.entropy_density[c];
  }
  return x;
}

ThermoState unpack_state(const Eigen::VectorXd& x, std::size_t n_species, std::size_t n_cells,
                         double time) {
  if (static_cast<std::size_t>(x.size()) != (n_species + 1) * n_cells) {
    throw DimensionError("unpack_state: vector length does not match the layout");
  }
  ThermoState s;
  s.time = time;
  s.concentrations.assign(n_species, CellField(n_cells));
  for (std::size_t i = 0; i < n_species; ++i) {
    for (std::size_t c = 0; c < n_cells; ++c) {
      s.concentrations[i][c] = x(static_cast<Eigen::Index>(i * n_cells + c));
    }
  }
  s.entropy_density = CellField(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    s.entropy_density[c] = x(static_cast<Eigen::Index>(n_species * n_cells + c));
  }
  return s;
}

namespace {

Eigen::VectorXd pack_rates(const Rates& r) {
  const std::size_t nc = r.ds.size();
  const std::size_t n = r.dc.size();
  Eigen::VectorXd x(static_cast<Eigen::Index>((n + 1) * nc));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < nc; ++c) {
      x(static_cast<Eigen::Index>(i * nc + c)) = r.dc[i][c];
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    x(static_cast<Eigen::Index>(n * nc + c)) = r.ds[c];
  }
  return x;
}

double min_pointwise(const EntropyProduction& sigma) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : sigma.sigma_s) {
    m = std::min(m, v);
  }
  for (const auto& sc : sigma.sigma_c) {
    for (double v : sc) {
      m = std::min(m, v);
    }
  }
  return m;
}

/// Right-hand side f(x, t) with bookkeeping of the stage productions.
class RightHandSide {
 public:
  RightHandSide(const Problem& problem, std::size_t n_species)
      : problem_(problem), n_(n_species), nc_(problem.grid.num_cells()) {}

  /// Evaluates f; throws StepError when the stage state is unusable.
  Eigen::VectorXd operator()(const Eigen::VectorXd& x, double t, double* min_sigma = nullptr) const {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (!std::isfinite(x(k))) {
        throw StepError("stage state has a non-finite entry");
      }
    }
    const ThermoState s = unpack_state(x, n_, nc_, t);
    try {
      const CoEnergyFields coe = co_energy(s, problem_.model);
      const Traces traces = boundary_traces(problem_.grid, problem_.model, problem_.bc, coe, t);
      const DrivingForces forces = driving_forces(problem_.grid, coe, traces);
      const Modulators mods = modulators(problem_.grid, coe, forces, problem_.model, traces);
      if (min_sigma != nullptr) {
        *min_sigma = min_pointwise(entropy_production(problem_.grid, mods, forces));
      }
      return pack_rates(apply_jglob(problem_.grid, mods, coe, traces, problem_.blocks));
    } catch (const SaturationError& e) {
      throw StepError(std::string("stage rejected: ") + e.what());
    } catch (const ConstitutiveError& e) {
      throw StepError(std::string("stage rejected: ") + e.what());
    }
  }

 private:
  const Problem& problem_;
  std::size_t n_;
  std::size_t nc_;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// Restarted GMRES(m) with modified Gram-Schmidt and Givens rotations.
/// Returns the number of inner iterations.
template <class Op>
int gmres(const Op& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double rel_tol,
          int restart, int max_iters) {
  const Eigen::Index n = b.size();
  x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    return 0;
  }
  const double target = rel_tol * bnorm;
  int total = 0;
  Eigen::VectorXd r = b;
  double beta = bnorm;
  while (total < max_iters) {
    const int m = restart;
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    V.col(0) = r / beta;
    g(0) = beta;
    int j = 0;
    for (; j < m && total < max_iters; ++j, ++total) {
      Eigen::VectorXd w = A(V.col(j));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = w.dot(V.col(i));
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0.0) {
        V.col(j + 1) = w / H(j + 1, j);
      }
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs(j) = denom == 0.0 ? 1.0 : H(j, j) / denom;
      sn(j) = denom == 0.0 ? 0.0 : H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      if (std::abs(g(j + 1)) <= target || H(j, j) == 0.0) {
        ++j;
        ++total;
        break;
      }
    }
    const Eigen::VectorXd yv =
        H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    x += V.leftCols(j) * yv;
    r = b - A(x);
    beta = r.norm();
    if (beta <= target) {
      break;
    }
  }
  return total;
}

struct StageSolve {
  Eigen::VectorXd y;
  int newton_iterations = 0;
  int linear_iterations = 0;
};

/// Solves y = x + (dt/2) f(y, t_mid) by damped Newton with finite-difference
/// Jacobian-vector products.
StageSolve midpoint_stage(const RightHandSide& f, const Eigen::VectorXd& x, double t_mid,
                          double dt, const TimeIntegrator& ti) {
  const double half = 0.5 * dt;
  const double scale = std::max(1.0, inf_norm(x));
  const double tol = ti.newton_tol * scale;

  StageSolve out;
  Eigen::VectorXd y = x + half * f(x, t_mid);
  Eigen::VectorXd fy = f(y, t_mid);
  Eigen::VectorXd F = y - x - half * fy;
  double Fnorm = inf_norm(F);

  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  for (int it = 0; it < ti.max_newton_iters; ++it) {
    if (Fnorm <= tol) {
      out.y = std::move(y);
      return out;
    }
    ++out.newton_iterations;
    const double ynorm = y.norm();
    auto jvp = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      const double vnorm = v.norm();
      if (vnorm == 0.0) {
        return Eigen::VectorXd::Zero(v.size());
      }
      const double eps = sqrt_eps * std::max(1.0, ynorm) / vnorm;
      return v - half * (f(y + eps * v, t_mid) - fy) / eps;
    };
    Eigen::VectorXd delta;
    // Inexact Newton: finite-difference products carry ~sqrt(eps) noise, so the
    // linear solve only needs a modest relative reduction.
    out.linear_iterations += gmres(jvp, -F, delta, 1e-7, 60, 300);

    double step_len = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::VectorXd y_try = y + step_len * delta;
      try {
        Eigen::VectorXd f_try = f(y_try, t_mid);
        Eigen::VectorXd F_try = y_try - x - half * f_try;
        const double norm_try = inf_norm(F_try);
        if (norm_try < Fnorm || step_len < 1.0 / 1024.0) {
          y = std::move(y_try);
          fy = std::move(f_try);
          F = std::move(F_try);
          Fnorm = norm_try;
          accepted = true;
          break;
        }
      } catch (const StepError&) {
        // trial state outside the admissible set: shorten the step
      }
      step_len *= 0.5;
    }
    if (!accepted) {
      throw ConvergenceError("Newton line search failed to find an admissible stage state");
    }
  }
  if (Fnorm <= tol) {
    out.y = std::move(y);
    return out;
  }
  std::ostringstream os;
  os << "Newton did not converge in " << ti.max_newton_iters << " iterations (residual " << Fnorm
     << ", tolerance " << tol << ")";
  throw ConvergenceError(os.str());
}

}  // namespace

StepResult step(const Problem& problem, const ThermoState& state, const TimeIntegrator& integrator) {
  integrator.validate();
  const std::size_t n = state.n_species();
  validate_state(state, problem.model, problem.grid);
  RightHandSide f(problem, n);
  const std::size_t nc = problem.grid.num_cells();

  StepResult result;
  result.stage_min_sigma = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x = pack_state(state);
  double t = state.time;

  int substeps = 1;
  if (integrator.scheme == Scheme::ExplicitRk4) {
    const double limit = explicit_dt_limit(problem, co_energy(state, problem.model));
    if (integrator.dt > limit) {
      substeps = static_cast<int>(std::ceil(integrator.dt / limit));
      std::ostringstream os;
      os << "dt = " << integrator.dt << " exceeds the explicit stability limit " << limit
         << "; using " << substeps << " sub-steps";
      result.warnings.push_back(os.str());
    }
  }
  result.substeps = substeps;
  const double h = integrator.dt / substeps;

  for (int sub = 0; sub < substeps; ++sub) {
    double stage_sigma = 0.0;
    if (integrator.scheme == Scheme::ImplicitMidpoint) {
      const double t_mid = t + 0.5 * h;
      StageSolve stage = midpoint_stage(f, x, t_mid, h, integrator);
      result.newton_iterations += stage.newton_iterations;
      result.linear_iterations += stage.linear_iterations;
      x = x + h * f(stage.y, t_mid, &stage_sigma);
      result.stage_min_sigma = std::min(result.stage_min_sigma, stage_sigma);
    } else {
      const Eigen::VectorXd k1 = f(x, t, &stage_sigma);
      result.stage_min_sigma = std::min(result.stage_min_sigma, stage_sigma);
      const Eigen::VectorXd k2 = f(x + 0.5 * h * k1, t + 0.5 * h, &stage_sigma);
      result.stage_min_sigma = std::min(result.stage_min_sigma, stage_sigma);
      const Eigen::VectorXd k3 = f(x + 0.5 * h * k2, t + 0.5 * h, &stage_sigma);
      result.stage_min_sigma = std::min(result.stage_min_sigma, stage_sigma);
      const Eigen::VectorXd k4 = f(x + h * k3, t + h, &stage_sigma);
      result.stage_min_sigma = std::min(result.stage_min_sigma, stage_sigma);
      x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    t = sub + 1 == substeps ? state.time + integrator.dt : t + h;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (!std::isfinite(x(k))) {
        throw StepError("step produced a non-finite state");
      }
    }
    ThermoState next = unpack_state(x, n, nc, t);
    try {
      const Evaluation ev = evaluate(problem, next, t);
      result.samples.push_back(balance_sample(problem, next, ev));
      if (sub + 1 == substeps) {
        result.ports.time = t;
        result.ports.nd = ev.ports;
      }
    } catch (const SaturationError& e) {
      throw StepError(std::string("end-of-step state rejected: ") + e.what());
    } catch (const ConstitutiveError& e) {
      throw StepError(std::string("end-of-step state rejected: ") + e.what());
    }
    if (sub + 1 == substeps) {
      result.state = std::move(next);
    }
  }
  return result;
}

// Audits --------------------------------------------------------------------

namespace {

template <class Rate>
ResidualSeries balance_residual(const Trajectory& tr, double (*quantity)(const BalanceSample&),
                                Rate rate) {
  ResidualSeries out;
  if (tr.samples.empty()) {
    return out;
  }
  const double q0 = quantity(tr.samples.front());
  CompensatedSum supplied;
  out.time.push_back(tr.samples.front().time);
  out.residual.push_back(0.0);
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    const BalanceSample& a = tr.samples[k - 1];
    const BalanceSample& b = tr.samples[k];
    supplied += 0.5 * (b.time - a.time) * (rate(a) + rate(b));
    const double r = (quantity(b) - q0) - supplied.value();
    out.time.push_back(b.time);
    out.residual.push_back(r);
    out.max_abs = std::max(out.max_abs, std::abs(r));
  }
  return out;
}

double energy_of(const BalanceSample& s) { return s.H; }
double entropy_of(const BalanceSample& s) { return s.S; }

}  // namespace

ResidualSeries audit_first_law(const Trajectory& trajectory) {
  return balance_residual(trajectory, &energy_of,
                          [](const BalanceSample& s) { return s.boundary_power; });
}

ResidualSeries audit_second_law(const Trajectory& trajectory) {
  ResidualSeries out = balance_residual(trajectory, &entropy_of, [](const BalanceSample& s) {
    return s.entropy_production + s.entropy_boundary;
  });
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : trajectory.samples) {
    m = std::min(m, s.min_sigma);
  }
  for (double v : trajectory.stage_min_sigma) {
    m = std::min(m, v);
  }
  out.min_sigma = trajectory.samples.empty() ? 0.0 : m;
  return out;
}

Trajectory integrate(const Problem& problem, ThermoState& state, const TimeIntegrator& integrator,
                     const StepObserver& observer) {
  integrator.validate();
  problem.validate();
  Trajectory tr;
  tr.samples.push_back(balance_sample(problem, state, evaluate(problem, state, state.time)));

  const double t0 = state.time;
  const double span = integrator.t_end - t0;
  if (!(span > 0.0)) {
    return tr;
  }
  // Step count fixed up front so every run of a scenario visits the same
  // time levels; the last step absorbs the rounding remainder.
  const auto steps = static_cast<std::size_t>(std::ceil(span / integrator.dt - 1e-9));
  for (std::size_t k = 1; k <= steps; ++k) {
    TimeIntegrator ti = integrator;
    const double t_next = k == steps ? integrator.t_end : t0 + static_cast<double>(k) * integrator.dt;
    ti.dt = t_next - state.time;
    StepResult r = step(problem, state, ti);
    r.state.time = t_next;
    for (std::size_t j = 0; j < r.samples.size(); ++j) {
      if (j + 1 == r.samples.size()) {
        r.samples[j].time = t_next;
      }
      tr.samples.push_back(r.samples[j]);
      tr.stage_min_sigma.push_back(r.stage_min_sigma);
    }
    state = r.state;
    if (observer) {
      observer(k, r);
    }
  }
  return tr;
}

}  // namespace iphs
