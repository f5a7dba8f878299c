#include "iphs/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "iphs/error.hpp"

namespace iphs {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ParseError("field '" + path + "': " + what, 0);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) {
    field_error(path, "expected an object");
  }
  const auto it = obj.find(key);
  if (it == obj.end()) {
    field_error(path.empty() ? key : path + "." + key, "missing");
  }
  return *it;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) {
    field_error(path, "expected a number");
  }
  return v.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, join(path, key));
}

std::size_t as_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    field_error(path, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) {
    field_error(path, "expected a string");
  }
  return v.get<std::string>();
}

template <std::size_t N>
std::array<double, N> as_numbers(const json& v, std::size_t count, const std::string& path,
                                 std::array<double, N> fallback) {
  if (!v.is_array() || v.size() != count) {
    field_error(path, "expected an array of " + std::to_string(count) + " numbers");
  }
  for (std::size_t k = 0; k < count; ++k) {
    fallback[k] = as_number(v[k], path + "[" + std::to_string(k) + "]");
  }
  return fallback;
}

Signal parse_signal(const json& v, const std::string& path) {
  if (v.is_number()) {
    return Signal::constant(v.get<double>());
  }
  if (!v.is_array() || v.empty()) {
    field_error(path, "expected a number or a non-empty array of [time, value] pairs");
  }
  std::vector<std::pair<double, double>> knots;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string p = path + "[" + std::to_string(k) + "]";
    if (!v[k].is_array() || v[k].size() != 2) {
      field_error(p, "expected a [time, value] pair");
    }
    knots.emplace_back(as_number(v[k][0], p + "[0]"), as_number(v[k][1], p + "[1]"));
  }
  try {
    return Signal(std::move(knots));
  } catch (const ValidationError& e) {
    field_error(path, e.what());
  }
}

ordered_json signal_json(const Signal& s) {
  if (s.knots().size() == 1 && s.knots().front().first == 0.0) {
    return s.knots().front().second;
  }
  ordered_json out = ordered_json::array();
  for (const auto& [t, v] : s.knots()) {
    out.push_back({t, v});
  }
  return out;
}

ProfileSpec parse_profile(const json& v, const std::string& path, int dim) {
  ProfileSpec p;
  const std::string kind = as_string(require(v, "profile", path), join(path, "profile"));
  if (kind == "uniform") {
    p.kind = ProfileKind::Uniform;
  } else if (kind == "gaussian") {
    p.kind = ProfileKind::Gaussian;
  } else if (kind == "step") {
    p.kind = ProfileKind::Step;
  } else {
    field_error(join(path, "profile"), "unknown profile '" + kind + "' (uniform | gaussian | step)");
  }
  p.base = as_number(require(v, "base", path), join(path, "base"));
  if (p.kind != ProfileKind::Uniform) {
    p.amplitude = as_number(require(v, "amplitude", path), join(path, "amplitude"));
  }
  if (p.kind == ProfileKind::Gaussian) {
    p.center = as_numbers<2>(require(v, "center", path), static_cast<std::size_t>(dim),
                             join(path, "center"), p.center);
    if (dim == 1) {
      p.center[1] = 0.0;  // 1D cell centres sit at y = 0
    }
    p.width = as_number(require(v, "width", path), join(path, "width"));
    if (!(p.width > 0.0)) {
      field_error(join(path, "width"), "must be positive");
    }
  }
  if (p.kind == ProfileKind::Step) {
    p.position = as_number(require(v, "position", path), join(path, "position"));
    const auto it = v.find("axis");
    if (it != v.end()) {
      const std::size_t axis = as_count(*it, join(path, "axis"));
      if (axis >= static_cast<std::size_t>(dim)) {
        field_error(join(path, "axis"), "must be smaller than the grid dimension");
      }
      p.axis = static_cast<int>(axis);
    }
  }
  return p;
}

ordered_json profile_json(const ProfileSpec& p, int dim) {
  ordered_json out;
  out["profile"] = profile_kind_name(p.kind);
  out["base"] = p.base;
  if (p.kind != ProfileKind::Uniform) {
    out["amplitude"] = p.amplitude;
  }
  if (p.kind == ProfileKind::Gaussian) {
    ordered_json c = ordered_json::array();
    for (int a = 0; a < dim; ++a) {
      c.push_back(p.center[static_cast<std::size_t>(a)]);
    }
    out["center"] = c;
    out["width"] = p.width;
  }
  if (p.kind == ProfileKind::Step) {
    out["axis"] = p.axis;
    out["position"] = p.position;
  }
  return out;
}

ThermalBcKind parse_thermal_kind(const std::string& s, const std::string& path) {
  if (s == "insulated") {
    return ThermalBcKind::Insulated;
  }
  if (s == "dirichlet_T") {
    return ThermalBcKind::Temperature;
  }
  if (s == "heat_flux") {
    return ThermalBcKind::HeatFlux;
  }
  field_error(path, "unknown thermal condition '" + s + "' (insulated | dirichlet_T | heat_flux)");
}

SpeciesBcKind parse_species_kind(const std::string& s, const std::string& path) {
  if (s == "zero_flux") {
    return SpeciesBcKind::ZeroFlux;
  }
  if (s == "dirichlet_mu") {
    return SpeciesBcKind::Potential;
  }
  field_error(path, "unknown species condition '" + s + "' (zero_flux | dirichlet_mu)");
}

GroupBc parse_group(const json& v, const std::string& path, std::size_t n_species) {
  GroupBc g;
  g.species.resize(n_species);
  const json& th = require(v, "thermal", path);
  const std::string tpath = join(path, "thermal");
  g.thermal.kind = parse_thermal_kind(as_string(require(th, "kind", tpath), join(tpath, "kind")),
                                      join(tpath, "kind"));
  if (g.thermal.kind != ThermalBcKind::Insulated) {
    g.thermal.value = parse_signal(require(th, "value", tpath), join(tpath, "value"));
  }
  const auto it = v.find("species");
  if (it != v.end()) {
    const std::string spath = join(path, "species");
    if (!it->is_array()) {
      field_error(spath, "expected an array");
    }
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string p = spath + "[" + std::to_string(k) + "]";
      const json& e = (*it)[k];
      const std::size_t idx = as_count(require(e, "index", p), join(p, "index"));
      if (idx >= n_species) {
        std::ostringstream os;
        os << "species index " << idx << " out of range (model has " << n_species << " species)";
        throw ValidationError(join(p, "index") + ": " + os.str());
      }
      SpeciesBc bc;
      bc.kind = parse_species_kind(as_string(require(e, "kind", p), join(p, "kind")), join(p, "kind"));
      if (bc.kind == SpeciesBcKind::Potential) {
        bc.value = parse_signal(require(e, "value", p), join(p, "value"));
      }
      g.species[idx] = bc;
    }
  }
  return g;
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
    }
  }
  return line;
}

/// Uniform in [-1, 1) from 53 random bits; independent of the standard
/// library's distribution implementations.
double symmetric_unit(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace

MimeticGrid GridSpec::build() const {
  if (dim == 1) {
    return MimeticGrid::line(cells[0], lower[0], upper[0]);
  }
  if (dim == 2) {
    return MimeticGrid::rectangle(cells, lower, upper);
  }
  throw ValidationError("grid.dim must be 1 or 2");
}

double ProfileSpec::operator()(const std::array<double, 2>& x) const {
  switch (kind) {
    case ProfileKind::Uniform:
      return base;
    case ProfileKind::Gaussian: {
      const double dx = x[0] - center[0];
      const double dy = x[1] - center[1];
      return base + amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
    }
    case ProfileKind::Step:
      return x[static_cast<std::size_t>(axis)] < position ? base : base + amplitude;
  }
  return base;
}

std::string thermal_kind_name(ThermalBcKind kind) {
  switch (kind) {
    case ThermalBcKind::Insulated:
      return "insulated";
    case ThermalBcKind::Temperature:
      return "dirichlet_T";
    case ThermalBcKind::HeatFlux:
      return "heat_flux";
  }
  return "insulated";
}

std::string species_kind_name(SpeciesBcKind kind) {
  return kind == SpeciesBcKind::ZeroFlux ? "zero_flux" : "dirichlet_mu";
}

std::string profile_kind_name(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Uniform:
      return "uniform";
    case ProfileKind::Gaussian:
      return "gaussian";
    case ProfileKind::Step:
      return "step";
  }
  return "uniform";
}

void Scenario::validate() const {
  if (name.empty()) {
    throw ValidationError("scenario name must not be empty");
  }
  const MimeticGrid g = grid.build();
  model.validate();
  if (concentrations.size() != model.n_species()) {
    std::ostringstream os;
    os << "initial.concentrations has " << concentrations.size() << " profiles for "
       << model.n_species() << " species";
    throw ValidationError(os.str());
  }
  if (bc.groups.size() != g.num_boundary_groups()) {
    throw ValidationError("boundary conditions must be given for every boundary group");
  }
  for (std::size_t k = 0; k < bc.groups.size(); ++k) {
    if (bc.groups[k].species.size() != model.n_species()) {
      throw ValidationError("boundary." + std::string(MimeticGrid::group_name(k)) +
                            ": species conditions do not match the species count");
    }
  }
  integrator.validate();
  if (!(noise.amplitude >= 0.0)) {
    throw ValidationError("initial.noise.amplitude must be non-negative");
  }
}

Problem Scenario::problem() const { return Problem{grid.build(), model, bc, {}}; }

ThermoState Scenario::initial_state() const {
  const MimeticGrid g = grid.build();
  const std::size_t nc = g.num_cells();
  std::mt19937_64 rng(noise.seed);
  ThermoState s;
  s.time = 0.0;
  s.entropy_density = CellField(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    double T = temperature(g.cell_center(c));
    if (noise.amplitude > 0.0) {
      T += noise.amplitude * symmetric_unit(rng);
    }
    if (!(T > 0.0)) {
      std::ostringstream os;
      os << "initial temperature " << T << " at cell " << c << " is not positive";
      throw ValidationError(os.str());
    }
    s.entropy_density[c] = model.entropy_for_temperature(T);
  }
  for (const auto& profile : concentrations) {
    CellField field(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      field[c] = profile(g.cell_center(c));
      if (noise.amplitude > 0.0) {
        field[c] += noise.amplitude * symmetric_unit(rng);
      }
    }
    s.concentrations.push_back(std::move(field));
  }
  return s;
}

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("syntax error: ") + e.what(), line_of_offset(text, e.byte));
  }
  if (!root.is_object()) {
    throw ParseError("scenario must be a JSON object", 1);
  }

  Scenario sc;
  sc.name = as_string(require(root, "name", ""), "name");

  const json& grid = require(root, "grid", "");
  sc.grid.dim = static_cast<int>(as_count(require(grid, "dim", "grid"), "grid.dim"));
  if (sc.grid.dim != 1 && sc.grid.dim != 2) {
    field_error("grid.dim", "must be 1 or 2");
  }
  const auto d = static_cast<std::size_t>(sc.grid.dim);
  const json& cells = require(grid, "cells", "grid");
  if (!cells.is_array() || cells.size() != d) {
    field_error("grid.cells", "expected " + std::to_string(d) + " cell counts");
  }
  for (std::size_t a = 0; a < d; ++a) {
    sc.grid.cells[a] = as_count(cells[a], "grid.cells[" + std::to_string(a) + "]");
  }
  sc.grid.lower = as_numbers<2>(require(grid, "lower", "grid"), d, "grid.lower", sc.grid.lower);
  sc.grid.upper = as_numbers<2>(require(grid, "upper", "grid"), d, "grid.upper", sc.grid.upper);

  const json& model = require(root, "model", "");
  sc.model.c_v = as_number(require(model, "c_v", "model"), "model.c_v");
  sc.model.T_ref = as_number(require(model, "T_ref", "model"), "model.T_ref");
  sc.model.lambda = as_number(require(model, "lambda", "model"), "model.lambda");
  if (const auto it = model.find("species"); it != model.end()) {
    if (!it->is_array()) {
      field_error("model.species", "expected an array");
    }
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string p = "model.species[" + std::to_string(k) + "]";
      sc.model.alpha.push_back(as_number(require((*it)[k], "alpha", p), p + ".alpha"));
      sc.model.d.push_back(as_number(require((*it)[k], "d", p), p + ".d"));
    }
  }
  const std::size_t n = sc.model.n_species();

  const json& init = require(root, "initial", "");
  sc.temperature = parse_profile(require(init, "temperature", "initial"), "initial.temperature",
                                 sc.grid.dim);
  if (const auto it = init.find("concentrations"); it != init.end()) {
    if (!it->is_array()) {
      field_error("initial.concentrations", "expected an array");
    }
    for (std::size_t k = 0; k < it->size(); ++k) {
      sc.concentrations.push_back(parse_profile(
          (*it)[k], "initial.concentrations[" + std::to_string(k) + "]", sc.grid.dim));
    }
  }
  if (const auto it = init.find("noise"); it != init.end()) {
    sc.noise.amplitude = as_number(require(*it, "amplitude", "initial.noise"), "initial.noise.amplitude");
    sc.noise.seed = as_count(require(*it, "seed", "initial.noise"), "initial.noise.seed");
  }

  const json& boundary = require(root, "boundary", "");
  if (!boundary.is_object()) {
    field_error("boundary", "expected an object");
  }
  const std::size_t groups = 2 * d;
  for (const auto& [key, value] : boundary.items()) {
    bool known = false;
    for (std::size_t g = 0; g < groups; ++g) {
      known = known || key == MimeticGrid::group_name(g);
    }
    if (!known) {
      field_error("boundary." + key, "unknown boundary group for a " + std::to_string(d) + "D grid");
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    const std::string gname(MimeticGrid::group_name(g));
    const auto it = boundary.find(gname);
    if (it == boundary.end()) {
      throw ValidationError("boundary group '" + gname + "' has no conditions");
    }
    sc.bc.groups.push_back(parse_group(*it, "boundary." + gname, n));
  }

  const json& integ = require(root, "integrator", "");
  sc.integrator.scheme = parse_scheme(
      as_string(require(integ, "scheme", "integrator"), "integrator.scheme"));
  sc.integrator.dt = as_number(require(integ, "dt", "integrator"), "integrator.dt");
  sc.integrator.t_end = as_number(require(integ, "t_end", "integrator"), "integrator.t_end");
  sc.integrator.newton_tol = number_or(integ, "newton_tol", 1e-12, "integrator");
  if (const auto it = integ.find("max_newton_iters"); it != integ.end()) {
    sc.integrator.max_newton_iters =
        static_cast<int>(as_count(*it, "integrator.max_newton_iters"));
  }

  if (const auto it = root.find("output"); it != root.end()) {
    if (const auto e = it->find("snapshot_every"); e != it->end()) {
      sc.output.snapshot_every = as_count(*e, "output.snapshot_every");
    }
    if (const auto e = it->find("directory"); e != it->end()) {
      sc.output.directory = as_string(*e, "output.directory");
    }
  }

  if (const auto it = root.find("tolerances"); it != root.end()) {
    Tolerances& t = sc.tolerances;
    t.first_law = number_or(*it, "first_law", t.first_law, "tolerances");
    t.second_law = number_or(*it, "second_law", t.second_law, "tolerances");
    t.min_sigma = number_or(*it, "min_sigma", t.min_sigma, "tolerances");
    t.mass_drift = number_or(*it, "mass_drift", t.mass_drift, "tolerances");
    t.entropy_decrease = number_or(*it, "entropy_decrease", t.entropy_decrease, "tolerances");
  }

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open scenario file " + path.string(), 0);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& sc) {
  const auto d = static_cast<std::size_t>(sc.grid.dim);
  ordered_json root;
  root["name"] = sc.name;

  ordered_json grid;
  grid["dim"] = sc.grid.dim;
  ordered_json cells = ordered_json::array();
  ordered_json lower = ordered_json::array();
  ordered_json upper = ordered_json::array();
  for (std::size_t a = 0; a < d; ++a) {
    cells.push_back(sc.grid.cells[a]);
    lower.push_back(sc.grid.lower[a]);
    upper.push_back(sc.grid.upper[a]);
  }
  grid["cells"] = cells;
  grid["lower"] = lower;
  grid["upper"] = upper;
  root["grid"] = grid;

  ordered_json model;
  model["c_v"] = sc.model.c_v;
  model["T_ref"] = sc.model.T_ref;
  model["lambda"] = sc.model.lambda;
  model["species"] = ordered_json::array();
  for (std::size_t i = 0; i < sc.model.n_species(); ++i) {
    ordered_json sp;
    sp["alpha"] = sc.model.alpha[i];
    sp["d"] = sc.model.d[i];
    model["species"].push_back(sp);
  }
  root["model"] = model;

  ordered_json init;
  init["temperature"] = profile_json(sc.temperature, sc.grid.dim);
  init["concentrations"] = ordered_json::array();
  for (const auto& p : sc.concentrations) {
    init["concentrations"].push_back(profile_json(p, sc.grid.dim));
  }
  init["noise"] = {{"amplitude", sc.noise.amplitude}, {"seed", sc.noise.seed}};
  root["initial"] = init;

  ordered_json boundary;
  for (std::size_t g = 0; g < sc.bc.groups.size(); ++g) {
    const GroupBc& gb = sc.bc.groups[g];
    ordered_json entry;
    ordered_json th;
    th["kind"] = thermal_kind_name(gb.thermal.kind);
    if (gb.thermal.kind != ThermalBcKind::Insulated) {
      th["value"] = signal_json(gb.thermal.value);
    }
    entry["thermal"] = th;
    entry["species"] = ordered_json::array();
    for (std::size_t i = 0; i < gb.species.size(); ++i) {
      ordered_json sp;
      sp["index"] = i;
      sp["kind"] = species_kind_name(gb.species[i].kind);
      if (gb.species[i].kind == SpeciesBcKind::Potential) {
        sp["value"] = signal_json(gb.species[i].value);
      }
      entry["species"].push_back(sp);
    }
    boundary[std::string(MimeticGrid::group_name(g))] = entry;
  }
  root["boundary"] = boundary;

  ordered_json integ;
  integ["scheme"] = scheme_name(sc.integrator.scheme);
  integ["dt"] = sc.integrator.dt;
  integ["t_end"] = sc.integrator.t_end;
  integ["newton_tol"] = sc.integrator.newton_tol;
  integ["max_newton_iters"] = sc.integrator.max_newton_iters;
  root["integrator"] = integ;

  root["output"] = {{"snapshot_every", sc.output.snapshot_every},
                    {"directory", sc.output.directory}};
  root["tolerances"] = {{"first_law", sc.tolerances.first_law},
                        {"second_law", sc.tolerances.second_law},
                        {"min_sigma", sc.tolerances.min_sigma},
                        {"mass_drift", sc.tolerances.mass_drift},
                        {"entropy_decrease", sc.tolerances.entropy_decrease}};
  return root.dump(2) + "\n";
}

}  // namespace iphs
