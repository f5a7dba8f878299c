#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "iphs/constitutive.hpp"
#include "iphs/error.hpp"
#include "iphs/mesh.hpp"
#include "iphs/operators.hpp"
#include "iphs/ports.hpp"
#include "iphs/run.hpp"
#include "iphs/scenario.hpp"

namespace py = pybind11;
using namespace iphs;

namespace {

ThermoState make_state(const std::vector<double>& s, const std::vector<std::vector<double>>& c) {
  ThermoState st;
  st.entropy_density = CellField(s);
  for (const auto& ci : c) {
    st.concentrations.emplace_back(ci);
  }
  return st;
}

py::list checks_to_list(const std::vector<Check>& checks) {
  py::list out;
  for (const auto& c : checks) {
    py::dict d;
    d["name"] = c.name;
    d["value"] = c.value;
    d["tolerance"] = c.tolerance;
    d["passed"] = c.passed;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_iphs, m) {
  m.doc() = "Conduction-diffusion port-Hamiltonian core";

  static py::exception<Error> iphs_error(m, "IphsError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(iphs_error, e.what());
    }
  });

  py::class_<MimeticGrid>(m, "MimeticGrid")
      .def_static("line", &MimeticGrid::line, py::arg("cells"), py::arg("lower") = 0.0,
                  py::arg("upper") = 1.0)
      .def_static("rectangle", &MimeticGrid::rectangle, py::arg("cells"), py::arg("lower"),
                  py::arg("upper"))
      .def_property_readonly("dim", &MimeticGrid::dim)
      .def_property_readonly("num_cells", &MimeticGrid::num_cells)
      .def_property_readonly("num_faces", py::overload_cast<>(&MimeticGrid::num_faces, py::const_))
      .def_property_readonly("num_boundary_faces", &MimeticGrid::num_boundary_faces)
      .def_property_readonly("cell_volume", &MimeticGrid::cell_volume)
      .def("cell_center", &MimeticGrid::cell_center)
      .def(
          "grad",
          [](const MimeticGrid& g, const std::vector<double>& phi, const std::vector<double>& trace) {
            return grad(g, CellField(phi), BoundaryField(trace)).values();
          },
          py::arg("phi"), py::arg("trace"))
      .def(
          "div",
          [](const MimeticGrid& g, const std::vector<double>& f) { return div(g, FaceField(f)).values(); },
          py::arg("f"));

  m.def(
      "ibp_residual",
      [](const MimeticGrid& g, const std::vector<double>& phi, const std::vector<double>& f,
         const std::vector<double>& phi_bc) {
        const IbpResidual r = ibp_residual(g, CellField(phi), FaceField(f), BoundaryField(phi_bc));
        return py::make_tuple(r.residual, r.scale);
      },
      py::arg("grid"), py::arg("phi"), py::arg("f"), py::arg("phi_bc"),
      "Signed discrete integration-by-parts residual and its magnitude scale.");

  py::class_<ConstitutiveModel>(m, "ConstitutiveModel")
      .def(py::init([](double c_v, double T_ref, double lambda, std::vector<double> alpha,
                       std::vector<double> d) {
             ConstitutiveModel model{c_v, T_ref, lambda, std::move(alpha), std::move(d)};
             model.validate();
             return model;
           }),
           py::arg("c_v") = 1.0, py::arg("T_ref") = 1.0, py::arg("lam") = 1.0,
           py::arg("alpha") = std::vector<double>{}, py::arg("d") = std::vector<double>{})
      .def_readwrite("c_v", &ConstitutiveModel::c_v)
      .def_readwrite("T_ref", &ConstitutiveModel::T_ref)
      .def_readwrite("lam", &ConstitutiveModel::lambda)
      .def_readwrite("alpha", &ConstitutiveModel::alpha)
      .def_readwrite("d", &ConstitutiveModel::d)
      .def_property_readonly("n_species", &ConstitutiveModel::n_species)
      .def("temperature", &ConstitutiveModel::temperature, py::arg("s"))
      .def("entropy_for_temperature", &ConstitutiveModel::entropy_for_temperature, py::arg("T"));

  m.def(
      "energy_density",
      [](const ConstitutiveModel& model, const std::vector<double>& s,
         const std::vector<std::vector<double>>& c) {
        return energy_density(make_state(s, c), model).values();
      },
      py::arg("model"), py::arg("s"), py::arg("c") = std::vector<std::vector<double>>{});

  m.def(
      "co_energy",
      [](const ConstitutiveModel& model, const std::vector<double>& s,
         const std::vector<std::vector<double>>& c) {
        const CoEnergyFields e = co_energy(make_state(s, c), model);
        std::vector<std::vector<double>> mu;
        for (const auto& f : e.chemical_potentials) {
          mu.push_back(f.values());
        }
        return py::make_tuple(e.temperature.values(), mu);
      },
      py::arg("model"), py::arg("s"), py::arg("c") = std::vector<std::vector<double>>{},
      "Temperature and chemical potentials per cell.");

  m.def(
      "skew_defect",
      [](const MimeticGrid& g, const ConstitutiveModel& model, const std::vector<double>& s,
         const std::vector<std::vector<double>>& c) {
        const ThermoState st = make_state(s, c);
        validate_state(st, model, g);
        const CoEnergyFields e = co_energy(st, model);
        // Boundary-adjacent values as traces keep every face gradient finite.
        Traces tr{adjacent_values(g, e.temperature), {}};
        for (const auto& mu : e.chemical_potentials) {
          tr.chemical_potentials.push_back(adjacent_values(g, mu));
        }
        const Modulators mods = modulators(g, e, driving_forces(g, e, tr), model, tr);
        return skew_defect(g, assemble_dense(g, mods));
      },
      py::arg("grid"), py::arg("model"), py::arg("s"), py::arg("c") = std::vector<std::vector<double>>{},
      "||A + A^T|| / ||A|| of the assembled structure operator at the given state.");

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("name", &Scenario::name)
      .def_readwrite("model", &Scenario::model)
      .def_property_readonly("grid", [](const Scenario& sc) { return sc.grid.build(); })
      .def_property(
          "dt", [](const Scenario& sc) { return sc.integrator.dt; },
          [](Scenario& sc, double dt) { sc.integrator.dt = dt; })
      .def_property(
          "t_end", [](const Scenario& sc) { return sc.integrator.t_end; },
          [](Scenario& sc, double t) { sc.integrator.t_end = t; })
      .def_property_readonly("scheme", [](const Scenario& sc) { return scheme_name(sc.integrator.scheme); })
      .def("validate", &Scenario::validate)
      .def("to_json", &serialize_scenario);

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("text"));

  m.def(
      "run_scenario",
      [](const Scenario& sc, const std::filesystem::path& directory, std::optional<double> dt,
         std::optional<double> t_end, std::optional<std::string> scheme) {
        RunOverrides ov;
        ov.dt = dt;
        ov.t_end = t_end;
        if (scheme) {
          ov.scheme = parse_scheme(*scheme);
        }
        const Scenario effective = apply_overrides(sc, ov);
        std::ostringstream log;
        RunSummary s;
        {
          py::gil_scoped_release release;
          s = run_scenario(effective, directory, log);
        }
        py::dict out;
        out["status"] = s.status;
        out["diagnostic"] = s.diagnostic;
        out["steps"] = s.steps;
        out["t_final"] = s.t_final;
        out["max_first_law_residual"] = s.max_first_law_residual;
        out["max_second_law_residual"] = s.max_second_law_residual;
        out["min_sigma"] = s.min_sigma;
        out["mass_drift"] = s.mass_drift;
        out["entropy_nondecreasing"] = s.entropy_nondecreasing;
        out["checks"] = checks_to_list(s.checks);
        out["warnings"] = s.warnings;
        out["passed"] = s.passed;
        out["exit_code"] = exit_code(s);
        out["log"] = log.str();
        return out;
      },
      py::arg("scenario"), py::arg("directory"), py::arg("dt") = py::none(),
      py::arg("t_end") = py::none(), py::arg("scheme") = py::none(),
      "Integrates the scenario, writes the run directory and returns the summary.");

  m.def(
      "audit_run",
      [](const std::filesystem::path& directory) {
        std::ostringstream log;
        const AuditResult a = audit_run(directory, log);
        py::dict out;
        out["max_first_law_residual"] = a.max_first_law_residual;
        out["max_second_law_residual"] = a.max_second_law_residual;
        out["min_sigma"] = a.min_sigma;
        out["snapshot_mismatch"] = a.snapshot_mismatch;
        out["residual_mismatch"] = a.residual_mismatch;
        out["snapshots_checked"] = a.snapshots_checked;
        out["checks"] = checks_to_list(a.checks);
        out["passed"] = a.passed;
        out["log"] = log.str();
        return out;
      },
      py::arg("directory"));

  m.def(
      "synthesize_ports",
      [](const Eigen::MatrixXd& P0, const Eigen::MatrixXd& P1, const Eigen::MatrixXd& G0,
         const Eigen::MatrixXd& G1, double g_s, const Eigen::MatrixXd& Xi1, const Eigen::MatrixXd& Xi2) {
        StructureMatrices1D sm{P0, P1, G0, G1, g_s};
        const PortSynthesis ps = synthesize_ports(sm, Xi1, Xi2);
        py::dict out;
        out["Pe"] = ps.Pe;
        out["rank"] = ps.rank;
        out["basis_columns"] = ps.basis_columns;
        out["W_B"] = ps.W_B;
        out["W_C"] = ps.W_C;
        return out;
      },
      py::arg("P0"), py::arg("P1"), py::arg("G0"), py::arg("G1"), py::arg("g_s"), py::arg("Xi1"),
      py::arg("Xi2"), "Boundary port matrices W_B and W_C for the 1D structure.");
}
