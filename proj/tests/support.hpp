#pragma once

// Random grids, states and modulators shared by the unit and acceptance tests.

#include <cstdint>
#include <random>
#include <vector>

#include "iphs/constitutive.hpp"
#include "iphs/mesh.hpp"
#include "iphs/operators.hpp"

namespace iphs::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  CellField cells(const MimeticGrid& grid, double lo, double hi) {
    CellField out(grid.num_cells());
    for (double& v : out) {
      v = uniform(lo, hi);
    }
    return out;
  }

  FaceField faces(const MimeticGrid& grid, double lo, double hi) {
    FaceField out(grid.num_faces());
    for (double& v : out) {
      v = uniform(lo, hi);
    }
    return out;
  }

  BoundaryField boundary(const MimeticGrid& grid, double lo, double hi) {
    BoundaryField out(grid.num_boundary_faces());
    for (double& v : out) {
      v = uniform(lo, hi);
    }
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline ConstitutiveModel random_model(Rng& rng, std::size_t n_species) {
  ConstitutiveModel m;
  m.c_v = rng.uniform(0.5, 2.0);
  m.T_ref = rng.uniform(0.5, 2.0);
  m.lambda = rng.uniform(0.1, 1.0);
  for (std::size_t i = 0; i < n_species; ++i) {
    m.alpha.push_back(rng.uniform(0.5, 2.0));
    m.d.push_back(rng.uniform(0.1, 1.0));
  }
  return m;
}

/// Random co-energy fields, traces and the modulators they induce.
struct Instance {
  ConstitutiveModel model;
  CoEnergyFields coe;
  Traces traces;
  Modulators mods;
};

inline Instance random_instance(const MimeticGrid& grid, std::size_t n_species, Rng& rng) {
  Instance in;
  in.model = random_model(rng, n_species);
  in.coe.temperature = rng.cells(grid, 0.5, 2.0);
  in.traces.temperature = rng.boundary(grid, 0.5, 2.0);
  for (std::size_t i = 0; i < n_species; ++i) {
    in.coe.chemical_potentials.push_back(rng.cells(grid, -1.0, 1.0));
    in.traces.chemical_potentials.push_back(rng.boundary(grid, -1.0, 1.0));
  }
  const DrivingForces forces = driving_forces(grid, in.coe, in.traces);
  in.mods = modulators(grid, in.coe, forces, in.model, in.traces);
  return in;
}

/// Random effort fields e = [mu_1 .. mu_n, T] (not necessarily positive T).
inline CoEnergyFields random_effort(const MimeticGrid& grid, std::size_t n_species, Rng& rng) {
  CoEnergyFields e;
  e.temperature = rng.cells(grid, -1.0, 1.0);
  for (std::size_t i = 0; i < n_species; ++i) {
    e.chemical_potentials.push_back(rng.cells(grid, -1.0, 1.0));
  }
  return e;
}

inline std::vector<MimeticGrid> acceptance_grids() {
  return {MimeticGrid::line(16, 0.0, 1.0), MimeticGrid::line(32, 0.0, 1.0),
          MimeticGrid::rectangle({8, 8}, {0.0, 0.0}, {1.0, 1.0}),
          MimeticGrid::rectangle({16, 16}, {0.0, 0.0}, {1.0, 1.0})};
}

inline double max_abs_diff(const CellField& a, const CellField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(a[k] - b[k]));
  }
  return m;
}

}  // namespace iphs::test
