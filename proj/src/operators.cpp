#include "iphs/operators.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "iphs/error.hpp"

namespace iphs {

namespace {

FaceField hadamard(const FaceField& a, const FaceField& b) {
  FaceField out(a.size());
  for (std::size_t f = 0; f < a.size(); ++f) {
    out[f] = a[f] * b[f];
  }
  return out;
}

void require_species(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    std::ostringstream os;
    os << what << ": expected " << expected << " species, got " << got;
    throw DimensionError(os.str());
  }
}

}  // namespace

Traces Traces::zero(const MimeticGrid& grid, std::size_t n_species) {
  Traces t;
  t.temperature = BoundaryField(grid.num_boundary_faces());
  t.chemical_potentials.assign(n_species, BoundaryField(grid.num_boundary_faces()));
  return t;
}

CellField EntropyProduction::total() const {
  CellField out = sigma_s;
  for (const auto& s : sigma_c) {
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] += s[c];
    }
  }
  return out;
}

DrivingForces driving_forces(const MimeticGrid& grid, const CoEnergyFields& coe,
                             const Traces& traces) {
  require_species(coe.n_species(), traces.chemical_potentials.size(), "driving_forces");
  DrivingForces forces;
  forces.grad_T = grad(grid, coe.temperature, traces.temperature);
  forces.grad_mu.reserve(coe.n_species());
  for (std::size_t i = 0; i < coe.n_species(); ++i) {
    forces.grad_mu.push_back(grad(grid, coe.chemical_potentials[i], traces.chemical_potentials[i]));
  }
  return forces;
}

Modulators modulators(const MimeticGrid& grid, const CoEnergyFields& coe,
                      const DrivingForces& forces, const ConstitutiveModel& model,
                      const Traces& traces) {
  require_species(model.n_species(), forces.grad_mu.size(), "modulators");
  Modulators mods;
  mods.T_face = face_harmonic_mean(grid, coe.temperature, traces.temperature);
  for (std::size_t f = 0; f < mods.T_face.size(); ++f) {
    const double T = mods.T_face[f];
    if (!std::isfinite(T) || !(T > 0.0)) {
      std::ostringstream os;
      os << "non-positive face temperature " << T << " at face " << f;
      throw ConstitutiveError(os.str());
    }
  }

  const std::size_t nf = grid.num_faces();
  mods.r_s = FaceField(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const double T = mods.T_face[f];
    mods.r_s[f] = model.lambda / (T * T) * forces.grad_T[f];
  }
  mods.r_c.reserve(model.n_species());
  for (std::size_t i = 0; i < model.n_species(); ++i) {
    FaceField r(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      r[f] = model.d[i] / mods.T_face[f] * forces.grad_mu[i][f];
    }
    mods.r_c.push_back(std::move(r));
  }
  return mods;
}

CellField apply_psi(const MimeticGrid& grid, const Modulators& mods, const CellField& e_T,
                    const BoundaryField& e_T_trace) {
  const FaceField g = grad(grid, e_T, e_T_trace);
  const FaceField e_face = face_mean(grid, e_T, e_T_trace);
  FaceField product(grid.num_faces());
  FaceField transported(grid.num_faces());
  for (std::size_t f = 0; f < grid.num_faces(); ++f) {
    const double r = mods.g_s * mods.r_s[f];
    product[f] = r * g[f];
    transported[f] = r * e_face[f];
  }
  CellField out = interior_face_average(grid, product);
  const CellField d = div(grid, transported);
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] += d[c];
  }
  return out;
}

CellField apply_species_coupling(const MimeticGrid& grid, const FaceField& r, const CellField& e_mu,
                                 const BoundaryField& e_mu_trace) {
  return interior_face_average(grid, hadamard(r, grad(grid, e_mu, e_mu_trace)));
}

namespace {

void add_blocks(const StructureBlocks& blocks, const std::vector<CellField>& mu,
                std::vector<CellField>& dc) {
  const std::size_t n = mu.size();
  if (blocks.P0.size() != 0) {
    if (static_cast<std::size_t>(blocks.P0.rows()) != n ||
        static_cast<std::size_t>(blocks.P0.cols()) != n) {
      throw DimensionError("P0 must be n_species x n_species");
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double p = blocks.P0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (p == 0.0) continue;
        for (std::size_t c = 0; c < dc[i].size(); ++c) {
          dc[i][c] += p * mu[j][c];
        }
      }
    }
  }
  if (blocks.J1) {
    const std::vector<CellField> extra = blocks.J1(mu);
    require_species(n, extra.size(), "J1 block");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < dc[i].size(); ++c) {
        dc[i][c] += extra[i][c];
      }
    }
  }
}

}  // namespace

Rates apply_jglob(const MimeticGrid& grid, const Modulators& mods, const CoEnergyFields& e,
                  const Traces& traces, const StructureBlocks& blocks) {
  const std::size_t n = mods.n_species();
  require_species(n, e.n_species(), "apply_jglob: co-energy");
  require_species(n, traces.chemical_potentials.size(), "apply_jglob: traces");

  const FaceField T_face = face_mean(grid, e.temperature, traces.temperature);
  Rates rates;
  rates.dc.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    rates.dc.push_back(div(grid, hadamard(mods.r_c[i], T_face)));
  }
  rates.ds = apply_psi(grid, mods, e.temperature, traces.temperature);
  if (n > 0) {
    // Species products are summed per face before averaging to cells.
    FaceField coupling(grid.num_faces());
    for (std::size_t i = 0; i < n; ++i) {
      const FaceField g = grad(grid, e.chemical_potentials[i], traces.chemical_potentials[i]);
      for (std::size_t f = 0; f < coupling.size(); ++f) {
        coupling[f] += mods.r_c[i][f] * g[f];
      }
    }
    const CellField avg = interior_face_average(grid, coupling);
    for (std::size_t c = 0; c < avg.size(); ++c) {
      rates.ds[c] += avg[c];
    }
  }
  if (!blocks.empty()) {
    add_blocks(blocks, e.chemical_potentials, rates.dc);
  }
  return rates;
}

std::vector<FaceField> apply_r1(const MimeticGrid& grid, const Modulators& mods,
                                const CellField& theta, const BoundaryField& theta_trace) {
  const FaceField theta_face = face_mean(grid, theta, theta_trace);
  std::vector<FaceField> out;
  out.reserve(mods.n_species());
  for (const auto& r : mods.r_c) {
    out.push_back(hadamard(r, theta_face));
  }
  return out;
}

std::vector<CellField> apply_g1(const MimeticGrid& grid, const std::vector<FaceField>& f) {
  std::vector<CellField> out;
  out.reserve(f.size());
  for (const auto& fi : f) {
    out.push_back(div(grid, fi));
  }
  return out;
}

std::vector<FaceField> apply_g1_adjoint(const MimeticGrid& grid, const std::vector<CellField>& m,
                                        const std::vector<BoundaryField>& m_traces) {
  require_species(m.size(), m_traces.size(), "apply_g1_adjoint");
  std::vector<FaceField> out;
  out.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    FaceField g = grad(grid, m[i], m_traces[i]);
    for (double& v : g) {
      v = -v;
    }
    out.push_back(std::move(g));
  }
  return out;
}

CellField apply_r1_adjoint(const MimeticGrid& grid, const Modulators& mods,
                           const std::vector<FaceField>& g) {
  require_species(mods.n_species(), g.size(), "apply_r1_adjoint");
  FaceField contracted(grid.num_faces());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t f = 0; f < contracted.size(); ++f) {
      contracted[f] += mods.r_c[i][f] * g[i][f];
    }
  }
  return interior_face_average(grid, contracted);
}

Rates factorized_jglob(const MimeticGrid& grid, const Modulators& mods, const CoEnergyFields& e,
                       const Traces& traces, const StructureBlocks& blocks) {
  const std::size_t n = mods.n_species();
  require_species(n, e.n_species(), "factorized_jglob: co-energy");
  require_species(n, traces.chemical_potentials.size(), "factorized_jglob: traces");

  Rates rates;
  rates.dc = apply_g1(grid, apply_r1(grid, mods, e.temperature, traces.temperature));
  const CellField adjoint_part = apply_r1_adjoint(
      grid, mods, apply_g1_adjoint(grid, e.chemical_potentials, traces.chemical_potentials));
  rates.ds = apply_psi(grid, mods, e.temperature, traces.temperature);
  for (std::size_t c = 0; c < rates.ds.size(); ++c) {
    rates.ds[c] -= adjoint_part[c];
  }
  if (!blocks.empty()) {
    add_blocks(blocks, e.chemical_potentials, rates.dc);
  }
  return rates;
}

EntropyProduction entropy_production(const MimeticGrid& grid, const Modulators& mods,
                                     const DrivingForces& forces) {
  require_species(mods.n_species(), forces.grad_mu.size(), "entropy_production");
  EntropyProduction sigma;
  FaceField heat(grid.num_faces());
  for (std::size_t f = 0; f < heat.size(); ++f) {
    heat[f] = mods.g_s * mods.r_s[f] * forces.grad_T[f];
  }
  sigma.sigma_s = interior_face_average(grid, heat);
  for (std::size_t i = 0; i < mods.n_species(); ++i) {
    sigma.sigma_c.push_back(interior_face_average(grid, hadamard(mods.r_c[i], forces.grad_mu[i])));
  }
  return sigma;
}

Fluxes fluxes(const Modulators& mods, const DrivingForces& forces, const ConstitutiveModel& model) {
  require_species(mods.n_species(), model.n_species(), "fluxes");
  const std::size_t nf = mods.T_face.size();
  Fluxes out;
  out.heat = FaceField(nf);
  out.entropy = FaceField(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    out.heat[f] = -model.lambda * forces.grad_T[f];
    out.entropy[f] = -mods.T_face[f] * mods.r_s[f];
  }
  for (const auto& r : mods.r_c) {
    FaceField fc(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      fc[f] = -mods.T_face[f] * r[f];
    }
    out.species.push_back(std::move(fc));
  }
  return out;
}

Eigen::MatrixXd assemble_dense(const MimeticGrid& grid, const Modulators& mods,
                               const StructureBlocks& blocks) {
  const std::size_t n = mods.n_species();
  const std::size_t cells = grid.num_cells();
  const std::size_t size = (n + 1) * cells;
  const Traces zero = Traces::zero(grid, n);

  CoEnergyFields e;
  e.temperature = CellField(cells);
  e.chemical_potentials.assign(n, CellField(cells));

  Eigen::MatrixXd A(size, size);
  for (std::size_t col = 0; col < size; ++col) {
    const std::size_t block = col / cells;
    const std::size_t cell = col % cells;
    CellField& probe = block < n ? e.chemical_potentials[block] : e.temperature;
    probe[cell] = 1.0;
    const Rates r = apply_jglob(grid, mods, e, zero, blocks);
    probe[cell] = 0.0;
    for (std::size_t b = 0; b <= n; ++b) {
      const CellField& out = b < n ? r.dc[b] : r.ds;
      for (std::size_t c = 0; c < cells; ++c) {
        A(static_cast<Eigen::Index>(b * cells + c), static_cast<Eigen::Index>(col)) = out[c];
      }
    }
  }
  return A;
}

double skew_defect(const MimeticGrid& grid, const Eigen::MatrixXd& A) {
  const Eigen::MatrixXd MA = grid.cell_volume() * A;
  const double norm = MA.cwiseAbs().rowwise().sum().maxCoeff();
  if (norm == 0.0) {
    return 0.0;
  }
  const Eigen::MatrixXd sym = MA + MA.transpose();
  return sym.cwiseAbs().rowwise().sum().maxCoeff() / norm;
}

void write_operator_csv(const Eigen::MatrixXd& A, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  out << "row,col,value\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (A(i, j) != 0.0) {
        out << i << ',' << j << ',' << A(i, j) << '\n';
      }
    }
  }
}

}  // namespace iphs
