#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "iphs/constitutive.hpp"
#include "iphs/mesh.hpp"

namespace iphs {

/// Boundary values of the co-energy variables (T and every mu_i).
struct Traces {
  BoundaryField temperature;
  std::vector<BoundaryField> chemical_potentials;

  /// All-zero traces for `n_species` species.
  static Traces zero(const MimeticGrid& grid, std::size_t n_species);
};

/// Thermodynamic driving forces grad T and grad mu_i on faces.
struct DrivingForces {
  FaceField grad_T;
  std::vector<FaceField> grad_mu;
};

/// Modulating functions of the conduction and diffusion structure, on faces.
///   r_s   = (lambda / T_face^2) grad T
///   r_c_i = (d_i / T_face) grad mu_i
/// T_face is the harmonic mean of the adjacent cells, or the trace on the
/// boundary.
struct Modulators {
  FaceField T_face;
  FaceField r_s;
  std::vector<FaceField> r_c;
  double g_s = 1.0;

  std::size_t n_species() const noexcept { return r_c.size(); }
};

struct EntropyProduction {
  CellField sigma_s;
  std::vector<CellField> sigma_c;

  /// sigma_s + sum_i sigma_c_i
  CellField total() const;
};

struct Fluxes {
  FaceField heat;     // f_Q = -lambda grad T
  FaceField entropy;  // f_s = -T_face r_s
  std::vector<FaceField> species;  // f_c_i = -T_face r_c_i
};

/// Time derivatives of the extensive state.
struct Rates {
  std::vector<CellField> dc;
  CellField ds;
};

/// Optional extra blocks of the general structure. Both must be skew with
/// respect to the cell inner product for the conservation audits to hold;
/// none is set by default.
struct StructureBlocks {
  /// Pointwise skew coupling between species potentials (P0, n x n).
  Eigen::MatrixXd P0;
  /// Skew differential block acting on the species potentials.
  std::function<std::vector<CellField>(const std::vector<CellField>& mu)> J1;

  bool empty() const { return P0.size() == 0 && !J1; }
};

DrivingForces driving_forces(const MimeticGrid& grid, const CoEnergyFields& coe,
                             const Traces& traces);

Modulators modulators(const MimeticGrid& grid, const CoEnergyFields& coe,
                      const DrivingForces& forces, const ConstitutiveModel& model,
                      const Traces& traces);

/// Psi(e_T) = r_s . grad(e_T) + div(r_s e_T), with the face product
/// r_s . grad(e_T) averaged onto cells over interior faces and e_T
/// arithmetically interpolated to faces (trace on the boundary).
///
/// Discretely, for any theta, T and traces,
///   <theta, Psi T> + <T, Psi theta>
///     = sum_bnd g_s r_s.n (T_adj theta_bc + theta_adj T_bc) |face|
/// where _adj is the boundary-adjacent cell value, so the operator is
/// exactly skew for zero traces.
CellField apply_psi(const MimeticGrid& grid, const Modulators& mods, const CellField& e_T,
                    const BoundaryField& e_T_trace);

/// Full conduction-diffusion structure:
///   dc_i/dt = div(r_c_i e_T)
///   ds/dt   = sum_i r_c_i . grad(e_mu_i) + Psi(e_T)
CellField apply_species_coupling(const MimeticGrid& grid, const FaceField& r, const CellField& e_mu,
                                 const BoundaryField& e_mu_trace);
Rates apply_jglob(const MimeticGrid& grid, const Modulators& mods, const CoEnergyFields& e,
                  const Traces& traces, const StructureBlocks& blocks = {});

// Factorized form: the species block is G1 R1 and the entropy row is
// -R1* G1*, with
//   R1   : theta -> [r_c_1 theta, .., r_c_n theta]      (cells -> faces)
//   G1   : [f_1 .. f_n] -> [div f_1 .. div f_n]
//   G1*  : [m_1 .. m_n] -> [-grad m_1 .. -grad m_n]
//   R1*  : [g_1 .. g_n] -> sum_i r_c_i . g_i          (faces -> cells)
std::vector<FaceField> apply_r1(const MimeticGrid& grid, const Modulators& mods,
                                const CellField& theta, const BoundaryField& theta_trace);
std::vector<CellField> apply_g1(const MimeticGrid& grid, const std::vector<FaceField>& f);
std::vector<FaceField> apply_g1_adjoint(const MimeticGrid& grid, const std::vector<CellField>& m,
                                        const std::vector<BoundaryField>& m_traces);
CellField apply_r1_adjoint(const MimeticGrid& grid, const Modulators& mods,
                           const std::vector<FaceField>& g);

Rates factorized_jglob(const MimeticGrid& grid, const Modulators& mods, const CoEnergyFields& e,
                       const Traces& traces, const StructureBlocks& blocks = {});

/// Cell entropy productions, face products r . force averaged onto cells
/// over interior faces (the same stencil as the entropy row).
EntropyProduction entropy_production(const MimeticGrid& grid, const Modulators& mods,
                                     const DrivingForces& forces);

Fluxes fluxes(const Modulators& mods, const DrivingForces& forces, const ConstitutiveModel& model);

/// Dense matrix of apply_jglob with zero traces and frozen modulators,
/// assembled column by column from unit probes. Unknowns are ordered
/// [mu_1 cells, .., mu_n cells, T cells].
Eigen::MatrixXd assemble_dense(const MimeticGrid& grid, const Modulators& mods,
                               const StructureBlocks& blocks = {});

/// ||M A + (M A)^T||_inf / ||M A||_inf for the cell measure matrix M.
double skew_defect(const MimeticGrid& grid, const Eigen::MatrixXd& A);

/// Writes `row,col,value` for every nonzero entry.
void write_operator_csv(const Eigen::MatrixXd& A, const std::filesystem::path& path);

}  // namespace iphs
