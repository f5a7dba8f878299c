#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iphs/constitutive.hpp"
#include "iphs/error.hpp"
#include "iphs/mesh.hpp"
#include "iphs/operators.hpp"

namespace iphs {

/// Constant matrices of a 1D irreversible port-Hamiltonian structure with
/// n extensive variables (besides entropy) and m irreversible processes.
struct StructureMatrices1D {
  Eigen::MatrixXd P0;  // n x n, skew
  Eigen::MatrixXd P1;  // n x n, symmetric
  Eigen::MatrixXd G0;  // n x m
  Eigen::MatrixXd G1;  // n x m
  double g_s = 1.0;

  Eigen::Index n() const { return P1.rows(); }
  Eigen::Index m() const { return G1.cols(); }

  /// Checks shapes, P0 = -P0^T and P1 = P1^T (tolerance 1e-14 relative).
  void validate() const;

  /// Pure heat conduction written with one (inactive) extensive variable and
  /// one (inactive) process: P1 = G1 = 0, g_s = 1.
  static StructureMatrices1D heat();
  /// n-species diffusion with conduction: G1 = I_n, m = n, g_s = 1.
  static StructureMatrices1D conduction_diffusion(Eigen::Index n_species);
};

/// Scaling conventions for build_Pe. kDefinitionScale is the block matrix
/// as defined; kStatedHeatExampleScale reproduces the textbook statement
/// P_e = 1/2 [[0,1],[1,0]] of the heat example. Port synthesis uses the
/// former, which is the one for which y^T v equals the boundary power.
inline constexpr double kDefinitionScale = 1.0;
inline constexpr double kStatedHeatExampleScale = 0.5;

/// Symmetric (n+m+2) x (n+m+2) boundary matrix, stacked along the
/// modified effort [dH/dx (n); T; R1 T (m); r_s T]:
///   [ P1    0    G1  0   ]
///   [ 0     0    0   g_s ]
///   [ G1^T  0    0   0   ]
///   [ 0     g_s  0   0   ]
Eigen::MatrixXd build_Pe(const StructureMatrices1D& sm, double scale = kDefinitionScale);

struct XiResiduals {
  double skew;  // ||Xi2^T Xi1 + Xi1^T Xi2||_max
  double unit;  // ||Xi2^T Xi2 + Xi1^T Xi1 - I||_max
};
XiResiduals xi_residuals(const Eigen::MatrixXd& Xi1, const Eigen::MatrixXd& Xi2);
inline constexpr double kXiTolerance = 1e-13;

/// Raised when (Xi1, Xi2) fails the admissibility conditions.
class XiError : public ValidationError {
 public:
  XiError(const std::string& what, XiResiduals r) : ValidationError(what), residuals_(r) {}
  const XiResiduals& residuals() const noexcept { return residuals_; }

 private:
  XiResiduals residuals_;
};

struct PortSynthesis {
  Eigen::MatrixXd Pe;
  Eigen::Index rank = 0;
  std::vector<Eigen::Index> basis_columns;  // coordinates selected for M
  Eigen::MatrixXd M;                        // (n+m+2) x k
  Eigen::MatrixXd Mp;                       // (M^T M)^-1 M^T
  Eigen::MatrixXd Pep;                      // M^T Pe M
  Eigen::MatrixXd Xi1, Xi2;
  Eigen::MatrixXd W_B;                      // k x 2(n+m+2)
  Eigen::MatrixXd W_C;
  XiResiduals xi{0.0, 0.0};
};

/// Rank and column-space basis of P_e. The basis is taken from the
/// orthogonal projector onto range(P_e): its columns are chosen by
/// column-pivoted QR (threshold 1e-12 ||P_e||) and kept in ascending index
/// order. RankAmbiguityError when a singular value falls in
/// (1e-14, 1e-10) ||P_e||.
struct ColumnBasis {
  Eigen::Index rank = 0;
  std::vector<Eigen::Index> columns;
  Eigen::MatrixXd M;
};
ColumnBasis column_basis(const Eigen::MatrixXd& Pe);

PortSynthesis synthesize_ports(const Eigen::MatrixXd& Pe, const Eigen::MatrixXd& Xi1,
                               const Eigen::MatrixXd& Xi2);
PortSynthesis synthesize_ports(const StructureMatrices1D& sm, const Eigen::MatrixXd& Xi1,
                               const Eigen::MatrixXd& Xi2, double scale = kDefinitionScale);

/// e = [mu (n); T; R1 T (m); r_s T].
Eigen::VectorXd modified_effort(const Eigen::VectorXd& mu, double T, const Eigen::VectorXd& R1,
                                double r_s);

/// Modified effort at the left (Side::Low) or right (Side::High) end of a
/// 1D grid, using traces for mu and T and the boundary-face modulators for
/// R1 (= r_c) and r_s. Species beyond the state's count are zero.
Eigen::VectorXd modified_effort(const StructureMatrices1D& sm, const MimeticGrid& grid,
                                const Traces& traces, const Modulators& mods, Side at);

struct PortSignals {
  Eigen::VectorXd v;  // inputs
  Eigen::VectorXd y;  // outputs
};
PortSignals evaluate_ports(const PortSynthesis& ports, const Eigen::VectorXd& e_b,
                           const Eigen::VectorXd& e_a);

/// Collocated boundary pair: input u and output y per boundary face.
struct PortPair {
  BoundaryField input;
  BoundaryField output;
};

/// Energy pair (-f_s.n, T), entropy pair (-f_Q.n, 1/T) and one species pair
/// (-f_c_i.n, mu_i) per species, at every boundary face.
struct NdPortPairs {
  PortPair energy;
  PortPair entropy;
  std::vector<PortPair> species;
};

NdPortPairs nd_port_pairs(const MimeticGrid& grid, const Traces& traces, const Fluxes& fluxes);

/// Integral over the boundary of input * output.
double port_power(const MimeticGrid& grid, const PortPair& pair);
/// Energy supplied through all energy ports (heat plus every species),
/// inputs paired with the trace outputs.
double energy_port_power(const MimeticGrid& grid, const NdPortPairs& pairs);

/// Energy supplied as seen by the cell-centred balance: each energy-port
/// input is paired with the co-energy of the boundary-adjacent cell. This is
/// exactly sum_cells |cell| (mu . dc/dt + T ds/dt); it differs from
/// energy_port_power by O(h) through the trace/cell offset.
double balance_power(const MimeticGrid& grid, const NdPortPairs& pairs, const CoEnergyFields& coe);

struct PortRecord {
  double time = 0.0;
  Eigen::VectorXd v;  // empty unless 1D synthesis was requested
  Eigen::VectorXd y;
  NdPortPairs nd;
};

}  // namespace iphs
