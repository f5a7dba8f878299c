#include "iphs/ports.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace iphs {

namespace {

double max_abs(const Eigen::MatrixXd& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

void require_shape(const Eigen::MatrixXd& A, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (A.rows() != rows || A.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << " x " << cols << ", got " << A.rows() << " x "
       << A.cols();
    throw DimensionError(os.str());
  }
}

}  // namespace

void StructureMatrices1D::validate() const {
  const Eigen::Index nn = n();
  const Eigen::Index mm = m();
  require_shape(P1, nn, nn, "P1");
  require_shape(P0, nn, nn, "P0");
  require_shape(G1, nn, mm, "G1");
  require_shape(G0, nn, mm, "G0");
  if (mm > nn) {
    throw ValidationError("the number of irreversible processes m must not exceed n");
  }
  if (!std::isfinite(g_s)) {
    throw ValidationError("g_s must be finite");
  }
  const double tol0 = 1e-14 * std::max(1.0, max_abs(P0));
  if (max_abs(P0 + P0.transpose()) > tol0) {
    throw ValidationError("P0 must be skew-symmetric");
  }
  const double tol1 = 1e-14 * std::max(1.0, max_abs(P1));
  if (max_abs(P1 - P1.transpose()) > tol1) {
    throw ValidationError("P1 must be symmetric");
  }
}

StructureMatrices1D StructureMatrices1D::heat() {
  StructureMatrices1D sm;
  sm.P0 = Eigen::MatrixXd::Zero(1, 1);
  sm.P1 = Eigen::MatrixXd::Zero(1, 1);
  sm.G0 = Eigen::MatrixXd::Zero(1, 1);
  sm.G1 = Eigen::MatrixXd::Zero(1, 1);
  sm.g_s = 1.0;
  return sm;
}

StructureMatrices1D StructureMatrices1D::conduction_diffusion(Eigen::Index n_species) {
  StructureMatrices1D sm;
  sm.P0 = Eigen::MatrixXd::Zero(n_species, n_species);
  sm.P1 = Eigen::MatrixXd::Zero(n_species, n_species);
  sm.G0 = Eigen::MatrixXd::Zero(n_species, n_species);
  sm.G1 = Eigen::MatrixXd::Identity(n_species, n_species);
  sm.g_s = 1.0;
  return sm;
}

Eigen::MatrixXd build_Pe(const StructureMatrices1D& sm, double scale) {
  sm.validate();
  const Eigen::Index n = sm.n();
  const Eigen::Index m = sm.m();
  const Eigen::Index size = n + m + 2;
  Eigen::MatrixXd Pe = Eigen::MatrixXd::Zero(size, size);
  Pe.block(0, 0, n, n) = scale * sm.P1;
  Pe.block(0, n + 1, n, m) = scale * sm.G1;
  Pe.block(n + 1, 0, m, n) = scale * sm.G1.transpose();
  Pe(n, n + m + 1) = scale * sm.g_s;
  Pe(n + m + 1, n) = scale * sm.g_s;
  return Pe;
}

XiResiduals xi_residuals(const Eigen::MatrixXd& Xi1, const Eigen::MatrixXd& Xi2) {
  if (Xi1.rows() != Xi1.cols() || Xi2.rows() != Xi2.cols() || Xi1.rows() != Xi2.rows()) {
    throw DimensionError("Xi1 and Xi2 must be square matrices of equal size");
  }
  const Eigen::MatrixXd skew = Xi2.transpose() * Xi1 + Xi1.transpose() * Xi2;
  const Eigen::MatrixXd unit = Xi2.transpose() * Xi2 + Xi1.transpose() * Xi1 -
                               Eigen::MatrixXd::Identity(Xi1.rows(), Xi1.cols());
  return {max_abs(skew), max_abs(unit)};
}

ColumnBasis column_basis(const Eigen::MatrixXd& Pe) {
  ColumnBasis basis;
  if (Pe.size() == 0 || max_abs(Pe) == 0.0) {
    basis.M = Eigen::MatrixXd::Zero(Pe.rows(), 0);
    return basis;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Pe, Eigen::ComputeFullU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double top = sv(0);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double ratio = sv(i) / top;
    if (ratio > 1e-14 && ratio < 1e-10) {
      std::ostringstream os;
      os << "rank of P_e is ambiguous: singular value ratio " << ratio << " at index " << i;
      throw RankAmbiguityError(os.str());
    }
    if (ratio > 1e-12) {
      ++basis.rank;
    }
  }
  const Eigen::MatrixXd Uk = svd.matrixU().leftCols(basis.rank);
  const Eigen::MatrixXd projector = Uk * Uk.transpose();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(projector);
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index i = 0; i < basis.rank; ++i) {
    basis.columns.push_back(perm(i));
  }
  std::sort(basis.columns.begin(), basis.columns.end());
  basis.M.resize(Pe.rows(), basis.rank);
  for (Eigen::Index j = 0; j < basis.rank; ++j) {
    basis.M.col(j) = projector.col(basis.columns[static_cast<std::size_t>(j)]);
  }
  return basis;
}

PortSynthesis synthesize_ports(const Eigen::MatrixXd& Pe, const Eigen::MatrixXd& Xi1,
                               const Eigen::MatrixXd& Xi2) {
  if (Pe.rows() != Pe.cols()) {
    throw DimensionError("P_e must be square");
  }
  PortSynthesis ps;
  ps.Pe = Pe;
  ColumnBasis basis = column_basis(Pe);
  ps.rank = basis.rank;
  ps.basis_columns = std::move(basis.columns);
  ps.M = std::move(basis.M);

  const Eigen::Index k = ps.rank;
  if (Xi1.rows() != k || Xi1.cols() != k || Xi2.rows() != k || Xi2.cols() != k) {
    std::ostringstream os;
    os << "Xi1 and Xi2 must be " << k << " x " << k << " (rank of P_e)";
    throw DimensionError(os.str());
  }
  ps.xi = xi_residuals(Xi1, Xi2);
  if (ps.xi.skew > kXiTolerance || ps.xi.unit > kXiTolerance) {
    std::ostringstream os;
    os << "Xi pair rejected: ||Xi2^T Xi1 + Xi1^T Xi2|| = " << ps.xi.skew
       << ", ||Xi2^T Xi2 + Xi1^T Xi1 - I|| = " << ps.xi.unit;
    throw XiError(os.str(), ps.xi);
  }
  ps.Xi1 = Xi1;
  ps.Xi2 = Xi2;

  const Eigen::Index size = Pe.rows();
  if (k == 0) {
    ps.Mp = Eigen::MatrixXd::Zero(0, size);
    ps.Pep = Eigen::MatrixXd::Zero(0, 0);
    ps.W_B = Eigen::MatrixXd::Zero(0, 2 * size);
    ps.W_C = Eigen::MatrixXd::Zero(0, 2 * size);
    return ps;
  }

  const Eigen::MatrixXd gram = ps.M.transpose() * ps.M;
  ps.Mp = gram.ldlt().solve(ps.M.transpose());
  ps.Pep = ps.M.transpose() * Pe * ps.M;

  const double s = 1.0 / std::sqrt(2.0);
  const Eigen::MatrixXd a = Xi1 * ps.Pep;
  const Eigen::MatrixXd b = Xi2 * ps.Pep;
  ps.W_B.resize(k, 2 * size);
  ps.W_C.resize(k, 2 * size);
  ps.W_B << s * (Xi2 + a) * ps.Mp, s * (Xi2 - a) * ps.Mp;
  ps.W_C << s * (Xi1 + b) * ps.Mp, s * (Xi1 - b) * ps.Mp;
  return ps;
}

PortSynthesis synthesize_ports(const StructureMatrices1D& sm, const Eigen::MatrixXd& Xi1,
                               const Eigen::MatrixXd& Xi2, double scale) {
  return synthesize_ports(build_Pe(sm, scale), Xi1, Xi2);
}

Eigen::VectorXd modified_effort(const Eigen::VectorXd& mu, double T, const Eigen::VectorXd& R1,
                                double r_s) {
  const Eigen::Index n = mu.size();
  const Eigen::Index m = R1.size();
  Eigen::VectorXd e(n + m + 2);
  e.head(n) = mu;
  e(n) = T;
  e.segment(n + 1, m) = R1 * T;
  e(n + m + 1) = r_s * T;
  return e;
}

Eigen::VectorXd modified_effort(const StructureMatrices1D& sm, const MimeticGrid& grid,
                                const Traces& traces, const Modulators& mods, Side at) {
  if (grid.dim() != 1) {
    throw DimensionError("modified_effort is defined on 1D grids");
  }
  const auto& bnd = grid.boundary_faces();
  const std::size_t k = at == Side::Low ? 0 : 1;
  const std::size_t face = bnd[k].face;

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(sm.n());
  for (Eigen::Index i = 0; i < sm.n(); ++i) {
    if (static_cast<std::size_t>(i) < traces.chemical_potentials.size()) {
      mu(i) = traces.chemical_potentials[static_cast<std::size_t>(i)][k];
    }
  }
  Eigen::VectorXd R1 = Eigen::VectorXd::Zero(sm.m());
  for (Eigen::Index i = 0; i < sm.m(); ++i) {
    if (static_cast<std::size_t>(i) < mods.r_c.size()) {
      R1(i) = mods.r_c[static_cast<std::size_t>(i)][face];
    }
  }
  return modified_effort(mu, traces.temperature[k], R1, mods.r_s[face]);
}

PortSignals evaluate_ports(const PortSynthesis& ports, const Eigen::VectorXd& e_b,
                           const Eigen::VectorXd& e_a) {
  if (e_b.size() != ports.Pe.rows() || e_a.size() != ports.Pe.rows()) {
    throw DimensionError("modified effort size does not match P_e");
  }
  Eigen::VectorXd stacked(e_b.size() + e_a.size());
  stacked << e_b, e_a;
  return {ports.W_B * stacked, ports.W_C * stacked};
}

NdPortPairs nd_port_pairs(const MimeticGrid& grid, const Traces& traces, const Fluxes& fluxes) {
  if (traces.chemical_potentials.size() != fluxes.species.size()) {
    throw DimensionError("nd_port_pairs: traces and fluxes disagree on species count");
  }
  NdPortPairs pairs;
  const BoundaryField fs_n = normal_trace(grid, fluxes.entropy);
  const BoundaryField fq_n = normal_trace(grid, fluxes.heat);
  const std::size_t nb = grid.num_boundary_faces();

  pairs.energy.input = BoundaryField(nb);
  pairs.energy.output = traces.temperature;
  pairs.entropy.input = BoundaryField(nb);
  pairs.entropy.output = BoundaryField(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    pairs.energy.input[k] = -fs_n[k];
    pairs.entropy.input[k] = -fq_n[k];
    pairs.entropy.output[k] = 1.0 / traces.temperature[k];
  }
  for (std::size_t i = 0; i < fluxes.species.size(); ++i) {
    const BoundaryField fc_n = normal_trace(grid, fluxes.species[i]);
    PortPair p;
    p.input = BoundaryField(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      p.input[k] = -fc_n[k];
    }
    p.output = traces.chemical_potentials[i];
    pairs.species.push_back(std::move(p));
  }
  return pairs;
}

double port_power(const MimeticGrid& grid, const PortPair& pair) {
  return boundary_integral(grid, pair.input, pair.output);
}

double energy_port_power(const MimeticGrid& grid, const NdPortPairs& pairs) {
  double total = port_power(grid, pairs.energy);
  for (const auto& p : pairs.species) {
    total += port_power(grid, p);
  }
  return total;
}

double balance_power(const MimeticGrid& grid, const NdPortPairs& pairs, const CoEnergyFields& coe) {
  if (pairs.species.size() != coe.n_species()) {
    throw DimensionError("balance_power: species count mismatch");
  }
  double total = boundary_integral(grid, pairs.energy.input, adjacent_values(grid, coe.temperature));
  for (std::size_t i = 0; i < pairs.species.size(); ++i) {
    total += boundary_integral(grid, pairs.species[i].input,
                               adjacent_values(grid, coe.chemical_potentials[i]));
  }
  return total;
}

}  // namespace iphs
