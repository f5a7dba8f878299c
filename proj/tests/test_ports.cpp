#include <cmath>

#include <Eigen/Dense>
#include <doctest.h>

#include "iphs/error.hpp"
#include "iphs/ports.hpp"
#include "support.hpp"

using namespace iphs;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Eigen::MatrixXd heat_xi1() { return kInvSqrt2 * Eigen::MatrixXd{{1.0, 0.0}, {1.0, 0.0}}; }
Eigen::MatrixXd heat_xi2() { return kInvSqrt2 * Eigen::MatrixXd{{0.0, 1.0}, {0.0, -1.0}}; }

// Admissible pair for even k: Xi1 = Q / sqrt2, Xi2 = Q S / sqrt2 with Q
// orthogonal and S a block rotation by 90 degrees.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> random_xi(Eigen::Index k, test::Rng& rng) {
  Eigen::MatrixXd A(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      A(i, j) = rng.uniform(-1.0, 1.0);
    }
  }
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i + 1 < k; i += 2) {
    S(i, i + 1) = 1.0;
    S(i + 1, i) = -1.0;
  }
  return {kInvSqrt2 * Q, kInvSqrt2 * Q * S};
}

// 1D conduction profile T = T0 + g z with exact boundary traces.
struct Profile {
  MimeticGrid grid;
  Traces traces;
  Modulators mods;
  Fluxes fluxes;
};

Profile linear_profile(double lambda, double T0, double slope, std::size_t cells) {
  Profile p{MimeticGrid::line(cells, 0.0, 1.0), {}, {}, {}};
  ConstitutiveModel m;
  m.lambda = lambda;
  CoEnergyFields coe{CellField(cells), {}};
  for (std::size_t c = 0; c < cells; ++c) {
    coe.temperature[c] = T0 + slope * p.grid.cell_center(c)[0];
  }
  p.traces.temperature = BoundaryField(std::vector<double>{T0, T0 + slope});
  const auto forces = driving_forces(p.grid, coe, p.traces);
  p.mods = modulators(p.grid, coe, forces, m, p.traces);
  p.fluxes = fluxes(p.mods, forces, m);
  return p;
}

}  // namespace

TEST_SUITE("ports") {

TEST_CASE("boundary matrix") {
  SUBCASE("heat case, stated scaling") {
    const Eigen::MatrixXd Pe = build_Pe(StructureMatrices1D::heat(), kStatedHeatExampleScale);
    REQUIRE(Pe.rows() == 4);
    // Active coordinates are T (1) and r_s T (3).
    CHECK(Pe(1, 3) == 0.5);
    CHECK(Pe(3, 1) == 0.5);
    CHECK(Pe(1, 1) == 0.0);
    CHECK(Pe(3, 3) == 0.0);
    CHECK(Pe.row(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Pe.row(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(build_Pe(StructureMatrices1D::heat())(1, 3) == 1.0);
  }
  SUBCASE("all-zero structure") {
    StructureMatrices1D sm = StructureMatrices1D::heat();
    sm.g_s = 0.0;
    const Eigen::MatrixXd Pe = build_Pe(sm);
    CHECK(Pe.cwiseAbs().maxCoeff() == 0.0);
    CHECK(column_basis(Pe).rank == 0);
    const auto ps = synthesize_ports(sm, Eigen::MatrixXd(0, 0), Eigen::MatrixXd(0, 0));
    CHECK(ps.rank == 0);
    CHECK(ps.W_B.rows() == 0);
  }
  SUBCASE("random blocks give a symmetric matrix") {
    test::Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
      StructureMatrices1D sm = StructureMatrices1D::conduction_diffusion(3);
      for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
          sm.P1(i, j) = sm.P1(j, i) = rng.uniform(-1.0, 1.0);
        }
        for (Eigen::Index j = 0; j < 3; ++j) {
          sm.G1(i, j) = rng.uniform(-1.0, 1.0);
        }
      }
      sm.g_s = rng.uniform(0.5, 2.0);
      const Eigen::MatrixXd Pe = build_Pe(sm);
      CHECK((Pe - Pe.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("shape checks") {
    StructureMatrices1D sm = StructureMatrices1D::heat();
    sm.G1 = Eigen::MatrixXd::Zero(2, 1);
    CHECK_THROWS_AS(build_Pe(sm), DimensionError);
    sm = StructureMatrices1D::heat();
    sm.P0 = Eigen::MatrixXd{{1.0}};
    CHECK_THROWS_AS(sm.validate(), ValidationError);
  }
}

TEST_CASE("heat-case golden values") {
  for (double lambda : {1.0, 0.37}) {
    const Profile p = linear_profile(lambda, 300.0, 10.0, 16);
    const StructureMatrices1D sm = StructureMatrices1D::heat();
    const auto ps = synthesize_ports(sm, heat_xi1(), heat_xi2());
    CHECK(ps.rank == 2);
    const Eigen::VectorXd e_b = modified_effort(sm, p.grid, p.traces, p.mods, Side::High);
    const Eigen::VectorXd e_a = modified_effort(sm, p.grid, p.traces, p.mods, Side::Low);
    // Modified effort [mu; T; R1 T; r_s T] with inactive species entries.
    CHECK(e_b(1) == 310.0);
    CHECK(e_b(3) == doctest::Approx(lambda * 10.0 / 310.0).epsilon(1e-13));
    const PortSignals sig = evaluate_ports(ps, e_b, e_a);
    const double flux_b = lambda / 310.0 * 10.0;
    const double flux_a = lambda / 300.0 * 10.0;
    CHECK(std::abs(sig.v(0) - flux_b) <= 1e-12 * flux_b);
    CHECK(std::abs(sig.v(1) + flux_a) <= 1e-12 * flux_a);
    CHECK(std::abs(sig.y(0) - 310.0) <= 1e-12 * 310.0);
    CHECK(std::abs(sig.y(1) - 300.0) <= 1e-12 * 300.0);
  }
}

TEST_CASE("uniform state effort") {
  const Profile p = linear_profile(1.0, 2.0, 0.0, 8);
  const auto e = modified_effort(StructureMatrices1D::heat(), p.grid, p.traces, p.mods, Side::High);
  CHECK(e(1) == 2.0);
  CHECK(e(3) == 0.0);
}

TEST_CASE("Xi admissibility") {
  const StructureMatrices1D sm = StructureMatrices1D::heat();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  try {
    (void)synthesize_ports(sm, kInvSqrt2 * I, kInvSqrt2 * I);
    FAIL("expected XiError");
  } catch (const XiError& e) {
    CHECK(e.residuals().skew == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(synthesize_ports(sm, I, I), XiError);
  CHECK_THROWS_AS(synthesize_ports(sm, Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(3, 3)),
                  DimensionError);
  const auto r = xi_residuals(heat_xi1(), heat_xi2());
  CHECK(r.skew <= kXiTolerance);
  CHECK(r.unit <= kXiTolerance);
}

TEST_CASE("random full-rank synthesis against a direct evaluation") {
  test::Rng rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index k = 4;
    Eigen::MatrixXd Pe(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        Pe(i, j) = Pe(j, i) = rng.uniform(-1.0, 1.0);
      }
      Pe(i, i) += 3.0;
    }
    const auto [Xi1, Xi2] = random_xi(k, rng);
    const auto ps = synthesize_ports(Pe, Xi1, Xi2);
    REQUIRE(ps.rank == k);
    // Full rank: M spans everything, so M_p M = I and P_ep = M^T P_e M.
    const Eigen::MatrixXd Mp = (ps.M.transpose() * ps.M).inverse() * ps.M.transpose();
    const Eigen::MatrixXd Pep = ps.M.transpose() * Pe * ps.M;
    Eigen::MatrixXd WB(k, 2 * k);
    Eigen::MatrixXd WC(k, 2 * k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        double b_plus = 0.0;
        double b_minus = 0.0;
        double c_plus = 0.0;
        double c_minus = 0.0;
        for (Eigen::Index l = 0; l < k; ++l) {
          double xi1_pep = 0.0;
          double xi2_pep = 0.0;
          for (Eigen::Index q = 0; q < k; ++q) {
            xi1_pep += Xi1(i, q) * Pep(q, l);
            xi2_pep += Xi2(i, q) * Pep(q, l);
          }
          b_plus += (Xi2(i, l) + xi1_pep) * Mp(l, j);
          b_minus += (Xi2(i, l) - xi1_pep) * Mp(l, j);
          c_plus += (Xi1(i, l) + xi2_pep) * Mp(l, j);
          c_minus += (Xi1(i, l) - xi2_pep) * Mp(l, j);
        }
        WB(i, j) = kInvSqrt2 * b_plus;
        WB(i, j + k) = kInvSqrt2 * b_minus;
        WC(i, j) = kInvSqrt2 * c_plus;
        WC(i, j + k) = kInvSqrt2 * c_minus;
      }
    }
    CHECK((ps.W_B - WB).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((ps.W_C - WC).cwiseAbs().maxCoeff() <= 1e-13);

    // Power balance y^T v = (e_b^T P_e e_b - e_a^T P_e e_a) / 2.
    Eigen::VectorXd eb(k);
    Eigen::VectorXd ea(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      eb(i) = rng.uniform(-1.0, 1.0);
      ea(i) = rng.uniform(-1.0, 1.0);
    }
    const PortSignals sig = evaluate_ports(ps, eb, ea);
    const double power = 0.5 * (eb.dot(Pe * eb) - ea.dot(Pe * ea));
    CHECK(sig.y.dot(sig.v) == doctest::Approx(power).epsilon(1e-12));
  }
}

TEST_CASE("rank decisions") {
  Eigen::MatrixXd Pe = Eigen::MatrixXd::Zero(3, 3);
  Pe(0, 0) = 1.0;
  Pe(1, 1) = 1e-12;
  CHECK_THROWS_AS(column_basis(Pe), RankAmbiguityError);
  Pe(1, 1) = 1e-16;
  CHECK(column_basis(Pe).rank == 1);
  const ColumnBasis heat = column_basis(build_Pe(StructureMatrices1D::heat()));
  CHECK(heat.rank == 2);
  CHECK(heat.columns == std::vector<Eigen::Index>{1, 3});
}

TEST_CASE("collocated boundary pairs") {
  SUBCASE("insulated boundary has zero inputs") {
    const Profile p = linear_profile(1.0, 2.0, 0.0, 6);
    const auto pairs = nd_port_pairs(p.grid, p.traces, p.fluxes);
    for (double v : pairs.energy.input) {
      CHECK(v == 0.0);
    }
    for (double v : pairs.entropy.input) {
      CHECK(v == 0.0);
    }
  }
  SUBCASE("1D signs match the 1D port variables") {
    const double lambda = 1.0;
    const Profile p = linear_profile(lambda, 300.0, 10.0, 4);
    const auto pairs = nd_port_pairs(p.grid, p.traces, p.fluxes);
    // Boundary order: left (a, outward normal -1), right (b, +1).
    CHECK(pairs.energy.input[0] == doctest::Approx(-lambda * 10.0 / 300.0).epsilon(1e-13));
    CHECK(pairs.energy.input[1] == doctest::Approx(lambda * 10.0 / 310.0).epsilon(1e-13));
    CHECK(pairs.energy.output[0] == 300.0);
    CHECK(pairs.energy.output[1] == 310.0);
    CHECK(pairs.entropy.output[1] == doctest::Approx(1.0 / 310.0).epsilon(1e-15));
    // Heat enters at b and leaves at a: T (lambda/T) T' balances to zero.
    CHECK(std::abs(energy_port_power(p.grid, pairs)) <= 1e-13);
  }
  SUBCASE("power matches the continuous boundary term") {
    test::Rng rng(33);
    const MimeticGrid g = MimeticGrid::rectangle({5, 4}, {0.0, 0.0}, {1.0, 1.0});
    const auto in = test::random_instance(g, 2, rng);
    const auto forces = driving_forces(g, in.coe, in.traces);
    const auto fl = fluxes(in.mods, forces, in.model);
    const auto pairs = nd_port_pairs(g, in.traces, fl);
    // T (lambda/T n.grad T) + sum_i mu_i (d_i n.grad mu_i) per face, traces as outputs.
    double expected = 0.0;
    const auto& bnd = g.boundary_faces();
    for (std::size_t k = 0; k < bnd.size(); ++k) {
      const std::size_t f = bnd[k].face;
      const double T = in.traces.temperature[k];
      double face = T * (in.model.lambda / T) * bnd[k].normal * forces.grad_T[f];
      for (std::size_t i = 0; i < 2; ++i) {
        face += in.traces.chemical_potentials[i][k] * in.model.d[i] * bnd[k].normal *
                forces.grad_mu[i][f];
      }
      expected += face * bnd[k].measure;
    }
    CHECK(energy_port_power(g, pairs) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(balance_power(g, pairs, in.coe) != 0.0);
  }
}

}
