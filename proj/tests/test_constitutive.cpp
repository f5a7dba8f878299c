#include <cmath>
#include <limits>

#include <doctest.h>

#include "iphs/constitutive.hpp"
#include "iphs/error.hpp"
#include "support.hpp"

using namespace iphs;

namespace {

ThermoState make_state(std::vector<std::vector<double>> c, std::vector<double> s) {
  ThermoState st;
  for (auto& f : c) {
    st.concentrations.emplace_back(std::move(f));
  }
  st.entropy_density = CellField(std::move(s));
  return st;
}

ConstitutiveModel model_with(double c_v, double T_ref, std::vector<double> alpha) {
  ConstitutiveModel m;
  m.c_v = c_v;
  m.T_ref = T_ref;
  m.lambda = 1.0;
  m.d.assign(alpha.size(), 1.0);
  m.alpha = std::move(alpha);
  return m;
}

}  // namespace

TEST_SUITE("constitutive") {

TEST_CASE("energy density closed-form values") {
  SUBCASE("zero state gives the reference thermal energy") {
    const auto m = model_with(1.0, 1.0, {1.0});
    const auto u = energy_density(make_state({{0.0, 0.0, 0.0}}, {0.0, 0.0, 0.0}), m);
    for (double v : u) {
      CHECK(v == 1.0);
    }
  }
  SUBCASE("quadratic species part") {
    const auto m = model_with(1.0, 1.0, {3.0});
    const auto u = energy_density(make_state({{2.0}}, {0.0}), m);
    CHECK(u[0] == 7.0);
  }
  SUBCASE("thermal part against an extended-precision evaluation") {
    const auto m = model_with(2.0, 300.0, {});
    const auto u = energy_density(make_state({}, {0.5}), m);
    const long double oracle = 600.0L * std::exp(0.25L);
    CHECK(std::abs(u[0] - static_cast<double>(oracle)) <= 1e-15 * 770.0);
    CHECK(u[0] == doctest::Approx(770.4152500126449).epsilon(1e-15));
  }
}

TEST_CASE("non-finite fields are rejected") {
  const auto m = model_with(1.0, 1.0, {1.0});
  CHECK_THROWS_AS(energy_density(make_state({{0.0}}, {std::nan("")}), m), InvalidStateError);
  CHECK_THROWS_AS(energy_density(make_state({{INFINITY}}, {0.0}), m), InvalidStateError);
  const MimeticGrid g = MimeticGrid::line(2, 0.0, 1.0);
  CHECK_THROWS_AS(validate_state(make_state({{0.0, 0.0}}, {0.0, std::nan("")}), m, g), InvalidStateError);
  CHECK_THROWS_AS(validate_state(make_state({}, {0.0, 0.0}), m, g), DimensionError);
  CHECK_THROWS_AS(validate_state(make_state({{0.0}}, {0.0}), m, g), DimensionError);
}

TEST_CASE("co-energy variables") {
  const auto m = model_with(1.5, 300.0, {2.0});
  const auto e = co_energy(make_state({{1.0, 0.25}}, {0.0, 1.5 * std::log(2.0)}), m);
  CHECK(e.temperature[0] == 300.0);
  CHECK(e.temperature[1] == doctest::Approx(600.0).epsilon(1e-15));
  CHECK(e.chemical_potentials[0][0] == 2.0);
  CHECK(e.chemical_potentials[0][1] == 0.5);
  CHECK(m.entropy_for_temperature(m.temperature(0.3)) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(m.entropy_for_temperature(-1.0), ConstitutiveError);
}

TEST_CASE("co-energy is the gradient of the energy density") {
  // Central differences of u against the closed-form T and mu.
  test::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = test::random_model(rng, 2);
    const double s = rng.uniform(-1.0, 1.0);
    const double c0 = rng.uniform(-2.0, 2.0);
    const double c1 = rng.uniform(-2.0, 2.0);
    const auto u = [&](double a, double b, double ss) {
      return energy_density(make_state({{a}, {b}}, {ss}), m)[0];
    };
    const double h = 1e-5;
    const auto e = co_energy(make_state({{c0}, {c1}}, {s}), m);
    const double dT = (u(c0, c1, s + h) - u(c0, c1, s - h)) / (2 * h);
    const double dmu0 = (u(c0 + h, c1, s) - u(c0 - h, c1, s)) / (2 * h);
    const double dmu1 = (u(c0, c1 + h, s) - u(c0, c1 - h, s)) / (2 * h);
    CHECK(dT == doctest::Approx(e.temperature[0]).epsilon(1e-8));
    CHECK(dmu0 == doctest::Approx(e.chemical_potentials[0][0]).epsilon(1e-8));
    CHECK(dmu1 == doctest::Approx(e.chemical_potentials[1][0]).epsilon(1e-8));
  }
}

TEST_CASE("saturation reports the offending cell") {
  const auto m = model_with(1.0, 1.0, {});
  try {
    (void)co_energy(make_state({}, {0.0, 0.0, 1e4, 0.0}), m);
    FAIL("expected SaturationError");
  } catch (const SaturationError& e) {
    CHECK(e.cell() == 2);
  }
}

TEST_CASE("totals") {
  SUBCASE("uniform unit energy on a unit domain") {
    const MimeticGrid g = MimeticGrid::rectangle({4, 5}, {0.0, 0.0}, {1.0, 1.0});
    ThermoState st;
    st.entropy_density = CellField(g.num_cells(), 0.0);
    CHECK(total_energy(st, model_with(1.0, 1.0, {}), g) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(total_entropy(st, g) == 0.0);
    st.entropy_density = CellField(g.num_cells(), 3.0);
    CHECK(total_entropy(st, g) == doctest::Approx(3.0).epsilon(1e-15));
  }
  SUBCASE("two-cell quadrature") {
    const MimeticGrid g = MimeticGrid::line(2, 0.0, 1.0);
    const auto m = model_with(1.0, 1.0, {});
    const auto st = make_state({}, {std::log(2.0), std::log(4.0)});
    CHECK(total_energy(st, m, g) == doctest::Approx(3.0).epsilon(1e-15));
  }
  SUBCASE("random states against an extended-precision sum") {
    test::Rng rng(5);
    const MimeticGrid g = MimeticGrid::line(8, 0.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
      const auto m = test::random_model(rng, 1);
      ThermoState st;
      st.concentrations.push_back(rng.cells(g, -1.0, 1.0));
      st.entropy_density = rng.cells(g, -2.0, 2.0);
      long double U = 0.0L;
      long double S = 0.0L;
      long double N = 0.0L;
      for (std::size_t c = 0; c < g.num_cells(); ++c) {
        const long double ci = st.concentrations[0][c];
        const long double si = st.entropy_density[c];
        U += 0.5L * m.alpha[0] * ci * ci + m.c_v * m.T_ref * std::exp(si / m.c_v);
        S += si;
        N += ci;
      }
      U *= g.cell_volume();
      S *= g.cell_volume();
      N *= g.cell_volume();
      CHECK(std::abs(total_energy(st, m, g) - static_cast<double>(U)) <=
            1e-14 * std::abs(static_cast<double>(U)));
      CHECK(std::abs(total_entropy(st, g) - static_cast<double>(S)) <=
            1e-14 * std::max(1.0, std::abs(static_cast<double>(S))));
      CHECK(std::abs(total_moles(st, 0, g) - static_cast<double>(N)) <=
            1e-14 * std::max(1.0, std::abs(static_cast<double>(N))));
    }
  }
}

TEST_CASE("model validation") {
  auto m = model_with(1.0, 1.0, {1.0});
  CHECK_NOTHROW(m.validate());
  m.d.clear();
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = model_with(0.0, 1.0, {});
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

}
