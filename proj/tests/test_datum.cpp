#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mildns/datum.hpp"
#include "mildns/error.hpp"

using namespace mildns;

TEST_CASE("Taylor-Green samples match the closed form") {
  const double L = 2.0 * std::numbers::pi;
  const Lattice lat(2, 16, L);
  const Field u = realize_datum(lat, DatumSpec::taylor_green(1.5));
  int idx[2];
  for (std::size_t i = 0; i < lat.size(); i += 7) {
    lat.unflatten(i, idx);
    const double x = lat.coordinate(idx[0]), y = lat.coordinate(idx[1]);
    CHECK(u.values(0)[i] == doctest::Approx(1.5 * std::sin(x) * std::cos(y)));
    CHECK(u.values(1)[i] == doctest::Approx(-1.5 * std::cos(x) * std::sin(y)));
  }
  CHECK(max_abs(divergence(u)) < 1e-12);
  const Field u3 = realize_datum(Lattice(3, 8, L), DatumSpec::taylor_green());
  CHECK(max_abs(divergence(u3)) < 1e-12);
}

TEST_CASE("Gaussian has unit mass and the closed-form L2 norm") {
  const Lattice lat(2, 256, 40.0);
  const Field g = realize_scalar(lat, DatumSpec::gaussian(1.0));
  double mass = 0.0, l2 = 0.0;
  for (double v : g.values(0)) {
    mass += v * lat.cell_volume();
    l2 += v * v * lat.cell_volume();
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::sqrt(l2) == doctest::Approx(1.0 / std::sqrt(8.0 * std::numbers::pi)).epsilon(1e-10));
}

TEST_CASE("single mode is solenoidal and resolved") {
  const Lattice lat(3, 16, 2.0);
  const Field u = realize_datum(lat, DatumSpec::single_mode({1, 2, 0}));
  CHECK(max_abs(divergence(u)) < 1e-12);
  double peak = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i)
    peak = std::max(peak, std::hypot(u.values(0)[i], u.values(1)[i], u.values(2)[i]));
  CHECK(peak == doctest::Approx(1.0));
  CHECK_THROWS_AS(realize_datum(lat, DatumSpec::single_mode({8, 0, 0})), ConfigError);
  CHECK_THROWS_AS(realize_datum(lat, DatumSpec::single_mode({0, 0, 0})), ConfigError);
}

TEST_CASE("power law profile and cutoffs") {
  const Lattice lat(2, 64, 8.0);
  const Field f = realize_scalar(lat, DatumSpec::power_law(1.0, 0.5, 2.0));
  CHECK(f.values(0)[0] == 0.0);
  int idx[2] = {4, 0};  // |x| = 0.5
  CHECK(f.values(0)[lat.flatten(idx)] == doctest::Approx(2.0));
  CHECK_THROWS_AS(realize_scalar(lat, DatumSpec::power_law(1.0, 0.5, 5.0)), ConfigError);
  CHECK_THROWS_AS(realize_scalar(lat, DatumSpec::power_law(1.0, 2.0, 1.0)), ConfigError);
  CHECK_THROWS_AS(realize_scalar(lat, DatumSpec::power_law(-1.0, 0.5, 1.0)), ConfigError);
}

TEST_CASE("random band is reproducible, normalized and band limited") {
  const Lattice lat(2, 32, 2.0 * std::numbers::pi);
  auto spec = DatumSpec::random_band(42, 2.0, 5.0, 0.3);
  spec.solenoidal();
  const Field a = realize_datum(lat, spec);
  const Field b = realize_datum(lat, spec);
  CHECK(max_abs(a - b) == 0.0);
  double ms = 0.0;
  for (double v : a.all_values()) ms += v * v;
  CHECK(std::sqrt(ms / lat.size()) == doctest::Approx(0.3));
  CHECK(max_abs(divergence(a)) < 1e-12);
  const Field s = to_spectral(a);
  int idx[2];
  for (std::size_t i = 0; i < lat.size(); ++i) {
    lat.unflatten(i, idx);
    const double m = std::hypot(lat.mode_index(idx[0]), lat.mode_index(idx[1]));
    if (m < 2.0 || m > 5.0) {
      CHECK(std::abs(s.coeffs(0)[i]) < 1e-14);
    }
  }
  spec.seed = 43;
  CHECK(max_abs(realize_datum(lat, spec) - a) > 0.01);
  CHECK_THROWS_AS(realize_datum(lat, DatumSpec::random_band(1, 2.0, 16.0)), ConfigError);
}

TEST_CASE("datum kind names round trip") {
  for (auto k : {DatumSpec::Kind::gaussian, DatumSpec::Kind::taylor_green,
                 DatumSpec::Kind::single_mode, DatumSpec::Kind::power_law,
                 DatumSpec::Kind::random_band})
    CHECK(datum_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(datum_kind_from_string("vortex"), ConfigError);
}
