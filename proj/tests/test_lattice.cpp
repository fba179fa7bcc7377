#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mildns/error.hpp"
#include "mildns/lattice.hpp"

using namespace mildns;

namespace {

Field random_field(const Lattice& lat, FieldKind kind, unsigned seed) {
  Field f(lat, kind);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (double& v : f.all_values()) v = nd(rng);
  return f;
}

}  // namespace

TEST_CASE("lattice validation") {
  CHECK_THROWS_AS(Lattice(2, 63, 1.0), ConfigError);
  CHECK_THROWS_AS(Lattice(4, 64, 1.0), ConfigError);
  CHECK_THROWS_AS(Lattice(2, 64, -1.0), ConfigError);
  CHECK_THROWS_AS(Lattice(2, 2, 1.0), ConfigError);
  const Lattice lat(3, 16, 2.0);
  CHECK(lat.size() == 4096);
  CHECK(lat.spacing() == doctest::Approx(0.125));
  CHECK(lat.max_valid_time() == doctest::Approx(0.25));
}

TEST_CASE("mode indexing and mirror") {
  const Lattice lat(2, 8, 2.0 * std::numbers::pi);
  CHECK(lat.mode_index(0) == 0);
  CHECK(lat.mode_index(3) == 3);
  CHECK(lat.mode_index(4) == -4);
  CHECK(lat.mode_index(7) == -1);
  CHECK(lat.odd_wavenumbers()[4] == 0.0);
  CHECK(lat.wavenumbers()[4] == doctest::Approx(-4.0));
  int idx[2] = {1, 6};
  const auto flat = lat.flatten(idx);
  int back[2];
  lat.unflatten(lat.mirror(flat), back);
  CHECK(back[0] == 7);
  CHECK(back[1] == 2);
}

TEST_CASE("transform round trip and Parseval") {
  for (int d : {2, 3}) {
    const Lattice lat(d, 16, 3.0);
    const Field f = random_field(lat, FieldKind::vector, 7);
    const Field s = to_spectral(f);
    CHECK(hermitian_defect(s) < 1e-14);
    const Field g = to_physical(s);
    double err = 0.0, l2_phys = 0.0, l2_spec = 0.0;
    for (std::size_t i = 0; i < f.all_values().size(); ++i) {
      err = std::max(err, std::abs(f.all_values()[i] - g.all_values()[i]));
      l2_phys += f.all_values()[i] * f.all_values()[i] * lat.cell_volume();
    }
    for (auto c : s.all_coeffs()) l2_spec += std::norm(c) * lat.volume();
    CHECK(err < 1e-13);
    CHECK(l2_spec == doctest::Approx(l2_phys).epsilon(1e-12));
  }
}

TEST_CASE("non-finite samples are rejected") {
  const Lattice lat(2, 8, 1.0);
  Field f(lat, FieldKind::scalar);
  f.values(0)[3] = std::nan("");
  CHECK_THROWS_AS(to_spectral(f), DataError);
}

TEST_CASE("spectral derivatives of a single mode") {
  const double L = 2.0 * std::numbers::pi;
  const Lattice lat(2, 32, L);
  Field f(lat, FieldKind::scalar);
  int idx[2];
  for (std::size_t i = 0; i < lat.size(); ++i) {
    lat.unflatten(i, idx);
    f.values(0)[i] = std::sin(2.0 * lat.coordinate(idx[0]) + 3.0 * lat.coordinate(idx[1]));
  }
  const Field g = gradient(f);
  double err = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    lat.unflatten(i, idx);
    const double c = std::cos(2.0 * lat.coordinate(idx[0]) + 3.0 * lat.coordinate(idx[1]));
    err = std::max(err, std::abs(g.values(0)[i] - 2.0 * c));
    err = std::max(err, std::abs(g.values(1)[i] - 3.0 * c));
  }
  CHECK(err < 1e-12);
  // div grad of sin mode = -|m|^2 sin
  const Field lap = divergence(g);
  double err2 = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) err2 = std::max(err2, std::abs(lap.values(0)[i] + 13.0 * f.values(0)[i]));
  CHECK(err2 < 1e-11);
}

TEST_CASE("field arithmetic") {
  const Lattice lat(2, 8, 1.0);
  const Field a = random_field(lat, FieldKind::vector, 1);
  const Field b = random_field(lat, FieldKind::vector, 2);
  const Field c = 2.0 * a + b - a;
  for (std::size_t i = 0; i < c.all_values().size(); ++i)
    CHECK(c.all_values()[i] == doctest::Approx(a.all_values()[i] + b.all_values()[i]));
  const Field other = random_field(Lattice(2, 16, 1.0), FieldKind::vector, 3);
  Field d = a;
  CHECK_THROWS_AS(d += other, ShapeError);
  CHECK_THROWS_AS(d += random_field(lat, FieldKind::scalar, 4), ShapeError);
}

TEST_CASE("tensor product layout") {
  const Lattice lat(3, 8, 1.0);
  const Field u = random_field(lat, FieldKind::vector, 5);
  const Field v = random_field(lat, FieldKind::vector, 6);
  const Field t = tensor_product(u, v);
  CHECK(t.components() == 9);
  CHECK(t.values(1 * 3 + 2)[10] == doctest::Approx(u.values(1)[10] * v.values(2)[10]));
}

TEST_CASE("dilation keeps samples and shrinks the box") {
  const Lattice lat(2, 16, 4.0);
  const Field u = random_field(lat, FieldKind::vector, 9);
  const Field w = dilate(u, 2);
  CHECK(w.lattice().box_len() == doctest::Approx(2.0));
  CHECK(w.values(1)[17] == doctest::Approx(2.0 * u.values(1)[17]));
  CHECK_THROWS(dilate(u, 0));
}
