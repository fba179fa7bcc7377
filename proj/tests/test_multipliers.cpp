#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mildns/error.hpp"
#include "mildns/multipliers.hpp"

using namespace mildns;

namespace {

Field random_field(const Lattice& lat, FieldKind kind, unsigned seed) {
  Field f(lat, kind);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (double& v : f.all_values()) v = nd(rng);
  return f;
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.all_values().size(); ++i)
    m = std::max(m, std::abs(a.all_values()[i] - b.all_values()[i]));
  return m;
}

Field cos_mode(const Lattice& lat, int m0, int m1) {
  Field f(lat, FieldKind::scalar);
  const double k = 2.0 * std::numbers::pi / lat.box_len();
  int idx[3];
  for (std::size_t i = 0; i < lat.size(); ++i) {
    lat.unflatten(i, idx);
    f.values(0)[i] = std::cos(k * (m0 * lat.coordinate(idx[0]) + m1 * lat.coordinate(idx[1])));
  }
  return f;
}

}  // namespace

TEST_CASE("heat flow damps a single mode exactly") {
  const Lattice lat(2, 32, 4.0);
  const Field f = cos_mode(lat, 2, -1);
  const double k2 = std::pow(2.0 * std::numbers::pi / 4.0, 2) * 5.0;
  const Field g = heat_flow(f, 0.03);
  Field expect = f;
  expect *= std::exp(-k2 * 0.03);
  CHECK(max_diff(g, expect) < 1e-13);
  CHECK_THROWS_AS(heat_flow(f, -1.0), DomainError);
}

TEST_CASE("heat semigroup") {
  const Lattice lat(3, 16, 2.0);
  const Field f = random_field(lat, FieldKind::vector, 1);
  CHECK(max_diff(heat_flow(heat_flow(f, 0.01), 0.02), heat_flow(f, 0.03)) < 1e-12);
  CHECK(max_diff(heat_flow(f, 0.0), f) < 1e-13);
}

TEST_CASE("fractional powers of a mode and composition") {
  const Lattice lat(2, 32, 2.0 * std::numbers::pi);
  const Field f = cos_mode(lat, 3, 4);
  Field expect = f;
  expect *= std::pow(5.0, 0.7);
  CHECK(max_diff(fractional_laplacian(f, 0.7), expect) < 1e-12);
  const Field g = random_field(lat, FieldKind::scalar, 2);
  // s = 0 is the identity, including the mean
  CHECK(max_diff(fractional_laplacian(g, 0.0), g) < 1e-13);
  // Lambda^2 = -Laplacian
  CHECK(max_diff(fractional_laplacian(f, 2.0), 25.0 * f) < 1e-10);
}

TEST_CASE("Riesz transforms sum to minus identity on mean-free fields") {
  const Lattice lat(2, 16, 3.0);
  Field g = random_field(lat, FieldKind::scalar, 3);
  // remove mean and Nyquist content so the identity is exact
  Field s = to_spectral(g);
  int idx[2];
  for (std::size_t i = 0; i < lat.size(); ++i) {
    lat.unflatten(i, idx);
    if (i == 0 || idx[0] == 8 || idx[1] == 8) s.coeffs(0)[i] = 0.0;
  }
  g = to_physical(s);
  Field acc(lat, FieldKind::scalar);
  for (int j = 0; j < 2; ++j) acc += riesz_transform(riesz_transform(g, j), j);
  acc += g;
  CHECK(max_abs(acc) < 1e-12);
  CHECK_THROWS_AS(riesz_transform(g, 2), DomainError);
}

TEST_CASE("Leray projection is idempotent and solenoidal") {
  for (int d : {2, 3}) {
    const Lattice lat(d, 16, 2.0);
    const Field u = random_field(lat, FieldKind::vector, 4);
    const Field pu = leray_project(u);
    CHECK(max_diff(leray_project(pu), pu) < 1e-12);
    CHECK(max_abs(divergence(pu)) < 1e-11);
    // gradients are annihilated
    const Field grad = gradient(random_field(lat, FieldKind::scalar, 5));
    CHECK(max_abs(leray_project(grad)) < 1e-11);
  }
}

TEST_CASE("composite equals the sequential chain") {
  for (int d : {2, 3}) {
    const Lattice lat(d, 16, 2.5);
    const Field u = random_field(lat, FieldKind::vector, 6);
    const Field v = random_field(lat, FieldKind::vector, 7);
    const Field F = tensor_product(u, v);
    const Field fused = composite_apply(F, 0.35, 0.02);
    const Field chain =
        fractional_laplacian(heat_flow(leray_project(divergence_of_tensor(F)), 0.02), 0.35);
    CHECK(max_diff(fused, chain) < 1e-10);
    CHECK(max_diff(MultiplierSymbol::composite(0.35, 0.02).apply(F), fused) == 0.0);
  }
  const Lattice lat(2, 8, 1.0);
  const Field F = tensor_product(random_field(lat, FieldKind::vector, 1),
                                 random_field(lat, FieldKind::vector, 2));
  CHECK_THROWS_AS(composite_apply(F, -1.0, 0.1), DomainError);
  CHECK_THROWS_AS(composite_apply(F, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(composite_apply(random_field(lat, FieldKind::vector, 3), 0.0, 0.1), ShapeError);
}

TEST_CASE("multipliers are linear") {
  const Lattice lat(2, 16, 2.0);
  const Field a = random_field(lat, FieldKind::vector, 8);
  const Field b = random_field(lat, FieldKind::vector, 9);
  CHECK(max_diff(leray_project(2.0 * a + b), 2.0 * leray_project(a) + leray_project(b)) < 1e-12);
  CHECK(max_diff(heat_flow(a + b, 0.1), heat_flow(a, 0.1) + heat_flow(b, 0.1)) < 1e-12);
}

TEST_CASE("spectral inputs stay spectral") {
  const Lattice lat(2, 16, 2.0);
  const Field a = to_spectral(random_field(lat, FieldKind::vector, 10));
  const Field h = heat_flow(a, 0.1);
  CHECK(!h.is_physical());
  CHECK(hermitian_defect(leray_project(a)) < 1e-14);
}

TEST_CASE("kernel profile decays at the predicted rate") {
  const Lattice lat(2, 512, 128.0);
  std::vector<double> radii;
  for (int i = 0; i < 24; ++i) radii.push_back(0.2 * std::pow(1.25, i));
  while (radii.back() > 32.0) radii.pop_back();
  const auto p = kernel_profile(0.0, lat, radii, 8.0);
  CHECK(p.tail_slope == doctest::Approx(-3.0).epsilon(0.05));
  CHECK(p.implied_constant > 0.0);
  CHECK(std::isfinite(p.implied_constant));
  // self-similarity is exact across the rescaled lattice
  const auto direct = kernel_profile_direct(0.0, lat, radii, 4.0);
  const auto scaled = kernel_profile_scaled(0.0, lat, radii, 4.0);
  for (std::size_t i = 0; i < radii.size(); ++i)
    CHECK(direct.kernel_values[i] == doctest::Approx(scaled.kernel_values[i]).epsilon(1e-9));
}

TEST_CASE("kernel profile input checks") {
  const Lattice coarse(2, 16, 64.0);
  const std::vector<double> r{1.0, 2.0};
  CHECK_THROWS_AS(kernel_profile(0.0, coarse, r), ConfigError);
  const Lattice lat(2, 256, 16.0);
  const std::vector<double> far{1.0, 5.0};
  CHECK_THROWS_AS(kernel_profile(0.0, lat, far), WindowError);
  CHECK_THROWS_AS(kernel_profile(-1.5, lat, r), DomainError);
  const std::vector<double> bad{2.0, 1.0};
  CHECK_THROWS_AS(kernel_profile(0.0, lat, bad), DomainError);
}

TEST_CASE("loglog slope recovers a power law") {
  std::vector<double> x, y;
  for (int i = 1; i <= 10; ++i) {
    x.push_back(i);
    y.push_back(3.0 * std::pow(i, -1.7));
  }
  CHECK(loglog_slope(x, y) == doctest::Approx(-1.7));
}
