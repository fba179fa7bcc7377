#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mildns/datum.hpp"
#include "mildns/error.hpp"
#include "mildns/multipliers.hpp"
#include "mildns/norms.hpp"

using namespace mildns;
using std::numbers::pi;

namespace {

Field random_field(const Lattice& lat, FieldKind kind, unsigned seed) {
  Field f(lat, kind);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (double& v : f.all_values()) v = nd(rng);
  return f;
}

Field mode_field(const Lattice& lat, int m0, int m1, bool sine) {
  Field f(lat, FieldKind::scalar);
  const double k = 2.0 * pi / lat.box_len();
  int idx[3];
  for (std::size_t i = 0; i < lat.size(); ++i) {
    lat.unflatten(i, idx);
    const double ph = k * (m0 * lat.coordinate(idx[0]) + m1 * lat.coordinate(idx[1]));
    f.values(0)[i] = sine ? std::sin(ph) : std::cos(ph);
  }
  return f;
}

// ||G_sigma||_{L^r} in d = 2, G_sigma = (4 pi sigma)^{-1} exp(-|x|^2 / (4 sigma))
double gaussian_norm(double sigma, double r) {
  return std::pow(4.0 * pi * sigma / r, 1.0 / r) / (4.0 * pi * sigma);
}

}  // namespace

TEST_CASE("exponent book") {
  const auto b = build_exponent_book(2, 2.0, 0.0, 4.0);
  CHECK(b.q == doctest::Approx(2.0));
  CHECK(b.alpha == doctest::Approx(0.5));
  CHECK(b.gamma == doctest::Approx(0.75));
  CHECK(b.theta == doctest::Approx(0.5));
  CHECK(b.young_h == doctest::Approx(4.0 / 3.0));
  CHECK(b.young_r == doctest::Approx(1.0));
  CHECK(b.critical());
  CHECK(b.n_target_admissible());
  CHECK(b.k_target_admissible());
  const auto c = build_exponent_book(3, 3.0, 0.0, 6.0);
  CHECK(c.q == doctest::Approx(3.0));
  CHECK(c.alpha == doctest::Approx(0.5));
  CHECK(c.critical());
  CHECK_THROWS_AS(build_exponent_book(2, 1.0, 0.0, 4.0), DomainError);
  CHECK_THROWS_AS(build_exponent_book(2, 2.0, 0.6, 8.0), DomainError);
  CHECK_THROWS_AS(build_exponent_book(2, 4.0, -0.6, 8.0), DomainError);
  CHECK_THROWS_AS(build_exponent_book(2, 2.0, 0.0, 2.0), DomainError);
  const auto back = exponent_book_from_json(to_json(b));
  CHECK(back.key() == b.key());
}

TEST_CASE("quadratic mesh") {
  const auto t = quadratic_mesh(2.0, 4);
  REQUIRE(t.size() == 4);
  CHECK(t[0] == doctest::Approx(0.125));
  CHECK(t[3] == 2.0);
  const auto t2 = quadratic_mesh(2.0, 8);
  for (std::size_t j = 0; j < 4; ++j) CHECK(t2[2 * j + 1] == doctest::Approx(t[j]).epsilon(1e-15));
}

TEST_CASE("Lebesgue norms") {
  const Lattice lat(2, 16, 3.0);
  Field one(lat, FieldKind::scalar);
  for (double& v : one.values(0)) v = 1.0;
  CHECK(lebesgue_norm(one, 1.0) == doctest::Approx(9.0));
  CHECK(lebesgue_norm(one, 2.0) == doctest::Approx(3.0));
  CHECK(lebesgue_norm(one, 3.0) == doctest::Approx(std::cbrt(9.0)));
  CHECK(lebesgue_norm(one, HUGE_VAL) == 1.0);
  CHECK_THROWS_AS(lebesgue_norm(one, 0.5), DomainError);
  // vector aggregation
  Field v(lat, FieldKind::vector);
  for (double& x : v.values(0)) x = 3.0;
  for (double& x : v.values(1)) x = -4.0;
  CHECK(lebesgue_norm(v, HUGE_VAL) == doctest::Approx(5.0));
  CHECK(lebesgue_norm(v, 2.0) == doctest::Approx(15.0));
}

TEST_CASE("Gaussian closed forms") {
  const Lattice lat(2, 256, 16.0 * pi);
  const Field g = realize_scalar(lat, DatumSpec::gaussian(1.0));
  CHECK(lebesgue_norm(g, 2.0) == doctest::Approx(1.0 / std::sqrt(8.0 * pi)).epsilon(1e-8));
  CHECK(lebesgue_norm(g, 4.0) == doctest::Approx(gaussian_norm(1.0, 4.0)).epsilon(1e-8));
  CHECK(lebesgue_norm(g, 1.0) == doctest::Approx(1.0).epsilon(1e-8));
  // heat flow maps G_1 to G_{1+t}
  const Field h = heat_flow(g, 2.0);
  const Field g3 = realize_scalar(lat, DatumSpec::gaussian(3.0));
  CHECK(max_abs(h - g3) < 1e-10);
}

TEST_CASE("Kato norm of a Gaussian heat trajectory") {
  const Lattice lat(2, 256, 16.0 * pi);
  Field u0(lat, FieldKind::vector);
  const Field g = realize_scalar(lat, DatumSpec::gaussian(1.0));
  std::ranges::copy(g.values(0), u0.values(0).begin());
  const auto mesh = quadratic_mesh(4.0, 8);
  const auto traj = heat_trajectory(u0, mesh);
  const auto rep = kato_norm(traj, 1.0, 2.0);
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const double t = mesh[j];
    CHECK(rep.per_node[j] == doctest::Approx(std::sqrt(t) * gaussian_norm(1.0 + t, 2.0)).epsilon(1e-6));
  }
  CHECK(kato_norm(zero_trajectory(lat, mesh), 1.0, 2.0).value == 0.0);
  // q_tilde = q: plain sup
  CHECK(kato_norm(traj, 2.0, 2.0).value == doctest::Approx(lebesgue_norm(traj.fields[0], 2.0)));
  CHECK_THROWS_AS(kato_norm(traj, 2.0, 1.5), DomainError);
}

TEST_CASE("L^r scaling under dilation") {
  const Lattice lat(2, 32, 2.0 * pi);
  const Field u = realize_datum(lat, DatumSpec::random_band(5, 1.0, 6.0).solenoidal());
  const Field w = dilate(u, 2);
  for (double r : {1.0, 2.0, 3.0, 4.0})
    CHECK(lebesgue_norm(w, r) ==
          doctest::Approx(std::pow(2.0, 1.0 - 2.0 / r) * lebesgue_norm(u, r)).epsilon(1e-10));
  // critical Sobolev norm, s = d/p - 1
  const double p = 4.0 / 3.0, s = 2.0 / p - 1.0;
  CHECK(sobolev_norm(w, s, p) == doctest::Approx(sobolev_norm(u, s, p)).epsilon(1e-6));
}

TEST_CASE("Sobolev norms") {
  const Lattice lat(2, 32, 2.0 * pi);
  const Field f = mode_field(lat, 1, 0, true);
  CHECK(sobolev_norm(f, 1.0, 2.0) == doctest::Approx(lebesgue_norm(f, 2.0)));
  CHECK(lebesgue_norm(f, 2.0) == doctest::Approx(std::sqrt(2.0) * pi));
  const Field g = random_field(lat, FieldKind::scalar, 4);
  CHECK(sobolev_norm(g, 0.0, 3.0) == doctest::Approx(lebesgue_norm(g, 3.0)));
  const Field m = mode_field(lat, 2, 1, false);
  CHECK(sobolev_norm(m, 0.5, 2.0) == doctest::Approx(std::pow(5.0, 0.25) * lebesgue_norm(m, 2.0)));
}

TEST_CASE("Besov heat norm of a single mode") {
  const Lattice lat(2, 32, 2.0 * pi);
  const Field f = mode_field(lat, 1, 1, false);
  const auto grid = dyadic_time_grid(1.0 / 64.0, lat.max_valid_time());
  const double beta = 0.25, k2 = 2.0;
  const double exact = std::pow(beta / (std::exp(1.0) * k2), beta) * lebesgue_norm(f, 2.0);
  const auto rep = besov_norm_heat(f, -0.5, 2.0, grid);
  CHECK(rep.value == doctest::Approx(exact).epsilon(0.02));
  CHECK(*rep.argmax_t == doctest::Approx(0.125));
  // off-grid optimum, still within the grid modulus
  const Field f2 = mode_field(lat, 1, 2, false);
  const double exact2 = std::pow(beta / (std::exp(1.0) * 5.0), beta) * lebesgue_norm(f2, 2.0);
  CHECK(besov_norm_heat(f2, -0.5, 2.0, grid).value == doctest::Approx(exact2).epsilon(0.02));
  // argmax invariance under rescaling
  const Field g = random_field(lat, FieldKind::scalar, 8);
  const auto a = besov_norm_heat(g, -0.5, 3.0, grid);
  const auto b = besov_norm_heat(3.7 * g, -0.5, 3.0, grid);
  CHECK(*a.argmax_t == *b.argmax_t);
  CHECK(b.value == doctest::Approx(3.7 * a.value).epsilon(1e-12));
  // monotone under heat flow
  CHECK(besov_norm_heat(heat_flow(g, 0.01), -0.5, 3.0, grid).value <= a.value * (1 + 1e-12));
  CHECK(besov_norm_heat(Field(lat, FieldKind::scalar), -0.5, 2.0, grid).value == 0.0);
  CHECK_THROWS_AS(besov_norm_heat(f, 0.0, 2.0, grid), DomainError);
  CHECK_THROWS_AS(besov_norm_heat(f, -0.5, 2.0, {1.0, 10.0}), WindowError);
}

TEST_CASE("dyadic grid is anchored") {
  const auto g = dyadic_time_grid(0.3, 2.0);
  CHECK(g.front() == doctest::Approx(std::exp2(-1.5)));
  CHECK(g.back() == doctest::Approx(2.0));
  CHECK(g.size() == 11);
}

TEST_CASE("N norm") {
  const Lattice lat(2, 16, 2.0 * pi);
  const Field f = realize_datum(lat, DatumSpec::random_band(3, 1.0, 5.0).solenoidal());
  const auto mesh = quadratic_mesh(1.0, 6);
  CHECK(n_norm(constant_trajectory(f, mesh), 0.3, 2.0).value ==
        doctest::Approx(sobolev_norm(f, 0.3, 2.0)));
  const auto rep = n_norm(heat_trajectory(f, mesh), 0.3, 2.0);
  CHECK(*rep.argmax_t == mesh.front());
  CHECK(n_norm(zero_trajectory(lat, mesh), 0.3, 2.0).value == 0.0);
}

TEST_CASE("vanishing at zero") {
  const Lattice lat(2, 64, 16.0);
  Field u0(lat, FieldKind::vector);
  const Field g = realize_scalar(lat, DatumSpec::gaussian(0.5));
  std::ranges::copy(g.values(0), u0.values(0).begin());
  const auto mesh = quadratic_mesh(1.0, 64);
  const auto heat = heat_trajectory(u0, mesh);
  // q = 1, q_tilde = 4, alpha = 2 (1 - 1/4)
  CHECK(vanishing_at_zero(heat, 0.75, 4.0).vanishing);
  const auto flat = constant_trajectory(u0, mesh);
  CHECK(vanishing_at_zero(flat, 0.2, 2.0).vanishing);
  CHECK_FALSE(vanishing_at_zero(flat, 0.0, 2.0).vanishing);
  CHECK_THROWS_AS(vanishing_at_zero(constant_trajectory(u0, quadratic_mesh(1.0, 16)), 0.2, 2.0),
                  ConfigError);
}

TEST_CASE("decay exponent fit") {
  std::vector<double> t, y;
  for (int i = 0; i < 12; ++i) {
    t.push_back(std::exp2(i * 0.5));
    y.push_back(2.5 * std::pow(t.back(), -0.75));
  }
  const auto fit = decay_exponent_fit(t, y, {0.0, 1e9});
  CHECK(std::abs(fit.slope + 0.75) < 1e-10);
  CHECK(fit.power_law);
  y[3] = -1.0;
  CHECK_THROWS_AS(decay_exponent_fit(t, y, {0.0, 1e9}), DataError);
  CHECK_THROWS_AS(decay_exponent_fit(t, y, {8.0, 16.0}), DataError);
}

TEST_CASE("heat decay of a Gaussian") {
  const Lattice lat(2, 512, 80.0);
  Field u0(lat, FieldKind::scalar);
  u0 = realize_scalar(lat, DatumSpec::gaussian(0.1));
  std::vector<double> t, y;
  for (int i = 0; i < 16; ++i) t.push_back(4.0 * std::pow(16.0, i / 15.0));
  for (double ti : t) {
    y.push_back(lebesgue_norm(heat_flow(u0, ti), 4.0));
    CHECK(y.back() == doctest::Approx(gaussian_norm(0.1 + ti, 4.0)).epsilon(1e-6));
  }
  const auto fit = decay_exponent_fit(t, y, {4.0, 64.0});
  CHECK(fit.slope == doctest::Approx(-0.75).epsilon(0.03));
}

TEST_CASE("single mode decay is not a power law") {
  const Lattice lat(2, 16, 2.0 * pi);
  const Field f = mode_field(lat, 1, 1, false);
  std::vector<double> t, y;
  for (int i = 0; i < 10; ++i) {
    t.push_back(0.1 * (i + 1));
    y.push_back(lebesgue_norm(heat_flow(f, t.back()), 2.0));
  }
  const auto fit = decay_exponent_fit(t, y, {0.0, 10.0});
  CHECK(fit.slope < -0.5);
  CHECK_FALSE(fit.power_law);
}

TEST_CASE("Sobolev embedding spot check") {
  const Lattice lat(2, 32, 2.0 * pi);
  std::vector<Field> corpus;
  for (int i = 0; i < 50; ++i)
    corpus.push_back(realize_scalar(lat, DatumSpec::random_band(100 + i, 1.0, 8.0)));
  const auto rep = sobolev_embedding_check(corpus, 1.0, 2.0, 0.5, 4.0);
  CHECK(std::isfinite(rep.max_ratio));
  CHECK(rep.stable);
  CHECK_THROWS_AS(sobolev_embedding_check(corpus, 1.0, 2.0, 0.5, 8.0 / 3.0), DomainError);
  CHECK_THROWS_AS(sobolev_embedding_check(corpus, 1.0, 2.0, 0.0, HUGE_VAL), DomainError);
}

TEST_CASE("norms are homogeneous and subadditive") {
  const Lattice lat(2, 16, 2.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cdist(-3.0, 3.0);
  const auto grid = dyadic_time_grid(0.01, 0.2);
  for (int i = 0; i < 20; ++i) {
    const Field f = random_field(lat, FieldKind::vector, 100 + i);
    const Field g = random_field(lat, FieldKind::vector, 200 + i);
    const double c = cdist(rng);
    for (double r : {1.0, 2.0, 3.0, HUGE_VAL}) {
      CHECK(lebesgue_norm(c * f, r) == doctest::Approx(std::abs(c) * lebesgue_norm(f, r)).epsilon(1e-12));
      CHECK(lebesgue_norm(f + g, r) <= lebesgue_norm(f, r) + lebesgue_norm(g, r) + 1e-12);
    }
    CHECK(sobolev_norm(c * f, 0.4, 2.5) ==
          doctest::Approx(std::abs(c) * sobolev_norm(f, 0.4, 2.5)).epsilon(1e-12));
    CHECK(besov_norm_heat(c * f, -0.5, 2.0, grid).value ==
          doctest::Approx(std::abs(c) * besov_norm_heat(f, -0.5, 2.0, grid).value).epsilon(1e-12));
  }
}

TEST_CASE("norm report JSON") {
  NormReport r;
  r.kind = "besov_heat";
  r.exponents = {{"s", -0.5}};
  r.value = 1.25;
  r.argmax_t = 0.5;
  const auto j = to_json(r);
  CHECK(j["kind"] == "besov_heat");
  CHECK(j["argmax_t"] == 0.5);
  CHECK(j["window_ok"] == true);
}
