#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "mildns/datum.hpp"
#include "mildns/io.hpp"
#include "mildns/picard.hpp"

using namespace mildns;
using std::numbers::pi;

TEST_CASE("scalar fixed point matches the quadratic formula") {
  FixedPointOptions opt;
  opt.tol = 1e-14;
  const auto r = scalar_fixed_point(0.25, 1.0, opt);
  CHECK(std::abs(r.solution - (std::sqrt(2.0) - 1.0) / 2.0) < 1e-12);
  CHECK(r.solution <= 0.5);
  CHECK(r.trace.converged);
  CHECK(r.trace.iteration_count <= 50);
  CHECK(r.trace.max_ratio() < 1.0);
  const auto z = scalar_fixed_point(0.0, 1.0, opt);
  CHECK(z.solution == 0.0);
  CHECK(z.trace.iteration_count == 1);
}

TEST_CASE("scalar fixed point outside the ball is reported as divergence") {
  FixedPointOptions opt;
  bool thrown = false;
  try {
    scalar_fixed_point(1.0, 1.0, opt);
  } catch (const DivergenceError& e) {
    thrown = true;
    CHECK(e.trace().iteration_count <= 20);
    CHECK_FALSE(e.trace().converged);
  }
  CHECK(thrown);
  // norm guard: y beyond 10 / eta
  CHECK_THROWS_AS(scalar_fixed_point(20.0, 1.0, opt), DivergenceError);
  opt.max_iter = 3;
  CHECK_THROWS_AS(scalar_fixed_point(0.25, 1.0, opt), NonConvergenceError);
}

TEST_CASE("smallness variants") {
  const Lattice lat(2, 32, 2.0 * pi);
  const auto book = build_exponent_book(2, 2.0, 0.0, 4.0);
  const Field zero(lat, FieldKind::vector);
  for (auto v : {SmallnessVariant::heat_sup, SmallnessVariant::critical, SmallnessVariant::besov}) {
    const auto r = smallness_lhs(zero, 1.0, book, v);
    CHECK(r.lhs == 0.0);
    CHECK(r.satisfied);
  }
  const Field u0 = realize_datum(lat, DatumSpec::single_mode({1, 1, 0}));
  const auto a = smallness_lhs(u0, 0.5, book, SmallnessVariant::critical);
  const auto b = smallness_lhs(u0, 1.0, book, SmallnessVariant::critical);
  CHECK(b.lhs >= a.lhs);
  const auto h = smallness_lhs(u0, 1.0, book, SmallnessVariant::heat_sup);
  const auto s = smallness_lhs(u0, 1.0, book, SmallnessVariant::besov);
  CHECK(s.lhs >= h.lhs * (1 - 1e-12));
  CHECK_THROWS_AS(smallness_lhs(u0, 100.0, book, SmallnessVariant::heat_sup), WindowError);
}

TEST_CASE("critical smallness is invariant under dyadic rescaling") {
  const Lattice lat(2, 32, 2.0 * pi);
  const auto book = build_exponent_book(2, 2.0, 0.0, 4.0);
  const Field u0 = realize_datum(lat, DatumSpec::random_band(9, 1.0, 8.0).solenoidal());
  const auto a = smallness_lhs(u0, 1.0, book, SmallnessVariant::critical);
  const auto b = smallness_lhs(dilate(u0, 2), 0.25, book, SmallnessVariant::critical);
  CHECK(b.lhs == doctest::Approx(a.lhs).epsilon(1e-12));
}

TEST_CASE("Taylor-Green is reproduced by the solver") {
  const Lattice lat(2, 64, 2.0 * pi);
  const Field u0 = realize_datum(lat, DatumSpec::taylor_green());
  const auto book = build_exponent_book(2, 2.0, 0.0, 4.0);
  SolveOptions opts;
  opts.override_smallness = true;
  const auto t0 = std::chrono::steady_clock::now();
  const auto sol = solve_mild(u0, book, MeshSpec{1.0, 32, 32}, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("Taylor-Green solve took " << secs << " s, iterations " << sol.trace.iteration_count);
  CHECK(sol.trace.converged);
  CHECK(sol.override_used);
  double worst = 0.0;
  for (std::size_t j = 0; j < sol.trajectory.size(); ++j) {
    Field exact = u0;
    exact *= std::exp(-2.0 * sol.trajectory.times[j]);
    worst = std::max(worst, lebesgue_norm(sol.trajectory.fields[j] - exact, 2.0) / lebesgue_norm(exact, 2.0));
  }
  CHECK(worst < 1e-10);
  // ladder and fluctuation closed forms
  const auto ladder = regularity_ladder(sol, {4.0, 8.0, 16.0});
  for (const auto& row : ladder) CHECK(row.bounded);
  const auto fl = fluctuation_analysis(sol, u0, {1.5, 2.0, 4.0});
  for (const auto& row : fl) CHECK(row.value < 1e-10);
  CHECK_THROWS_AS(regularity_ladder(sol, {2.0}), DomainError);
  CHECK_THROWS_AS(fluctuation_analysis(sol, u0, {0.9}), DomainError);
}

TEST_CASE("solver refuses data outside the smallness region without override") {
  const Lattice lat(2, 16, 2.0 * pi);
  const Field u0 = realize_datum(lat, DatumSpec::taylor_green());
  const auto book = build_exponent_book(2, 2.0, 0.0, 4.0);
  CHECK_THROWS_AS(solve_mild(u0, book, MeshSpec{1.0, 8, 8}), DomainError);
  Field bad = u0;
  bad.values(0)[3] += 1.0;
  SolveOptions o;
  o.override_smallness = true;
  CHECK_THROWS_AS(solve_mild(bad, book, MeshSpec{1.0, 8, 8}, o), DataError);
  const auto zero = solve_mild(Field(lat, FieldKind::vector), book, MeshSpec{1.0, 8, 8});
  CHECK(zero.trace.converged);
  CHECK(kato_norm(zero.trajectory, 2.0, 4.0).value == 0.0);
}

TEST_CASE("calibrated small-data solve") {
  const Lattice lat(2, 32, 2.0 * pi);
  auto book = build_exponent_book(2, 2.0, 0.0, 4.0);
  CalibrationSpec cs;
  cs.pairs = 20;
  cs.seed = 3;
  cs.k_max = 8.0;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cal = calibrate_thresholds(lat, book, cs);
  MESSAGE("calibration " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                          << " s, C_hat " << cal.c_hat << ", delta " << cal.delta << ", sigma "
                          << cal.sigma << ", besov constant " << cal.besov_constant);
  CHECK(cal.delta > 0.0);
  const auto again = calibrate_thresholds(lat, book, cs);
  CHECK(again.c_hat == cal.c_hat);
  cs.pairs = 10;
  CHECK_THROWS_AS(calibrate_thresholds(lat, book, cs), ConfigError);
  book = apply_calibration(book, cal);

  Field u0 = realize_datum(lat, DatumSpec::random_band(77, 1.0, 8.0).solenoidal());
  const double lhs = smallness_lhs(u0, 1.0, book, SmallnessVariant::heat_sup).lhs;
  u0 *= 0.5 * book.delta / lhs;
  const auto sol = solve_mild(u0, book, MeshSpec{1.0, 16, 16});
  MESSAGE("small solve iterations " << sol.trace.iteration_count << ", max ratio " << sol.trace.max_ratio());
  CHECK(sol.trace.converged);
  CHECK(sol.trace.iteration_count <= 30);
  CHECK(sol.trace.max_ratio() < 1.0);
  CHECK(integral_residual(sol) <= 1e-9 * std::max(1.0, kato_norm(sol.heat, 2.0, 4.0).value) * 1.5);
  // two-start uniqueness probe
  SolveOptions zs;
  zs.start_from_zero = true;
  const auto sol0 = solve_mild(u0, book, MeshSpec{1.0, 16, 16}, zs);
  CHECK(kato_norm(sol.trajectory - sol0.trajectory, 2.0, 4.0).value <= 10 * 1e-9);
  Field kick = realize_datum(lat, DatumSpec::random_band(78, 1.0, 8.0).solenoidal());
  kick *= 0.5 * kato_norm(sol.heat, 2.0, 4.0).value / kato_norm(heat_trajectory(kick, sol.heat.times), 2.0, 4.0).value;
  SolveOptions ks;
  ks.start_perturbation = kick;
  const auto solk = solve_mild(u0, book, MeshSpec{1.0, 16, 16}, ks);
  CHECK(solk.trace.iterations.front().difference > 1e-3 * kato_norm(sol.heat, 2.0, 4.0).value);
  CHECK(kato_norm(sol.trajectory - solk.trajectory, 2.0, 4.0).value <= 10 * 1e-9);
  for (const auto& f : sol.trajectory.fields) CHECK(max_abs(divergence(f)) <= 1e-10 * max_abs(f) * 32);
  // large data trips the guard
  Field big = u0;
  big *= 100.0;
  SolveOptions ov;
  ov.override_smallness = true;
  CHECK_THROWS_AS(solve_mild(big, book, MeshSpec{1.0, 16, 16}, ov), DivergenceError);

  const auto dir = std::filesystem::temp_directory_path() / "mildns_test_solution";
  write_solution(dir, sol);
  const Field back = io::read_field(dir / "node_0003.bin");
  CHECK(max_abs(back - sol.trajectory.fields[3]) == 0.0);
  save_calibration(dir / "cal.json", cal);
  CHECK(load_calibration(dir / "cal.json").c_hat == cal.c_hat);
  std::filesystem::remove_all(dir);
}
