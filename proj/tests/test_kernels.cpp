#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "mildns/kernels.hpp"
#include "mildns/lattice.hpp"
#include "../src/mode_geometry.hpp"

using namespace mildns;
namespace K = mildns::kernels;

namespace {

std::vector<complex> random_coeffs(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<complex> v(n);
  for (auto& c : v) c = complex(nd(rng), nd(rng));
  return v;
}

bool same(const std::vector<complex>& a, const std::vector<complex>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("serial and omp kernels agree bit for bit") {
  K::set_thread_count(4);
  for (int d : {2, 3}) {
    const Lattice lat(d, d == 2 ? 64 : 16, 5.0);
    const auto g = detail::mode_geometry(lat);
    const std::size_t N = lat.size();

    auto a = random_coeffs(N * d, 1), b = a;
    K::serial::scale_by_heat(a, lat.wavenumber_sq(), 0.3);
    K::omp::scale_by_heat(b, lat.wavenumber_sq(), 0.3);
    CHECK(same(a, b));

    K::serial::scale_by_power(a, lat.wavenumber_sq(), -0.4);
    K::omp::scale_by_power(b, lat.wavenumber_sq(), -0.4);
    CHECK(same(a, b));

    K::serial::leray(a, g);
    K::omp::leray(b, g);
    CHECK(same(a, b));

    const auto t = random_coeffs(N * d * d, 2);
    std::vector<complex> o1(N * d), o2(N * d);
    K::serial::tensor_divergence(t, o1, g);
    K::omp::tensor_divergence(t, o2, g);
    CHECK(same(o1, o2));

    K::serial::composite(t, o1, g, 0.25, 0.1);
    K::omp::composite(t, o2, g, 0.25, 0.1);
    CHECK(same(o1, o2));

    K::serial::accumulate_heat(o1, a, lat.wavenumber_sq(), 0.7, 0.05);
    K::omp::accumulate_heat(o2, a, lat.wavenumber_sq(), 0.7, 0.05);
    CHECK(same(o1, o2));

    std::vector<double> re(N * d);
    for (std::size_t i = 0; i < re.size(); ++i) re[i] = a[i].real();
    for (double r : {1.0, 2.0, 3.5, 4.0}) {
      CHECK(K::serial::power_sum(re, r, 1.7) == K::omp::power_sum(re, r, 1.7));
    }
    CHECK(K::serial::max_abs(re) == K::omp::max_abs(re));

    std::vector<complex> c1(static_cast<std::size_t>(d * d * d * lat.n())), c2(c1.size());
    K::serial::composite_symbol_columns(g, 0.1, 0.5, c1);
    K::omp::composite_symbol_columns(g, 0.1, 0.5, c2);
    CHECK(same(c1, c2));

    const std::vector<double> radii{0.1, 0.5, 1.0, 1.2};
    std::vector<complex> r1(radii.size()), r2(radii.size());
    std::span<const complex> col(c1.data(), static_cast<std::size_t>(lat.n()));
    K::serial::ray_fourier(col, lat.wavenumbers(), radii, r1);
    K::omp::ray_fourier(col, lat.wavenumbers(), radii, r2);
    CHECK(same(r1, r2));
  }
}

TEST_CASE("power sum fast paths match the general path") {
  std::vector<double> v(10000);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double& x : v) x = u(rng);
  double s2 = 0.0, s4 = 0.0, s1 = 0.0;
  for (double x : v) {
    s1 += std::abs(x) / 2.0;
    s2 += x * x / 4.0;
    s4 += std::pow(x / 2.0, 4);
  }
  CHECK(K::serial::power_sum(v, 1.0, 2.0) == doctest::Approx(s1).epsilon(1e-12));
  CHECK(K::serial::power_sum(v, 2.0, 2.0) == doctest::Approx(s2).epsilon(1e-12));
  CHECK(K::serial::power_sum(v, 4.0, 2.0) == doctest::Approx(s4).epsilon(1e-12));
}

TEST_CASE("thread count can be changed") {
  K::set_thread_count(2);
  CHECK(K::thread_count() == 2);
  K::set_thread_count(1);
  CHECK(K::thread_count() == 1);
}
