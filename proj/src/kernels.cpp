#include "mildns/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <omp.h>

namespace mildns::kernels {

namespace {

constexpr complex kI{0.0, 1.0};

inline void odd_wavevector(const ModeGeometry& g, std::size_t flat, double* k) {
  const auto n = static_cast<std::size_t>(g.n);
  if (g.dim == 2) {
    k[0] = g.k_odd[flat / n];
    k[1] = g.k_odd[flat % n];
  } else {
    k[0] = g.k_odd[flat / (n * n)];
    k[1] = g.k_odd[(flat / n) % n];
    k[2] = g.k_odd[flat % n];
  }
}

inline double power_symbol(double ksq, double s) {
  if (s == 0.0) return 1.0;
  if (ksq == 0.0) return 0.0;
  return std::pow(ksq, 0.5 * s);
}

inline void leray_mode(const ModeGeometry& g, std::size_t flat, std::size_t stride, complex* v) {
  double k[3];
  odd_wavevector(g, flat, k);
  double kk = 0.0;
  complex kv = 0.0;
  for (int j = 0; j < g.dim; ++j) {
    kk += k[j] * k[j];
    kv += k[j] * v[j * stride];
  }
  if (kk == 0.0) return;
  const complex f = kv / kk;
  for (int j = 0; j < g.dim; ++j) v[j * stride] -= k[j] * f;
}

// P (i k . F) at one mode; F is read with the given component stride.
inline void projected_divergence_mode(const ModeGeometry& g, std::size_t flat, std::size_t stride,
                                      const complex* tensor, complex* out_mode) {
  const int d = g.dim;
  double k[3];
  odd_wavevector(g, flat, k);
  double kk = 0.0;
  complex div[3];
  for (int l = 0; l < d; ++l) {
    kk += k[l] * k[l];
    complex acc = 0.0;
    for (int m = 0; m < d; ++m) acc += k[m] * tensor[(l * d + m) * stride];
    div[l] = kI * acc;
  }
  if (kk == 0.0) {
    for (int l = 0; l < d; ++l) out_mode[l] = 0.0;
    return;
  }
  complex kdiv = 0.0;
  for (int l = 0; l < d; ++l) kdiv += k[l] * div[l];
  const complex f = kdiv / kk;
  for (int l = 0; l < d; ++l) out_mode[l] = div[l] - k[l] * f;
}

inline double chunk_power_sum(const double* v, std::size_t len, double r, double inv_scale) {
  double acc = 0.0;
  if (r == 2.0) {
    for (std::size_t i = 0; i < len; ++i) {
      const double x = v[i] * inv_scale;
      acc += x * x;
    }
  } else if (r == 1.0) {
    for (std::size_t i = 0; i < len; ++i) acc += std::abs(v[i]) * inv_scale;
  } else if (r == 4.0) {
    for (std::size_t i = 0; i < len; ++i) {
      const double x = v[i] * inv_scale;
      const double x2 = x * x;
      acc += x2 * x2;
    }
  } else {
    for (std::size_t i = 0; i < len; ++i) acc += std::pow(std::abs(v[i]) * inv_scale, r);
  }
  return acc;
}

inline std::size_t chunk_count(std::size_t len) {
  return (len + kReductionChunk - 1) / kReductionChunk;
}

inline void symbol_row(const ModeGeometry& g, double s, double t,
                       std::size_t i1, complex* row /* entries, stride 1 */) {
  const int d = g.dim;
  const auto n = static_cast<std::size_t>(g.n);
  const std::size_t inner = d == 2 ? n : n * n;
  const int entries = d * d * d;
  for (int e = 0; e < entries; ++e) row[e] = 0.0;
  double kt[3];
  kt[0] = g.k_odd[i1];
  for (std::size_t r = 0; r < inner; ++r) {
    const std::size_t flat = i1 * inner + r;
    if (d == 2) {
      kt[1] = g.k_odd[r];
    } else {
      kt[1] = g.k_odd[r / n];
      kt[2] = g.k_odd[r % n];
    }
    const double kk = g.ksq[flat];
    if (kk == 0.0) continue;
    const double h = power_symbol(kk, s) * std::exp(-kk * t);
    if (h == 0.0) continue;
    double ktt = 0.0;
    for (int j = 0; j < d; ++j) ktt += kt[j] * kt[j];
    for (int j = 0; j < d; ++j) {
      for (int l = 0; l < d; ++l) {
        const double p = (j == l ? 1.0 : 0.0) - (ktt > 0.0 ? kt[j] * kt[l] / ktt : 0.0);
        if (p == 0.0) continue;
        for (int m = 0; m < d; ++m) row[(j * d + l) * d + m] += kI * (h * p * kt[m]);
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// serial reference

namespace serial {

void scale_by_heat(std::span<complex> data, std::span<const double> ksq, double t) {
  const std::size_t n = ksq.size();
  for (std::size_t c = 0; c * n < data.size(); ++c)
    for (std::size_t i = 0; i < n; ++i) data[c * n + i] *= std::exp(-ksq[i] * t);
}

void scale_by_power(std::span<complex> data, std::span<const double> ksq, double s) {
  const std::size_t n = ksq.size();
  for (std::size_t c = 0; c * n < data.size(); ++c)
    for (std::size_t i = 0; i < n; ++i) data[c * n + i] *= power_symbol(ksq[i], s);
}

void leray(std::span<complex> vec, const ModeGeometry& g) {
  const std::size_t n = g.ksq.size();
  for (std::size_t i = 0; i < n; ++i) leray_mode(g, i, n, vec.data() + i);
}

void tensor_divergence(std::span<const complex> tensor, std::span<complex> out,
                       const ModeGeometry& g) {
  const std::size_t n = g.ksq.size();
  const int d = g.dim;
  for (std::size_t i = 0; i < n; ++i) {
    double k[3];
    odd_wavevector(g, i, k);
    for (int l = 0; l < d; ++l) {
      complex acc = 0.0;
      for (int m = 0; m < d; ++m) acc += k[m] * tensor[(l * d + m) * n + i];
      out[l * n + i] = kI * acc;
    }
  }
}

void composite(std::span<const complex> tensor, std::span<complex> out, const ModeGeometry& g,
               double s, double t) {
  const std::size_t n = g.ksq.size();
  const int d = g.dim;
  for (std::size_t i = 0; i < n; ++i) {
    complex mode[3];
    projected_divergence_mode(g, i, n, tensor.data() + i, mode);
    const double h = power_symbol(g.ksq[i], s) * std::exp(-g.ksq[i] * t);
    for (int l = 0; l < d; ++l) out[l * n + i] = h * mode[l];
  }
}

void accumulate_heat(std::span<complex> acc, std::span<const complex> src,
                     std::span<const double> ksq, double w, double t) {
  const std::size_t n = ksq.size();
  for (std::size_t c = 0; c * n < acc.size(); ++c)
    for (std::size_t i = 0; i < n; ++i)
      acc[c * n + i] += (w * std::exp(-ksq[i] * t)) * src[c * n + i];
}

void duhamel_accumulate(std::span<complex> acc, const std::span<const complex> (&src)[3],
                        const double (&c)[3], std::span<const double> ksq, double w, double dt) {
  const std::size_t n = ksq.size();
  const std::size_t comps = acc.size() / n;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = w * std::exp(-ksq[i] * dt);
    for (std::size_t m = 0; m < comps; ++m) {
      const std::size_t at = m * n + i;
      complex v = 0.0;
      for (int k = 0; k < 3; ++k)
        if (!src[k].empty()) v += c[k] * src[k][at];
      acc[at] += f * v;
    }
  }
}

double power_sum(std::span<const double> v, double r, double scale) {
  const std::size_t chunks = chunk_count(v.size());
  std::vector<double> partial(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t b = c * kReductionChunk;
    partial[c] = chunk_power_sum(v.data() + b, std::min(kReductionChunk, v.size() - b), r,
                                 1.0 / scale);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void composite_symbol_columns(const ModeGeometry& g, double s, double t,
                              std::span<complex> out) {
  const auto n = static_cast<std::size_t>(g.n);
  const int entries = g.dim * g.dim * g.dim;
  std::vector<complex> row(entries);
  for (std::size_t i1 = 0; i1 < n; ++i1) {
    symbol_row(g, s, t, i1, row.data());
    for (int e = 0; e < entries; ++e) out[e * n + i1] = row[e];
  }
}

void ray_fourier(std::span<const complex> column, std::span<const double> k,
                 std::span<const double> radii, std::span<complex> out) {
  for (std::size_t r = 0; r < radii.size(); ++r) {
    complex acc = 0.0;
    for (std::size_t i = 0; i < column.size(); ++i)
      acc += column[i] * std::polar(1.0, k[i] * radii[r]);
    out[r] = acc;
  }
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP

namespace omp {

void scale_by_heat(std::span<complex> data, std::span<const double> ksq, double t) {
  const auto n = static_cast<std::ptrdiff_t>(ksq.size());
  const auto total = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < total; ++i) data[i] *= std::exp(-ksq[i % n] * t);
}

void scale_by_power(std::span<complex> data, std::span<const double> ksq, double s) {
  const auto n = static_cast<std::ptrdiff_t>(ksq.size());
  const auto total = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < total; ++i) data[i] *= power_symbol(ksq[i % n], s);
}

void leray(std::span<complex> vec, const ModeGeometry& g) {
  const auto n = static_cast<std::ptrdiff_t>(g.ksq.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    leray_mode(g, static_cast<std::size_t>(i), static_cast<std::size_t>(n), vec.data() + i);
}

void tensor_divergence(std::span<const complex> tensor, std::span<complex> out,
                       const ModeGeometry& g) {
  const auto n = static_cast<std::ptrdiff_t>(g.ksq.size());
  const int d = g.dim;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double k[3];
    odd_wavevector(g, static_cast<std::size_t>(i), k);
    for (int l = 0; l < d; ++l) {
      complex acc = 0.0;
      for (int m = 0; m < d; ++m) acc += k[m] * tensor[(l * d + m) * n + i];
      out[l * n + i] = kI * acc;
    }
  }
}

void composite(std::span<const complex> tensor, std::span<complex> out, const ModeGeometry& g,
               double s, double t) {
  const auto n = static_cast<std::ptrdiff_t>(g.ksq.size());
  const int d = g.dim;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    complex mode[3];
    projected_divergence_mode(g, static_cast<std::size_t>(i), static_cast<std::size_t>(n),
                              tensor.data() + i, mode);
    const double h = power_symbol(g.ksq[i], s) * std::exp(-g.ksq[i] * t);
    for (int l = 0; l < d; ++l) out[l * n + i] = h * mode[l];
  }
}

void accumulate_heat(std::span<complex> acc, std::span<const complex> src,
                     std::span<const double> ksq, double w, double t) {
  const auto n = static_cast<std::ptrdiff_t>(ksq.size());
  const auto comps = static_cast<std::ptrdiff_t>(acc.size()) / n;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double f = w * std::exp(-ksq[i] * t);
    for (std::ptrdiff_t c = 0; c < comps; ++c) acc[c * n + i] += f * src[c * n + i];
  }
}

void duhamel_accumulate(std::span<complex> acc, const std::span<const complex> (&src)[3],
                        const double (&c)[3], std::span<const double> ksq, double w, double dt) {
  const auto n = static_cast<std::ptrdiff_t>(ksq.size());
  const auto comps = static_cast<std::ptrdiff_t>(acc.size()) / n;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double f = w * std::exp(-ksq[i] * dt);
    for (std::ptrdiff_t m = 0; m < comps; ++m) {
      const std::size_t at = static_cast<std::size_t>(m * n + i);
      complex v = 0.0;
      for (int k = 0; k < 3; ++k)
        if (!src[k].empty()) v += c[k] * src[k][at];
      acc[at] += f * v;
    }
  }
}

double power_sum(std::span<const double> v, double r, double scale) {
  const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(v.size()));
  std::vector<double> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::size_t b = static_cast<std::size_t>(c) * kReductionChunk;
    partial[c] = chunk_power_sum(v.data() + b, std::min(kReductionChunk, v.size() - b), r,
                                 1.0 / scale);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(v.size());
#pragma omp parallel for reduction(max : m) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

void composite_symbol_columns(const ModeGeometry& g, double s, double t,
                              std::span<complex> out) {
  const auto n = static_cast<std::ptrdiff_t>(g.n);
  const int entries = g.dim * g.dim * g.dim;
#pragma omp parallel
  {
    std::vector<complex> row(entries);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i1 = 0; i1 < n; ++i1) {
      symbol_row(g, s, t, static_cast<std::size_t>(i1), row.data());
      for (int e = 0; e < entries; ++e) out[e * n + i1] = row[e];
    }
  }
}

void ray_fourier(std::span<const complex> column, std::span<const double> k,
                 std::span<const double> radii, std::span<complex> out) {
  const auto nr = static_cast<std::ptrdiff_t>(radii.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < nr; ++r) {
    complex acc = 0.0;
    for (std::size_t i = 0; i < column.size(); ++i)
      acc += column[i] * std::polar(1.0, k[i] * radii[r]);
    out[r] = acc;
  }
}

}  // namespace omp

namespace {
std::atomic<int> g_threads{0};
}

int thread_count() {
  int t = g_threads.load();
  if (t > 0) return t;
  t = omp_get_max_threads();
  if (const char* env = std::getenv("MILDNS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) t = std::min(t, cap);
  }
  set_thread_count(t);
  return t;
}

void set_thread_count(int threads) {
  threads = std::max(1, threads);
  g_threads.store(threads);
  omp_set_num_threads(threads);
}

}  // namespace mildns::kernels
