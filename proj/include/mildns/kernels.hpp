#pragma once

// Dense per-mode and per-point loops behind the operator library.
//
// Every kernel exists twice with identical signatures: `serial` is the reference
// used by the tests, `omp` is the OpenMP version the library calls. Reductions use
// a fixed chunking independent of the thread count, so both versions return
// bit-identical results and runs are reproducible under any MILDNS_THREADS.

#include <complex>
#include <cstddef>
#include <span>

namespace mildns::kernels {

using complex = std::complex<double>;

/// Spectral geometry needed by the vector-valued symbols.
struct ModeGeometry {
  int dim;
  int n;
  std::span<const double> k_odd;  // per-axis wavenumbers, Nyquist zeroed
  std::span<const double> ksq;    // |k|^2 per flat mode
};

inline constexpr std::size_t kReductionChunk = 4096;

namespace serial {
/// data *= exp(-|k|^2 t)
void scale_by_heat(std::span<complex> data, std::span<const double> ksq, double t);
/// data *= |k|^s; the zero mode is annihilated unless s == 0.
void scale_by_power(std::span<complex> data, std::span<const double> ksq, double s);
/// In-place Leray projection of d contiguous component blocks.
void leray(std::span<complex> vec, const ModeGeometry& g);
/// out_i = sum_j i k_j F_ij for a d*d tensor block.
void tensor_divergence(std::span<const complex> tensor, std::span<complex> out,
                       const ModeGeometry& g);
/// out = |k|^s exp(-|k|^2 t) P (i k . F), fused.
void composite(std::span<const complex> tensor, std::span<complex> out, const ModeGeometry& g,
               double s, double t);
/// acc += w exp(-|k|^2 t) src, per component block of length ksq.size().
void accumulate_heat(std::span<complex> acc, std::span<const complex> src,
                     std::span<const double> ksq, double w, double t);
/// acc += w exp(-|k|^2 dt) (c[0] src[0] + c[1] src[1] + c[2] src[2]); an empty src
/// span is skipped. Used for the interpolated Duhamel integrand.
void duhamel_accumulate(std::span<complex> acc, const std::span<const complex> (&src)[3],
                        const double (&c)[3], std::span<const double> ksq, double w, double dt);
/// sum_x (|v(x)| / scale)^r
double power_sum(std::span<const double> v, double r, double scale);
double max_abs(std::span<const double> v);
/// out[e * n + i1] is the composite kernel symbol entry e = (j * d + l) * d + m,
/// |k|^s e^{-|k|^2 t} P_jl(k) i k_m, summed over all axes but the first.
void composite_symbol_columns(const ModeGeometry& g, double s, double t,
                              std::span<complex> out);
/// out[r] = sum_i column[i] exp(i k_i radii[r])
void ray_fourier(std::span<const complex> column, std::span<const double> k,
                 std::span<const double> radii, std::span<complex> out);
}  // namespace serial

// Same contracts as serial, parallelized with OpenMP.
namespace omp {
void scale_by_heat(std::span<complex> data, std::span<const double> ksq, double t);
void scale_by_power(std::span<complex> data, std::span<const double> ksq, double s);
void leray(std::span<complex> vec, const ModeGeometry& g);
void tensor_divergence(std::span<const complex> tensor, std::span<complex> out,
                       const ModeGeometry& g);
void composite(std::span<const complex> tensor, std::span<complex> out, const ModeGeometry& g,
               double s, double t);
void accumulate_heat(std::span<complex> acc, std::span<const complex> src,
                     std::span<const double> ksq, double w, double t);
double power_sum(std::span<const double> v, double r, double scale);
double max_abs(std::span<const double> v);
void duhamel_accumulate(std::span<complex> acc, const std::span<const complex> (&src)[3],
                        const double (&c)[3], std::span<const double> ksq, double w, double dt);
void composite_symbol_columns(const ModeGeometry& g, double s, double t,
                              std::span<complex> out);
void ray_fourier(std::span<const complex> column, std::span<const double> k,
                 std::span<const double> radii, std::span<complex> out);
}  // namespace omp

/// Threads used by the omp kernels (honours MILDNS_THREADS at first call).
int thread_count();
void set_thread_count(int threads);

}  // namespace mildns::kernels
