#pragma once

#include <complex>
#include <span>

namespace mildns::detail {

/// Normalized forward transform of real samples: out_k = N^-1 sum_x in_x e^{-i k.x}.
void fft_forward(int dim, int n, std::span<const double> in, std::span<std::complex<double>> out);

/// Inverse of fft_forward; keeps the real part.
void fft_inverse(int dim, int n, std::span<const std::complex<double>> in, std::span<double> out);

/// Unnormalized backward complex transform, in place.
void fft_backward_inplace(int dim, int n, std::span<std::complex<double>> data);

}  // namespace mildns::detail
