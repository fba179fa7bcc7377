#pragma once

#include <span>
#include <string>
#include <vector>

#include "mildns/lattice.hpp"

namespace mildns {

/// Constant-coefficient operators as exact Fourier multipliers.
///
/// Zero-mode rules: heat keeps the mean; fractional powers with s != 0 and Riesz
/// transforms annihilate it; Leray acts as the identity on it.
struct MultiplierSymbol {
  enum class Kind { heat, fractional, riesz, leray, divergence, composite };

  Kind kind = Kind::heat;
  double t = 0.0;  // heat, composite
  double s = 0.0;  // fractional, composite
  int axis = 0;    // riesz

  static MultiplierSymbol heat(double t);
  static MultiplierSymbol fractional(double s);
  static MultiplierSymbol riesz(int axis);
  static MultiplierSymbol leray();
  static MultiplierSymbol divergence();
  static MultiplierSymbol composite(double s, double t);

  /// Applies the symbol; the output has the input's representation.
  Field apply(const Field& f) const;
  std::string describe() const;
};

/// e^{t Delta} f. Throws DomainError for t < 0.
Field heat_flow(const Field& f, double t);

/// Lambda^s f = F^-1 |k|^s F f.
Field fractional_laplacian(const Field& f, double s);

/// R_j g, symbol i k_j / |k|, for a scalar field.
Field riesz_transform(const Field& scalar, int axis);

/// Leray projection onto divergence-free vector fields.
Field leray_project(const Field& vec);

/// (div F)_i = sum_j d_j F_ij.
Field divergence_of_tensor(const Field& tensor);

/// Lambda^s e^{t Delta} P div F as one fused multiplier. Requires s > -1 and t > 0.
Field composite_apply(const Field& tensor, double s, double t);

/// Samples of the kernel of Lambda^s e^{t Delta} P div along the first coordinate axis.
struct KernelProfile {
  double s = 0.0;
  int d = 2;
  double t = 1.0;
  std::vector<double> radii;
  std::vector<double> kernel_values;  // max over tensor entries of |K(x)|
  std::vector<double> bound_ratio;    // |K(x)| (1 + |x|)^{d+1+s}
  double tail_slope = 0.0;            // log-log least squares over the tail radii
  double tail_start = 0.0;
  double implied_constant = 0.0;      // max bound_ratio
};

/// Kernel of Lambda^s e^{Delta} P div, obtained by inverse transform of the exact symbol
/// on `lattice`. Radii must lie in (0, L/4]; the lattice must resolve the heat factor
/// (2 pi n / L >= 16). The tail fit uses radii >= tail_start (default: r_max / 2).
KernelProfile kernel_profile(double s, const Lattice& lattice, std::span<const double> radii,
                             double tail_start = 0.0);

/// Profile at time t obtained from the t = 1 kernel by self-similarity,
/// K_t(x) = t^{-(d+1+s)/2} K(x / sqrt t); the t = 1 kernel is taken on the box L / sqrt t.
KernelProfile kernel_profile_scaled(double s, const Lattice& lattice,
                                    std::span<const double> radii, double t);

/// Profile at time t computed directly from the symbol |k|^s e^{-|k|^2 t} P(k) i k.
KernelProfile kernel_profile_direct(double s, const Lattice& lattice,
                                    std::span<const double> radii, double t);

/// Log-log least-squares slope of values against radii.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace mildns
