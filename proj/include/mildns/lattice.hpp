#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace mildns {

using complex = std::complex<double>;

/// Periodic box [0, L)^d sampled with n points per axis.
///
/// Wavevectors are 2*pi/L * m with m in [-n/2, n/2 - 1]. Odd symbols (derivatives,
/// Riesz transforms, the Leray projection) use the "odd" wavenumbers, in which the
/// unpaired Nyquist index is replaced by zero so that real fields stay real.
class Lattice {
 public:
  Lattice(int dim, int n, double box_len);

  int dim() const noexcept;
  int n() const noexcept;
  double box_len() const noexcept;
  double spacing() const noexcept;
  std::size_t size() const noexcept;
  double cell_volume() const noexcept;
  double volume() const noexcept;

  /// Signed mode index m in [-n/2, n/2 - 1] of array index i along one axis.
  int mode_index(int i) const noexcept;
  /// Array index of the mode -m, i.e. (n - i) mod n.
  int mirror_index(int i) const noexcept;

  std::span<const double> wavenumbers() const noexcept;
  std::span<const double> odd_wavenumbers() const noexcept;
  /// |k|^2 at every point of the spectral array (row-major, last axis fastest).
  std::span<const double> wavenumber_sq() const noexcept;

  double coordinate(int i) const noexcept { return i * spacing(); }
  /// Nearest-image coordinate relative to the origin, in [-L/2, L/2).
  double centered_coordinate(int i) const noexcept;

  /// Splits a flat index into per-axis indices.
  void unflatten(std::size_t flat, int* idx) const noexcept;
  std::size_t flatten(const int* idx) const noexcept;
  /// Flat index of the spectral mode -k for the mode stored at `flat`.
  std::size_t mirror(std::size_t flat) const noexcept;

  /// Heat-flow validity window: t <= L^2 / 16 (sqrt(t) <= L/4).
  double max_valid_time() const noexcept;
  bool in_window(double t) const noexcept { return t <= max_valid_time(); }

  friend bool operator==(const Lattice& a, const Lattice& b) noexcept;

 private:
  struct Geometry;
  std::shared_ptr<const Geometry> geo_;
};

Lattice make_lattice(int dim, int n, double box_len);

enum class FieldKind { scalar, vector, tensor };
enum class Representation { physical, spectral };

int component_count(FieldKind kind, int dim) noexcept;
const char* to_string(FieldKind kind) noexcept;

/// Sampled scalar, vector or tensor field on a lattice. Physical fields hold real
/// samples; spectral fields hold normalized Fourier coefficients
/// c_k = N^-1 sum_x f(x) e^{-i k.x}, so f(x) = sum_k c_k e^{i k.x}.
/// Tensor component (i, j) is stored at i * d + j.
class Field {
 public:
  Field(const Lattice& lattice, FieldKind kind, Representation rep = Representation::physical);

  static Field zeros(const Lattice& lattice, FieldKind kind,
                     Representation rep = Representation::physical) {
    return Field(lattice, kind, rep);
  }

  const Lattice& lattice() const noexcept { return lattice_; }
  FieldKind kind() const noexcept { return kind_; }
  Representation representation() const noexcept { return rep_; }
  bool is_physical() const noexcept { return rep_ == Representation::physical; }
  int components() const noexcept { return components_; }
  std::size_t points() const noexcept { return lattice_.size(); }

  std::span<double> values(int c);
  std::span<const double> values(int c) const;
  std::span<double> all_values();
  std::span<const double> all_values() const;

  std::span<complex> coeffs(int c);
  std::span<const complex> coeffs(int c) const;
  std::span<complex> all_coeffs();
  std::span<const complex> all_coeffs() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double c);
  /// this += c * other
  Field& add_scaled(double c, const Field& other);

 private:
  void require_same_shape(const Field& other) const;

  Lattice lattice_;
  FieldKind kind_;
  Representation rep_;
  int components_;
  std::vector<double> real_;
  std::vector<complex> coeffs_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double c, Field a);

Field to_spectral(const Field& f);
Field to_physical(const Field& f);

/// Component in the requested representation (copy when a transform is needed).
Field as_spectral(const Field& f);
Field as_physical(const Field& f);

/// max over points and components of |f| (physical) or |c_k| (spectral).
double max_abs(const Field& f);

/// Largest |c(-k) - conj(c(k))| over all modes of a spectral field.
double hermitian_defect(const Field& spectral);

/// (u (x) v)_{ij} = u_i v_j, computed pointwise in physical space.
Field tensor_product(const Field& u, const Field& v);

/// Scalar divergence of a vector field, evaluated spectrally. Returned physical.
Field divergence(const Field& vec);

/// Gradient of a scalar field, evaluated spectrally. Returned physical.
Field gradient(const Field& scalar);

/// Extracts one component as a scalar field.
Field component_of(const Field& f, int c);

/// lambda * f(lambda x) realized on the box of side L / lambda with the same samples.
Field dilate(const Field& f, int lambda);

}  // namespace mildns
