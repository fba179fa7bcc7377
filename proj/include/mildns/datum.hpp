#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "mildns/lattice.hpp"

namespace mildns {

/// Closed-form initial data.
struct DatumSpec {
  enum class Kind { gaussian, taylor_green, single_mode, power_law, random_band };

  Kind kind = Kind::taylor_green;
  double width = 1.0;              // gaussian: heat-kernel time s of (4 pi s)^{-d/2} e^{-|x|^2/4s}
  double amplitude = 1.0;          // taylor_green, single_mode, random_band (RMS)
  std::array<int, 3> mode{1, 0, 0};  // single_mode: integer mode vector
  double exponent = 1.0;           // power_law: |x|^{-a}
  double inner = 0.5;              // power_law: inner cutoff eps
  double outer = 1.0;              // power_law: outer cutoff R
  std::uint64_t seed = 0;          // random_band
  double k_min = 1.0;              // random_band: band in integer mode units
  double k_max = 4.0;
  bool divergence_free = false;

  static DatumSpec gaussian(double width);
  static DatumSpec taylor_green(double amplitude = 1.0);
  static DatumSpec single_mode(std::array<int, 3> mode, double amplitude = 1.0);
  static DatumSpec power_law(double exponent, double inner, double outer);
  static DatumSpec random_band(std::uint64_t seed, double k_min, double k_max,
                               double amplitude = 1.0);

  DatumSpec& solenoidal(bool on = true) {
    divergence_free = on;
    return *this;
  }
};

const char* to_string(DatumSpec::Kind kind) noexcept;
DatumSpec::Kind datum_kind_from_string(const std::string& name);

/// Throws ConfigError when the spec cannot be realized on the lattice.
void validate(const DatumSpec& spec, const Lattice& lattice);

/// Scalar profile: gaussian, single_mode cos(k.x), power_law, random_band.
Field realize_scalar(const Lattice& lattice, const DatumSpec& spec);

/// Vector datum. Radial and single-mode profiles live in the first component
/// (single_mode in 2D/3D is polarized perpendicular to k instead); taylor_green and
/// random_band are intrinsically vector valued. With divergence_free set, the Leray
/// projection is applied before returning.
Field realize_datum(const Lattice& lattice, const DatumSpec& spec);

}  // namespace mildns
