#pragma once

#include "mildns/kernels.hpp"
#include "mildns/lattice.hpp"

namespace mildns::detail {

inline kernels::ModeGeometry mode_geometry(const Lattice& lat) {
  return {lat.dim(), lat.n(), lat.odd_wavenumbers(), lat.wavenumber_sq()};
}

}  // namespace mildns::detail
