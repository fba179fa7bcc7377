#include "mildns/datum.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mildns/error.hpp"
#include "mildns/multipliers.hpp"
#include "mildns/random.hpp"

namespace mildns {

DatumSpec DatumSpec::gaussian(double width) {
  DatumSpec s;
  s.kind = Kind::gaussian;
  s.width = width;
  return s;
}

DatumSpec DatumSpec::taylor_green(double amplitude) {
  DatumSpec s;
  s.kind = Kind::taylor_green;
  s.amplitude = amplitude;
  return s;
}

DatumSpec DatumSpec::single_mode(std::array<int, 3> mode, double amplitude) {
  DatumSpec s;
  s.kind = Kind::single_mode;
  s.mode = mode;
  s.amplitude = amplitude;
  return s;
}

DatumSpec DatumSpec::power_law(double exponent, double inner, double outer) {
  DatumSpec s;
  s.kind = Kind::power_law;
  s.exponent = exponent;
  s.inner = inner;
  s.outer = outer;
  return s;
}

DatumSpec DatumSpec::random_band(std::uint64_t seed, double k_min, double k_max,
                                 double amplitude) {
  DatumSpec s;
  s.kind = Kind::random_band;
  s.seed = seed;
  s.k_min = k_min;
  s.k_max = k_max;
  s.amplitude = amplitude;
  return s;
}

const char* to_string(DatumSpec::Kind kind) noexcept {
  switch (kind) {
    case DatumSpec::Kind::gaussian: return "gaussian";
    case DatumSpec::Kind::taylor_green: return "taylor_green";
    case DatumSpec::Kind::single_mode: return "single_mode";
    case DatumSpec::Kind::power_law: return "power_law";
    case DatumSpec::Kind::random_band: return "random_band";
  }
  return "?";
}

DatumSpec::Kind datum_kind_from_string(const std::string& name) {
  for (auto k : {DatumSpec::Kind::gaussian, DatumSpec::Kind::taylor_green,
                 DatumSpec::Kind::single_mode, DatumSpec::Kind::power_law,
                 DatumSpec::Kind::random_band})
    if (name == to_string(k)) return k;
  throw ConfigError("datum.kind: unknown datum kind '" + name + "'");
}

void validate(const DatumSpec& spec, const Lattice& lattice) {
  const int half = lattice.n() / 2;
  switch (spec.kind) {
    case DatumSpec::Kind::gaussian:
      if (!(spec.width > 0.0)) throw ConfigError("datum.width: gaussian width must be positive");
      break;
    case DatumSpec::Kind::taylor_green:
      if (!std::isfinite(spec.amplitude)) throw ConfigError("datum.amplitude: must be finite");
      break;
    case DatumSpec::Kind::single_mode: {
      bool zero = true;
      for (int a = 0; a < lattice.dim(); ++a) {
        if (std::abs(spec.mode[a]) >= half)
          throw ConfigError("datum.mode: mode " + std::to_string(spec.mode[a]) +
                            " is not resolved on n = " + std::to_string(lattice.n()));
        zero = zero && spec.mode[a] == 0;
      }
      if (zero) throw ConfigError("datum.mode: single mode must be nonzero");
      break;
    }
    case DatumSpec::Kind::power_law:
      if (!(spec.exponent > 0.0)) throw ConfigError("datum.exponent: must be positive");
      if (!(spec.inner > 0.0 && spec.inner < spec.outer))
        throw ConfigError("datum.inner: need 0 < inner < outer");
      if (spec.outer > lattice.box_len() / 2.0)
        throw ConfigError("datum.outer: outer cutoff exceeds L/2");
      break;
    case DatumSpec::Kind::random_band:
      if (!(spec.k_min >= 1.0 && spec.k_min <= spec.k_max))
        throw ConfigError("datum.k_min: need 1 <= k_min <= k_max");
      if (spec.k_max > half - 1)
        throw ConfigError("datum.k_max: band exceeds the resolved modes (n/2 - 1)");
      if (!(spec.amplitude >= 0.0)) throw ConfigError("datum.amplitude: must be non-negative");
      break;
  }
}

namespace {

double radius(const Lattice& lat, const int* idx) {
  double r2 = 0.0;
  for (int a = 0; a < lat.dim(); ++a) {
    const double x = lat.centered_coordinate(idx[a]);
    r2 += x * x;
  }
  return std::sqrt(r2);
}

double phase(const Lattice& lat, const int* idx, const std::array<int, 3>& mode) {
  const double base = 2.0 * std::numbers::pi / lat.box_len();
  double p = 0.0;
  for (int a = 0; a < lat.dim(); ++a) p += base * mode[a] * lat.coordinate(idx[a]);
  return p;
}

// Random spectral field with Hermitian pairing; components drawn in flat order.
Field random_band_field(const Lattice& lat, const DatumSpec& spec, FieldKind kind) {
  Field f(lat, kind, Representation::spectral);
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  int idx[3];
  for (int c = 0; c < f.components(); ++c) {
    auto co = f.coeffs(c);
    for (std::size_t flat = 0; flat < lat.size(); ++flat) {
      const std::size_t mirror = lat.mirror(flat);
      if (mirror < flat) continue;
      lat.unflatten(flat, idx);
      double m2 = 0.0;
      for (int a = 0; a < lat.dim(); ++a) {
        const double m = lat.mode_index(idx[a]);
        m2 += m * m;
      }
      const double m = std::sqrt(m2);
      if (m < spec.k_min || m > spec.k_max) continue;
      const double re = normal(rng);
      const double im = normal(rng);
      if (mirror == flat) {
        co[flat] = re;
      } else {
        co[flat] = complex(re, im);
        co[mirror] = complex(re, -im);
      }
    }
  }
  if (kind == FieldKind::vector && spec.divergence_free) f = leray_project(f);
  Field phys = to_physical(f);
  double ms = 0.0;
  for (double v : phys.all_values()) ms += v * v;
  ms /= static_cast<double>(lat.size());
  if (ms > 0.0) phys *= spec.amplitude / std::sqrt(ms);
  return phys;
}

}  // namespace

Field realize_scalar(const Lattice& lat, const DatumSpec& spec) {
  validate(spec, lat);
  if (spec.kind == DatumSpec::Kind::taylor_green)
    throw ConfigError("datum.kind: taylor_green has no scalar profile");
  if (spec.kind == DatumSpec::Kind::random_band) {
    DatumSpec s = spec;
    s.divergence_free = false;
    return random_band_field(lat, s, FieldKind::scalar);
  }
  Field f(lat, FieldKind::scalar);
  auto v = f.values(0);
  const int d = lat.dim();
  int idx[3];
  for (std::size_t flat = 0; flat < lat.size(); ++flat) {
    lat.unflatten(flat, idx);
    switch (spec.kind) {
      case DatumSpec::Kind::gaussian: {
        const double r = radius(lat, idx);
        v[flat] = std::pow(4.0 * std::numbers::pi * spec.width, -0.5 * d) *
                  std::exp(-r * r / (4.0 * spec.width));
        break;
      }
      case DatumSpec::Kind::single_mode:
        v[flat] = spec.amplitude * std::cos(phase(lat, idx, spec.mode));
        break;
      case DatumSpec::Kind::power_law: {
        const double r = radius(lat, idx);
        v[flat] = (r >= spec.inner && r <= spec.outer) ? std::pow(r, -spec.exponent) : 0.0;
        break;
      }
      default: break;
    }
  }
  return f;
}

Field realize_datum(const Lattice& lat, const DatumSpec& spec) {
  validate(spec, lat);
  const int d = lat.dim();
  Field u(lat, FieldKind::vector);
  switch (spec.kind) {
    case DatumSpec::Kind::taylor_green: {
      const double base = 2.0 * std::numbers::pi / lat.box_len();
      int idx[3];
      for (std::size_t flat = 0; flat < lat.size(); ++flat) {
        lat.unflatten(flat, idx);
        const double x = base * lat.coordinate(idx[0]);
        const double y = base * lat.coordinate(idx[1]);
        const double z = d == 3 ? std::cos(base * lat.coordinate(idx[2])) : 1.0;
        u.values(0)[flat] = spec.amplitude * std::sin(x) * std::cos(y) * z;
        u.values(1)[flat] = -spec.amplitude * std::cos(x) * std::sin(y) * z;
      }
      break;
    }
    case DatumSpec::Kind::random_band:
      u = random_band_field(lat, spec, FieldKind::vector);
      break;
    case DatumSpec::Kind::single_mode: {
      // polarization perpendicular to the mode keeps the field solenoidal
      double m[3] = {0.0, 0.0, 0.0};
      for (int a = 0; a < d; ++a) m[a] = spec.mode[a];
      double pol[3] = {0.0, 0.0, 0.0};
      if (d == 2) {
        pol[0] = -m[1];
        pol[1] = m[0];
      } else {
        int axis = 0;
        for (int a = 1; a < 3; ++a)
          if (std::abs(m[a]) < std::abs(m[axis])) axis = a;
        double e[3] = {0.0, 0.0, 0.0};
        e[axis] = 1.0;
        pol[0] = m[1] * e[2] - m[2] * e[1];
        pol[1] = m[2] * e[0] - m[0] * e[2];
        pol[2] = m[0] * e[1] - m[1] * e[0];
      }
      double norm = 0.0;
      for (double p : pol) norm += p * p;
      norm = std::sqrt(norm);
      const Field profile = realize_scalar(lat, spec);
      for (int a = 0; a < d; ++a) {
        auto dst = u.values(a);
        auto src = profile.values(0);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = pol[a] / norm * src[i];
      }
      break;
    }
    default: {
      const Field profile = realize_scalar(lat, spec);
      std::ranges::copy(profile.values(0), u.values(0).begin());
      break;
    }
  }
  if (spec.divergence_free && spec.kind != DatumSpec::Kind::random_band) u = leray_project(u);
  return u;
}

}  // namespace mildns
