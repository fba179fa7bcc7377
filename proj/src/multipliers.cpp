#include "mildns/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mildns/error.hpp"
#include "mildns/kernels.hpp"
#include "mode_geometry.hpp"

namespace mildns {

namespace {

Field restore(Field spectral, Representation rep) {
  return rep == Representation::physical ? to_physical(spectral) : spectral;
}

void require_kind(const Field& f, FieldKind kind, const char* op) {
  if (f.kind() != kind)
    throw ShapeError(std::string(op) + ": expected a " + to_string(kind) + " field, got " +
                     to_string(f.kind()));
}

}  // namespace

MultiplierSymbol MultiplierSymbol::heat(double t) { return {Kind::heat, t, 0.0, 0}; }
MultiplierSymbol MultiplierSymbol::fractional(double s) { return {Kind::fractional, 0.0, s, 0}; }
MultiplierSymbol MultiplierSymbol::riesz(int axis) { return {Kind::riesz, 0.0, 0.0, axis}; }
MultiplierSymbol MultiplierSymbol::leray() { return {Kind::leray, 0.0, 0.0, 0}; }
MultiplierSymbol MultiplierSymbol::divergence() { return {Kind::divergence, 0.0, 0.0, 0}; }
MultiplierSymbol MultiplierSymbol::composite(double s, double t) {
  return {Kind::composite, t, s, 0};
}

std::string MultiplierSymbol::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::heat: os << "heat(t=" << t << ")"; break;
    case Kind::fractional: os << "fractional(s=" << s << ")"; break;
    case Kind::riesz: os << "riesz(j=" << axis << ")"; break;
    case Kind::leray: os << "leray"; break;
    case Kind::divergence: os << "divergence"; break;
    case Kind::composite: os << "composite(s=" << s << ", t=" << t << ")"; break;
  }
  return os.str();
}

Field MultiplierSymbol::apply(const Field& f) const {
  switch (kind) {
    case Kind::heat: return heat_flow(f, t);
    case Kind::fractional: return fractional_laplacian(f, s);
    case Kind::riesz: return riesz_transform(f, axis);
    case Kind::leray: return leray_project(f);
    case Kind::divergence: return divergence_of_tensor(f);
    case Kind::composite: return composite_apply(f, s, t);
  }
  return f;
}

Field heat_flow(const Field& f, double t) {
  if (!(t >= 0.0)) throw DomainError("heat_flow: t must be non-negative");
  Field s = as_spectral(f);
  if (t > 0.0) kernels::omp::scale_by_heat(s.all_coeffs(), f.lattice().wavenumber_sq(), t);
  return restore(std::move(s), f.representation());
}

Field fractional_laplacian(const Field& f, double s) {
  if (!std::isfinite(s)) throw DomainError("fractional_laplacian: s must be finite");
  Field sp = as_spectral(f);
  kernels::omp::scale_by_power(sp.all_coeffs(), f.lattice().wavenumber_sq(), s);
  return restore(std::move(sp), f.representation());
}

Field riesz_transform(const Field& scalar, int axis) {
  require_kind(scalar, FieldKind::scalar, "riesz_transform");
  const Lattice& lat = scalar.lattice();
  if (axis < 0 || axis >= lat.dim()) throw DomainError("riesz_transform: axis out of range");
  Field sp = as_spectral(scalar);
  auto c = sp.coeffs(0);
  int idx[3];
  for (std::size_t f = 0; f < lat.size(); ++f) {
    lat.unflatten(f, idx);
    double kk = 0.0;
    for (int a = 0; a < lat.dim(); ++a) {
      const double k = lat.odd_wavenumbers()[idx[a]];
      kk += k * k;
    }
    if (kk == 0.0) {
      c[f] = 0.0;
      continue;
    }
    c[f] *= complex(0.0, lat.odd_wavenumbers()[idx[axis]] / std::sqrt(kk));
  }
  return restore(std::move(sp), scalar.representation());
}

Field leray_project(const Field& vec) {
  require_kind(vec, FieldKind::vector, "leray_project");
  Field sp = as_spectral(vec);
  kernels::omp::leray(sp.all_coeffs(), detail::mode_geometry(vec.lattice()));
  return restore(std::move(sp), vec.representation());
}

Field divergence_of_tensor(const Field& tensor) {
  require_kind(tensor, FieldKind::tensor, "divergence_of_tensor");
  const Field sp = as_spectral(tensor);
  Field out(tensor.lattice(), FieldKind::vector, Representation::spectral);
  kernels::omp::tensor_divergence(sp.all_coeffs(), out.all_coeffs(),
                                  detail::mode_geometry(tensor.lattice()));
  return restore(std::move(out), tensor.representation());
}

Field composite_apply(const Field& tensor, double s, double t) {
  require_kind(tensor, FieldKind::tensor, "composite_apply");
  if (!(s > -1.0)) throw DomainError("composite_apply: s must exceed -1");
  if (!(t > 0.0)) throw DomainError("composite_apply: t must be positive");
  const Field sp = as_spectral(tensor);
  Field out(tensor.lattice(), FieldKind::vector, Representation::spectral);
  kernels::omp::composite(sp.all_coeffs(), out.all_coeffs(),
                          detail::mode_geometry(tensor.lattice()), s, t);
  return restore(std::move(out), tensor.representation());
}

// ---------------------------------------------------------------------------
// kernel profiling

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DataError("loglog_slope: need at least two matching samples");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DataError("loglog_slope: non-positive sample");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw DataError("loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

namespace {

void check_profile_inputs(double s, const Lattice& lattice, std::span<const double> radii) {
  if (!(s > -1.0)) throw DomainError("kernel_profile: s must exceed -1");
  if (radii.empty()) throw DomainError("kernel_profile: no radii given");
  if (2.0 * std::numbers::pi * lattice.n() / lattice.box_len() < 16.0)
    throw ConfigError("kernel_profile: lattice too coarse, need 2 pi n / L >= 16");
  double prev = 0.0;
  for (double r : radii) {
    if (!(r > prev)) throw DomainError("kernel_profile: radii must be positive and increasing");
    if (r > lattice.box_len() / 4.0)
      throw WindowError("kernel_profile: radius " + std::to_string(r) +
                        " exceeds L/4, periodization unsafe");
    prev = r;
  }
}

// Raw max-over-entries |K_t| along the first axis at the given radii.
std::vector<double> sample_kernel(double s, const Lattice& lattice, std::span<const double> radii,
                                  double t) {
  const int d = lattice.dim();
  const auto n = static_cast<std::size_t>(lattice.n());
  const int entries = d * d * d;
  std::vector<complex> columns(static_cast<std::size_t>(entries) * n);
  kernels::omp::composite_symbol_columns(detail::mode_geometry(lattice), s, t, columns);
  std::vector<double> best(radii.size(), 0.0);
  std::vector<complex> vals(radii.size());
  const double norm = 1.0 / lattice.volume();
  for (int e = 0; e < entries; ++e) {
    std::span<const complex> col(columns.data() + e * n, n);
    kernels::omp::ray_fourier(col, lattice.wavenumbers(), radii, vals);
    for (std::size_t r = 0; r < radii.size(); ++r)
      best[r] = std::max(best[r], std::abs(vals[r].real()) * norm);
  }
  return best;
}

void finish_profile(KernelProfile& p, double tail_start) {
  const double decay = p.d + 1 + p.s;
  p.bound_ratio.resize(p.radii.size());
  for (std::size_t i = 0; i < p.radii.size(); ++i)
    p.bound_ratio[i] = p.kernel_values[i] * std::pow(1.0 + p.radii[i], decay);
  p.implied_constant = *std::max_element(p.bound_ratio.begin(), p.bound_ratio.end());
  p.tail_start = tail_start > 0.0 ? tail_start : p.radii.back() / 2.0;
  std::vector<double> tx, ty;
  for (std::size_t i = 0; i < p.radii.size(); ++i) {
    if (p.radii[i] >= p.tail_start && p.kernel_values[i] > 0.0) {
      tx.push_back(p.radii[i]);
      ty.push_back(p.kernel_values[i]);
    }
  }
  p.tail_slope = tx.size() >= 2 ? loglog_slope(tx, ty) : 0.0;
}

}  // namespace

KernelProfile kernel_profile(double s, const Lattice& lattice, std::span<const double> radii,
                             double tail_start) {
  KernelProfile p = kernel_profile_direct(s, lattice, radii, 1.0);
  if (tail_start > 0.0) finish_profile(p, tail_start);
  return p;
}

KernelProfile kernel_profile_direct(double s, const Lattice& lattice,
                                    std::span<const double> radii, double t) {
  check_profile_inputs(s, lattice, radii);
  if (!(t > 0.0)) throw DomainError("kernel_profile: t must be positive");
  KernelProfile p;
  p.s = s;
  p.d = lattice.dim();
  p.t = t;
  p.radii.assign(radii.begin(), radii.end());
  p.kernel_values = sample_kernel(s, lattice, radii, t);
  finish_profile(p, 0.0);
  return p;
}

KernelProfile kernel_profile_scaled(double s, const Lattice& lattice,
                                    std::span<const double> radii, double t) {
  if (!(t > 0.0)) throw DomainError("kernel_profile: t must be positive");
  const double root = std::sqrt(t);
  const Lattice unit(lattice.dim(), lattice.n(), lattice.box_len() / root);
  std::vector<double> inner(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) inner[i] = radii[i] / root;
  check_profile_inputs(s, lattice, radii);
  KernelProfile p;
  p.s = s;
  p.d = lattice.dim();
  p.t = t;
  p.radii.assign(radii.begin(), radii.end());
  p.kernel_values = sample_kernel(s, unit, inner, 1.0);
  const double factor = std::pow(t, -(p.d + 1 + s) / 2.0);
  for (auto& v : p.kernel_values) v *= factor;
  finish_profile(p, 0.0);
  return p;
}

}  // namespace mildns
