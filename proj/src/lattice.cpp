#include "mildns/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "mildns/error.hpp"
#include "mildns/kernels.hpp"

namespace mildns {

struct Lattice::Geometry {
  int dim;
  int n;
  double box_len;
  double spacing;
  std::size_t size;
  std::vector<double> k;
  std::vector<double> k_odd;
  std::vector<double> ksq;
};

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Lattice::Lattice(int dim, int n, double box_len) {
  if (dim != 2 && dim != 3)
    throw ConfigError("lattice.d: dimension must be 2 or 3 (got " + std::to_string(dim) + ")");
  if (n < 4) throw ConfigError("lattice.n: n must be at least 4 (got " + std::to_string(n) + ")");
  if (!is_power_of_two(n))
    throw ConfigError("lattice.n: n must be a power of two (got " + std::to_string(n) + ")");
  if (!(box_len > 0.0) || !std::isfinite(box_len))
    throw ConfigError("lattice.box_len: box length must be positive and finite");

  auto g = std::make_shared<Geometry>();
  g->dim = dim;
  g->n = n;
  g->box_len = box_len;
  g->spacing = box_len / n;
  g->size = 1;
  for (int i = 0; i < dim; ++i) g->size *= static_cast<std::size_t>(n);
  const double base = 2.0 * std::numbers::pi / box_len;
  g->k.resize(n);
  g->k_odd.resize(n);
  for (int i = 0; i < n; ++i) {
    const int m = i < n / 2 ? i : i - n;
    g->k[i] = base * m;
    g->k_odd[i] = (i == n / 2) ? 0.0 : g->k[i];
  }
  g->ksq.resize(g->size);
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t f = 0; f < g->size; ++f) {
    double s = 0.0;
    std::size_t rest = f;
    for (int a = 0; a < dim; ++a) {
      const double k = g->k[rest % un];
      s += k * k;
      rest /= un;
    }
    g->ksq[f] = s;
  }
  geo_ = std::move(g);
}

Lattice make_lattice(int dim, int n, double box_len) { return Lattice(dim, n, box_len); }

int Lattice::dim() const noexcept { return geo_->dim; }
int Lattice::n() const noexcept { return geo_->n; }
double Lattice::box_len() const noexcept { return geo_->box_len; }
double Lattice::spacing() const noexcept { return geo_->spacing; }
std::size_t Lattice::size() const noexcept { return geo_->size; }
double Lattice::cell_volume() const noexcept { return std::pow(geo_->spacing, geo_->dim); }
double Lattice::volume() const noexcept { return std::pow(geo_->box_len, geo_->dim); }

int Lattice::mode_index(int i) const noexcept { return i < geo_->n / 2 ? i : i - geo_->n; }
int Lattice::mirror_index(int i) const noexcept { return (geo_->n - i) % geo_->n; }

std::span<const double> Lattice::wavenumbers() const noexcept { return geo_->k; }
std::span<const double> Lattice::odd_wavenumbers() const noexcept { return geo_->k_odd; }
std::span<const double> Lattice::wavenumber_sq() const noexcept { return geo_->ksq; }

double Lattice::centered_coordinate(int i) const noexcept {
  const double x = i * geo_->spacing;
  return x - geo_->box_len * std::floor(x / geo_->box_len + 0.5);
}

void Lattice::unflatten(std::size_t flat, int* idx) const noexcept {
  const auto n = static_cast<std::size_t>(geo_->n);
  for (int a = geo_->dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n);
    flat /= n;
  }
}

std::size_t Lattice::flatten(const int* idx) const noexcept {
  std::size_t f = 0;
  for (int a = 0; a < geo_->dim; ++a) f = f * static_cast<std::size_t>(geo_->n) + idx[a];
  return f;
}

std::size_t Lattice::mirror(std::size_t flat) const noexcept {
  int idx[3];
  unflatten(flat, idx);
  for (int a = 0; a < geo_->dim; ++a) idx[a] = mirror_index(idx[a]);
  return flatten(idx);
}

double Lattice::max_valid_time() const noexcept { return geo_->box_len * geo_->box_len / 16.0; }

bool operator==(const Lattice& a, const Lattice& b) noexcept {
  return a.geo_ == b.geo_ ||
         (a.dim() == b.dim() && a.n() == b.n() && a.box_len() == b.box_len());
}

// ---------------------------------------------------------------------------

int component_count(FieldKind kind, int dim) noexcept {
  switch (kind) {
    case FieldKind::scalar: return 1;
    case FieldKind::vector: return dim;
    case FieldKind::tensor: return dim * dim;
  }
  return 1;
}

const char* to_string(FieldKind kind) noexcept {
  switch (kind) {
    case FieldKind::scalar: return "scalar";
    case FieldKind::vector: return "vector";
    case FieldKind::tensor: return "tensor";
  }
  return "?";
}

Field::Field(const Lattice& lattice, FieldKind kind, Representation rep)
    : lattice_(lattice), kind_(kind), rep_(rep), components_(component_count(kind, lattice.dim())) {
  const std::size_t total = lattice_.size() * static_cast<std::size_t>(components_);
  if (rep_ == Representation::physical)
    real_.assign(total, 0.0);
  else
    coeffs_.assign(total, complex{});
}

std::span<double> Field::values(int c) {
  return std::span<double>(real_).subspan(c * points(), points());
}
std::span<const double> Field::values(int c) const {
  return std::span<const double>(real_).subspan(c * points(), points());
}
std::span<double> Field::all_values() { return real_; }
std::span<const double> Field::all_values() const { return real_; }

std::span<complex> Field::coeffs(int c) {
  return std::span<complex>(coeffs_).subspan(c * points(), points());
}
std::span<const complex> Field::coeffs(int c) const {
  return std::span<const complex>(coeffs_).subspan(c * points(), points());
}
std::span<complex> Field::all_coeffs() { return coeffs_; }
std::span<const complex> Field::all_coeffs() const { return coeffs_; }

void Field::require_same_shape(const Field& other) const {
  if (!(lattice_ == other.lattice_) || kind_ != other.kind_ || rep_ != other.rep_)
    throw ShapeError("field arithmetic needs matching lattice, kind and representation");
}

Field& Field::operator+=(const Field& other) { return add_scaled(1.0, other); }
Field& Field::operator-=(const Field& other) { return add_scaled(-1.0, other); }

Field& Field::operator*=(double c) {
  for (auto& v : real_) v *= c;
  for (auto& v : coeffs_) v *= c;
  return *this;
}

Field& Field::add_scaled(double c, const Field& other) {
  require_same_shape(other);
  for (std::size_t i = 0; i < real_.size(); ++i) real_[i] += c * other.real_[i];
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += c * other.coeffs_[i];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double c, Field a) { return a *= c; }

Field to_spectral(const Field& f) {
  if (!f.is_physical()) throw ShapeError("to_spectral: field is already spectral");
  for (double v : f.all_values())
    if (!std::isfinite(v)) throw DataError("to_spectral: field contains non-finite values");
  const Lattice& lat = f.lattice();
  Field out(lat, f.kind(), Representation::spectral);
  for (int c = 0; c < f.components(); ++c)
    detail::fft_forward(lat.dim(), lat.n(), f.values(c), out.coeffs(c));
  return out;
}

Field to_physical(const Field& f) {
  if (f.is_physical()) throw ShapeError("to_physical: field is already physical");
  for (const auto& v : f.all_coeffs())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw DataError("to_physical: field contains non-finite coefficients");
  const Lattice& lat = f.lattice();
  Field out(lat, f.kind(), Representation::physical);
  for (int c = 0; c < f.components(); ++c)
    detail::fft_inverse(lat.dim(), lat.n(), f.coeffs(c), out.values(c));
  return out;
}

Field as_spectral(const Field& f) { return f.is_physical() ? to_spectral(f) : f; }
Field as_physical(const Field& f) { return f.is_physical() ? f : to_physical(f); }

double max_abs(const Field& f) {
  if (f.is_physical()) return kernels::omp::max_abs(f.all_values());
  double m = 0.0;
  for (const auto& c : f.all_coeffs()) m = std::max(m, std::abs(c));
  return m;
}

double hermitian_defect(const Field& spectral) {
  if (spectral.is_physical()) throw ShapeError("hermitian_defect: spectral field required");
  const Lattice& lat = spectral.lattice();
  double worst = 0.0;
  for (int c = 0; c < spectral.components(); ++c) {
    auto co = spectral.coeffs(c);
    for (std::size_t f = 0; f < lat.size(); ++f)
      worst = std::max(worst, std::abs(co[lat.mirror(f)] - std::conj(co[f])));
  }
  return worst;
}

Field tensor_product(const Field& u, const Field& v) {
  if (u.kind() != FieldKind::vector || v.kind() != FieldKind::vector)
    throw ShapeError("tensor_product: two vector fields required");
  if (!(u.lattice() == v.lattice())) throw ShapeError("tensor_product: lattices differ");
  const Field pu = as_physical(u);
  const Field pv = as_physical(v);
  const int d = u.lattice().dim();
  Field out(u.lattice(), FieldKind::tensor);
  for (int i = 0; i < d; ++i) {
    auto a = pu.values(i);
    for (int j = 0; j < d; ++j) {
      auto b = pv.values(j);
      auto o = out.values(i * d + j);
      for (std::size_t x = 0; x < o.size(); ++x) o[x] = a[x] * b[x];
    }
  }
  return out;
}

namespace {

void odd_wavevector(const Lattice& lat, std::size_t flat, double* k) {
  int idx[3];
  lat.unflatten(flat, idx);
  for (int a = 0; a < lat.dim(); ++a) k[a] = lat.odd_wavenumbers()[idx[a]];
}

}  // namespace

Field divergence(const Field& vec) {
  if (vec.kind() != FieldKind::vector) throw ShapeError("divergence: vector field required");
  const Field s = as_spectral(vec);
  const Lattice& lat = vec.lattice();
  Field out(lat, FieldKind::scalar, Representation::spectral);
  auto o = out.coeffs(0);
  for (std::size_t f = 0; f < lat.size(); ++f) {
    double k[3];
    odd_wavevector(lat, f, k);
    complex acc = 0.0;
    for (int a = 0; a < lat.dim(); ++a) acc += k[a] * s.coeffs(a)[f];
    o[f] = complex(0.0, 1.0) * acc;
  }
  return to_physical(out);
}

Field gradient(const Field& scalar) {
  if (scalar.kind() != FieldKind::scalar) throw ShapeError("gradient: scalar field required");
  const Field s = as_spectral(scalar);
  const Lattice& lat = scalar.lattice();
  Field out(lat, FieldKind::vector, Representation::spectral);
  for (std::size_t f = 0; f < lat.size(); ++f) {
    double k[3];
    odd_wavevector(lat, f, k);
    for (int a = 0; a < lat.dim(); ++a) out.coeffs(a)[f] = complex(0.0, k[a]) * s.coeffs(0)[f];
  }
  return to_physical(out);
}

Field component_of(const Field& f, int c) {
  if (c < 0 || c >= f.components()) throw ShapeError("component_of: component out of range");
  Field out(f.lattice(), FieldKind::scalar, f.representation());
  if (f.is_physical())
    std::ranges::copy(f.values(c), out.values(0).begin());
  else
    std::ranges::copy(f.coeffs(c), out.coeffs(0).begin());
  return out;
}

Field dilate(const Field& f, int lambda) {
  if (lambda < 1) throw DomainError("dilate: lambda must be a positive integer");
  const Lattice& lat = f.lattice();
  const Lattice scaled(lat.dim(), lat.n(), lat.box_len() / lambda);
  const Field p = as_physical(f);
  Field out(scaled, f.kind());
  auto src = p.all_values();
  auto dst = out.all_values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lambda * src[i];
  return out;
}

}  // namespace mildns
