#include "mildns/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mildns/error.hpp"
#include "mildns/kernels.hpp"

namespace mildns {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool ExponentBook::critical() const noexcept {
  return std::abs(s - (d / p - 1.0)) <= 1e-12;
}

bool ExponentBook::n_target_admissible() const noexcept {
  return q < q_tilde && q_tilde <= 2.0 * p + 1e-12;
}

bool ExponentBook::k_target_admissible() const noexcept {
  return q_tilde > q && q >= d - 1e-12;
}

std::string ExponentBook::key() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "d%d_p%g_s%g_qt%g", d, p, s, q_tilde);
  return buf;
}

ExponentBook build_exponent_book(int d, double p, double s, double q_tilde) {
  if (d != 2 && d != 3) throw DomainError("exponents: dimension must be 2 or 3");
  if (!std::isfinite(p) || !std::isfinite(s) || !std::isfinite(q_tilde))
    throw DomainError("exponents: non-finite input");
  if (!(p > d / 2.0))
    throw DomainError("exponents: p > d/2 violated (p = " + fmt(p) + ", d/2 = " + fmt(d / 2.0) + ")");
  if (s < d / p - 1.0 - 1e-12)
    throw DomainError("exponents: s >= d/p - 1 violated (s = " + fmt(s) + ", d/p - 1 = " +
                      fmt(d / p - 1.0) + ")");
  if (!(s < d / (2.0 * p)))
    throw DomainError("exponents: s < d/(2p) violated (s = " + fmt(s) + ", d/(2p) = " +
                      fmt(d / (2.0 * p)) + ")");
  ExponentBook b;
  b.d = d;
  b.p = p;
  b.s = s;
  b.q = 1.0 / (1.0 / p - s / d);
  if (!(q_tilde > std::max(p, b.q) + 1e-12))
    throw DomainError("exponents: q_tilde > max(p, q) violated (q_tilde = " + fmt(q_tilde) +
                      ", max = " + fmt(std::max(p, b.q)) + ")");
  b.q_tilde = q_tilde;
  b.alpha = d * (1.0 / b.q - 1.0 / q_tilde);
  b.gamma = d / (2.0 * q_tilde) + 0.5;
  b.theta = b.alpha;
  b.young_h = 1.0 / (1.0 + 1.0 / q_tilde - 1.0 / b.q);
  b.young_r = 1.0 / (1.0 + 1.0 / p - 2.0 / q_tilde);
  return b;
}

nlohmann::json to_json(const ExponentBook& b) {
  return {{"d", b.d},           {"p", b.p},           {"s", b.s},
          {"q", b.q},           {"q_tilde", b.q_tilde}, {"alpha", b.alpha},
          {"gamma", b.gamma},   {"theta", b.theta},   {"young_h", b.young_h},
          {"young_r", b.young_r}, {"delta", b.delta}, {"sigma", b.sigma},
          {"key", b.key()}};
}

ExponentBook exponent_book_from_json(const nlohmann::json& j) {
  try {
    ExponentBook b = build_exponent_book(j.at("d").get<int>(), j.at("p").get<double>(),
                                         j.at("s").get<double>(), j.at("q_tilde").get<double>());
    b.delta = j.value("delta", 0.0);
    b.sigma = j.value("sigma", 0.0);
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("exponents: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// trajectories

std::vector<double> quadratic_mesh(double horizon, int m) {
  if (!(horizon > 0.0)) throw ConfigError("mesh.T: horizon must be positive");
  if (m < 1) throw ConfigError("mesh.M_t: need at least one node");
  std::vector<double> t(static_cast<std::size_t>(m));
  for (int j = 1; j <= m; ++j) {
    const double r = static_cast<double>(j) / m;
    t[j - 1] = horizon * r * r;
  }
  t.back() = horizon;
  return t;
}

void validate(const Trajectory& traj) {
  if (traj.times.empty()) throw ShapeError("trajectory: no time nodes");
  if (traj.times.size() != traj.fields.size())
    throw ShapeError("trajectory: node and field counts differ");
  double prev = 0.0;
  for (double t : traj.times) {
    if (!(t > prev)) throw DataError("trajectory: times must be positive and increasing");
    prev = t;
  }
  for (const Field& f : traj.fields)
    if (!(f.lattice() == traj.lattice) || f.kind() != traj.fields.front().kind())
      throw ShapeError("trajectory: fields differ in lattice or kind");
  if (traj.initial && !(traj.initial->lattice() == traj.lattice))
    throw ShapeError("trajectory: initial field on a different lattice");
}

Trajectory heat_trajectory(const Field& u0, const std::vector<double>& times) {
  const Field spec = as_spectral(u0);
  Trajectory traj{u0.lattice(), times, {}, as_physical(u0)};
  traj.fields.reserve(times.size());
  for (double t : times) {
    Field f = spec;
    kernels::omp::scale_by_heat(f.all_coeffs(), u0.lattice().wavenumber_sq(), t);
    traj.fields.push_back(to_physical(f));
  }
  validate(traj);
  return traj;
}

Trajectory constant_trajectory(const Field& f, const std::vector<double>& times) {
  Trajectory traj{f.lattice(), times, std::vector<Field>(times.size(), as_physical(f)),
                  as_physical(f)};
  validate(traj);
  return traj;
}

Trajectory zero_trajectory(const Lattice& lattice, const std::vector<double>& times) {
  return constant_trajectory(Field(lattice, FieldKind::vector), times);
}

namespace {

template <class Op>
Trajectory combine(const Trajectory& a, const Trajectory& b, Op op) {
  if (a.times != b.times || !(a.lattice == b.lattice))
    throw ShapeError("trajectory arithmetic: meshes or lattices differ");
  Trajectory out{a.lattice, a.times, {}, std::nullopt};
  out.fields.reserve(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out.fields.push_back(op(a.fields[j], b.fields[j]));
  if (a.initial && b.initial) out.initial = op(*a.initial, *b.initial);
  return out;
}

}  // namespace

Trajectory operator-(const Trajectory& a, const Trajectory& b) {
  return combine(a, b, [](const Field& x, const Field& y) { return x - y; });
}

Trajectory operator+(const Trajectory& a, const Trajectory& b) {
  return combine(a, b, [](const Field& x, const Field& y) { return x + y; });
}

Trajectory operator*(double c, const Trajectory& a) {
  Trajectory out = a;
  for (Field& f : out.fields) f *= c;
  if (out.initial) *out.initial *= c;
  return out;
}

// ---------------------------------------------------------------------------
// norms

nlohmann::json to_json(const NormReport& r) {
  nlohmann::json ex = nlohmann::json::object();
  for (const auto& [k, v] : r.exponents) ex[k] = v;
  nlohmann::json j = {{"kind", r.kind}, {"exponents", ex}, {"value", r.value},
                      {"window_ok", r.window_ok}};
  if (r.argmax_t) j["argmax_t"] = *r.argmax_t;
  if (!r.per_node.empty()) j["per_node"] = r.per_node;
  return j;
}

namespace {

double component_norm(std::span<const double> v, double r, double cell) {
  const double scale = kernels::omp::max_abs(v);
  if (scale == 0.0) return 0.0;
  if (std::isinf(r)) return scale;
  return scale * std::pow(kernels::omp::power_sum(v, r, scale) * cell, 1.0 / r);
}

}  // namespace

double lebesgue_norm(const Field& f, double r) {
  if (!(r >= 1.0)) throw DomainError("lebesgue_norm: r must be at least 1 (got " + fmt(r) + ")");
  const Field phys = as_physical(f);
  const double cell = f.lattice().cell_volume();
  if (phys.components() == 1) return component_norm(phys.values(0), r, cell);
  double sum = 0.0;
  std::vector<double> parts(static_cast<std::size_t>(phys.components()));
  for (int c = 0; c < phys.components(); ++c) parts[c] = component_norm(phys.values(c), r, cell);
  const double big = *std::max_element(parts.begin(), parts.end());
  if (big == 0.0) return 0.0;
  for (double x : parts) sum += (x / big) * (x / big);
  return big * std::sqrt(sum);
}

double sobolev_norm(const Field& f, double s, double p) {
  if (!(p >= 1.0)) throw DomainError("sobolev_norm: p must be at least 1");
  Field sp = as_spectral(f);
  kernels::omp::scale_by_power(sp.all_coeffs(), f.lattice().wavenumber_sq(), s);
  return lebesgue_norm(to_physical(sp), p);
}

std::vector<double> dyadic_time_grid(double t_min, double t_max, int per_octave) {
  if (!(t_min > 0.0) || !(t_max >= t_min)) throw DomainError("dyadic grid: need 0 < t_min <= t_max");
  if (per_octave < 1) throw DomainError("dyadic grid: per_octave must be positive");
  const double k = per_octave;
  const auto lo = static_cast<long>(std::ceil(k * std::log2(t_min) - 1e-9));
  const auto hi = static_cast<long>(std::floor(k * std::log2(t_max) + 1e-9));
  std::vector<double> grid;
  for (long j = lo; j <= hi; ++j) grid.push_back(std::exp2(static_cast<double>(j) / k));
  return grid;
}

NormReport besov_norm_heat(const Field& f, double s, double q, const std::vector<double>& t_grid) {
  if (!(s < 0.0)) throw DomainError("besov_norm_heat: the heat characterization needs s < 0");
  if (!(q >= 1.0)) throw DomainError("besov_norm_heat: q must be at least 1");
  if (t_grid.empty()) throw DomainError("besov_norm_heat: empty time grid");
  const Lattice& lat = f.lattice();
  for (double t : t_grid) {
    if (!(t > 0.0)) throw DomainError("besov_norm_heat: grid times must be positive");
    if (!lat.in_window(t))
      throw WindowError("besov_norm_heat: t = " + fmt(t) + " exceeds the validity window L^2/16 = " +
                        fmt(lat.max_valid_time()));
  }
  Field spec = as_spectral(f);
  for (int c = 0; c < spec.components(); ++c) spec.coeffs(c)[0] = 0.0;
  NormReport rep;
  rep.kind = "besov_heat";
  rep.exponents = {{"s", s}, {"q", q}};
  rep.per_node.reserve(t_grid.size());
  for (double t : t_grid) {
    Field g = spec;
    kernels::omp::scale_by_heat(g.all_coeffs(), lat.wavenumber_sq(), t);
    const double v = std::pow(t, -s / 2.0) * lebesgue_norm(to_physical(g), q);
    rep.per_node.push_back(v);
    if (!rep.argmax_t || v > rep.value) {
      rep.value = v;
      rep.argmax_t = t;
    }
  }
  return rep;
}

NormReport weighted_sup_norm(const Trajectory& traj, double weight, double r) {
  NormReport rep;
  rep.kind = "weighted_sup";
  rep.exponents = {{"weight", weight}, {"r", r}};
  rep.window_ok = traj.lattice.in_window(traj.horizon());
  rep.per_node.reserve(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const double v = std::pow(traj.times[j], weight) * lebesgue_norm(traj.fields[j], r);
    rep.per_node.push_back(v);
    if (!rep.argmax_t || v > rep.value) {
      rep.value = v;
      rep.argmax_t = traj.times[j];
    }
  }
  return rep;
}

NormReport kato_norm(const Trajectory& traj, double q, double q_tilde) {
  if (!(q >= 1.0)) throw DomainError("kato_norm: q must be at least 1");
  if (q_tilde < q) throw DomainError("kato_norm: q_tilde must not be below q");
  const double alpha = traj.lattice.dim() * (1.0 / q - 1.0 / q_tilde);
  NormReport rep = weighted_sup_norm(traj, alpha / 2.0, q_tilde);
  rep.kind = "kato";
  rep.exponents = {{"q", q}, {"q_tilde", q_tilde}, {"alpha", alpha}};
  return rep;
}

NormReport n_norm(const Trajectory& traj, double s, double p) {
  NormReport rep;
  rep.kind = "n_norm";
  rep.exponents = {{"s", s}, {"p", p}};
  rep.window_ok = traj.lattice.in_window(traj.horizon());
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const double v = sobolev_norm(traj.fields[j], s, p);
    rep.per_node.push_back(v);
    if (!rep.argmax_t || v > rep.value) {
      rep.value = v;
      rep.argmax_t = traj.times[j];
    }
  }
  return rep;
}

VanishingReport vanishing_at_zero(const Trajectory& traj, double weight, double r) {
  const double cut = traj.horizon() / 100.0;
  const auto early = std::count_if(traj.times.begin(), traj.times.end(),
                                   [cut](double t) { return t < cut; });
  if (early < 5)
    throw ConfigError("mesh: vanishing check needs five nodes below T/100 (found " +
                      std::to_string(early) + ")");
  VanishingReport rep;
  for (std::size_t j = 0; j < 5; ++j) {
    rep.times.push_back(traj.times[j]);
    rep.values.push_back(std::pow(traj.times[j], weight) * lebesgue_norm(traj.fields[j], r));
  }
  rep.vanishing = true;
  for (std::size_t j = 1; j < 5; ++j) rep.vanishing = rep.vanishing && rep.values[j - 1] < rep.values[j];
  return rep;
}

DecayFit decay_exponent_fit(const std::vector<double>& t, const std::vector<double>& values,
                            std::pair<double, double> window) {
  if (t.size() != values.size()) throw DataError("decay fit: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.first || t[i] > window.second) continue;
    if (!(values[i] > 0.0) || !(t[i] > 0.0))
      throw DataError("decay fit: non-positive value at t = " + fmt(t[i]));
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(values[i]));
  }
  if (lx.size() < 8) throw DataError("decay fit: need at least 8 points in the window");
  const double n = static_cast<double>(lx.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw DataError("decay fit: degenerate time window");
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = lx.size();
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double model = fit.intercept + fit.slope * lx[i];
    fit.max_relative_residual = std::max(fit.max_relative_residual, std::abs(std::expm1(model - ly[i])));
  }
  fit.power_law = fit.max_relative_residual <= 0.1;
  return fit;
}

EmbeddingReport sobolev_embedding_check(const std::vector<Field>& corpus, double s1, double q1,
                                        double s2, double q2) {
  if (corpus.empty()) throw DataError("embedding: empty corpus");
  if (!(q1 > 1.0) || !(q2 > 1.0) || std::isinf(q1) || std::isinf(q2))
    throw DomainError("embedding: need 1 < q1, q2 < inf");
  const int d = corpus.front().lattice().dim();
  if (std::abs((s1 - d / q1) - (s2 - d / q2)) > 1e-12)
    throw DomainError("embedding: scaling relation s1 - d/q1 = s2 - d/q2 violated (" +
                      fmt(s1 - d / q1) + " vs " + fmt(s2 - d / q2) + ")");
  EmbeddingReport rep;
  const std::size_t half = (corpus.size() + 1) / 2;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const double den = sobolev_norm(corpus[i], s1, q1);
    if (!(den > 0.0)) throw DataError("embedding: zero field in corpus");
    const double ratio = sobolev_norm(corpus[i], s2, q2) / den;
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (i < half) rep.max_ratio_half = rep.max_ratio;
  }
  rep.stable = std::isfinite(rep.max_ratio) && rep.max_ratio <= 2.0 * rep.max_ratio_half;
  return rep;
}

}  // namespace mildns
