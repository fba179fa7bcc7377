#include "mildns/duhamel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mildns/datum.hpp"
#include "mildns/error.hpp"
#include "mildns/kernels.hpp"
#include "mildns/random.hpp"
#include "mode_geometry.hpp"

namespace mildns {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    // map [-1, 1] -> [0, 1]; z is the descending root, store ascending
    x[i] = 0.5 * (1.0 - z);
    x[n - 1 - i] = 0.5 * (1.0 + z);
    w[i] = 0.5 * weight;
    w[n - 1 - i] = 0.5 * weight;
  }
  return {x, w};
}

QuadratureSpec QuadratureSpec::for_book(const ExponentBook& book, int nodes) {
  QuadratureSpec q;
  q.nodes = nodes;
  q.gamma = book.gamma;
  q.theta = book.theta;
  return q;
}

void validate(const QuadratureSpec& quad) {
  if (!(quad.gamma < 1.0)) throw DomainError("quadrature: divergent integral, gamma must be < 1");
  if (!(quad.theta < 1.0)) throw DomainError("quadrature: divergent integral, theta must be < 1");
  if (quad.nodes < 8 || quad.nodes % 2 != 0)
    throw ConfigError("quad.M: node count must be even and at least 8");
}

double grading_exponent(double e) {
  const double room = 1.0 - e;
  const double j = std::max(1.0, std::ceil(2.0 * room - 1e-12));
  return j / room;
}

std::vector<QuadratureNode> duhamel_nodes(double t, const QuadratureSpec& quad) {
  validate(quad);
  if (!(t > 0.0)) throw DomainError("duhamel_nodes: t must be positive");
  const int half = quad.nodes / 2;
  const auto [x, w] = gauss_legendre(half);
  const double mt = grading_exponent(quad.theta);
  const double mg = grading_exponent(quad.gamma);
  const double h = t / 2.0;
  std::vector<QuadratureNode> nodes;
  nodes.reserve(static_cast<std::size_t>(quad.nodes));
  for (int i = 0; i < half; ++i) {
    const double tau = h * std::pow(x[i], mt);
    nodes.push_back({tau, t - tau, h * mt * std::pow(x[i], mt - 1.0) * w[i]});
  }
  for (int i = half - 1; i >= 0; --i) {
    const double lag = h * std::pow(x[i], mg);
    nodes.push_back({t - lag, lag, h * mg * std::pow(x[i], mg - 1.0) * w[i]});
  }
  return nodes;
}

double beta_integral(double gamma, double theta, double t) {
  if (!(gamma < 1.0) || !(theta < 1.0))
    throw DomainError("beta_integral: divergent integral, need gamma < 1 and theta < 1");
  if (!(t > 0.0)) throw DomainError("beta_integral: t must be positive");
  const double c = std::exp(std::lgamma(1.0 - gamma) + std::lgamma(1.0 - theta) -
                            std::lgamma(2.0 - gamma - theta));
  return c * std::pow(t, 1.0 - gamma - theta);
}

double beta_integral_quadrature(double gamma, double theta, double t, int nodes) {
  if (!(gamma < 1.0) || !(theta < 1.0))
    throw DomainError("beta_integral: divergent integral, need gamma < 1 and theta < 1");
  QuadratureSpec q{nodes, gamma, theta};
  double sum = 0.0;
  for (const auto& nd : duhamel_nodes(t, q))
    sum += nd.weight * std::pow(nd.lag, -gamma) * std::pow(nd.tau, -theta);
  return sum;
}

// ---------------------------------------------------------------------------
// bilinear operator

namespace {

using Spectrum = std::vector<complex>;

// P div (sum_i a_i (x) b_i) in spectral form.
Spectrum projected_divergence(const Field& a0, const Field& b0, const Field* a1, const Field* b1) {
  Field t = tensor_product(a0, b0);
  if (a1) t += tensor_product(*a1, *b1);
  const Field ts = to_spectral(t);
  const Lattice& lat = a0.lattice();
  Spectrum out(lat.size() * static_cast<std::size_t>(lat.dim()));
  kernels::serial::composite(ts.all_coeffs(), out, detail::mode_geometry(lat), 0.0, 0.0);
  return out;
}

void require_compatible(const Trajectory& u, const Trajectory& v) {
  validate(u);
  validate(v);
  if (!(u.lattice == v.lattice)) throw ShapeError("bilinear_B: trajectories on different lattices");
  if (u.times != v.times) throw ShapeError("bilinear_B: trajectories on different meshes");
  if (u.fields.front().kind() != FieldKind::vector || v.fields.front().kind() != FieldKind::vector)
    throw ShapeError("bilinear_B: vector trajectories required");
}

struct Interpolant {
  std::vector<double> t;                // node times; t[0] = 0 when anchored
  std::vector<Spectrum> diag;           // P div(u_a (x) v_a)
  std::vector<Spectrum> cross;          // P div(u_a (x) v_{a+1} + u_{a+1} (x) v_a)
  bool anchored = false;
};

Interpolant build_interpolant(const Trajectory& u, const Trajectory& v, std::size_t last,
                              Execution exec) {
  Interpolant ip;
  ip.anchored = u.initial.has_value() && v.initial.has_value();
  std::vector<Field> us, vs;
  if (ip.anchored) {
    ip.t.push_back(0.0);
    us.push_back(as_physical(*u.initial));
    vs.push_back(as_physical(*v.initial));
  }
  for (std::size_t j = 0; j <= last; ++j) {
    ip.t.push_back(u.times[j]);
    us.push_back(as_physical(u.fields[j]));
    vs.push_back(as_physical(v.fields[j]));
  }
  const auto nodes = static_cast<std::ptrdiff_t>(ip.t.size());
  ip.diag.resize(static_cast<std::size_t>(nodes));
  ip.cross.resize(static_cast<std::size_t>(nodes));
  const std::ptrdiff_t tasks = 2 * nodes - 1;
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (std::ptrdiff_t k = 0; k < tasks; ++k) {
    const auto a = static_cast<std::size_t>(k / 2);
    if (k % 2 == 0) {
      ip.diag[a] = projected_divergence(us[a], vs[a], nullptr, nullptr);
    } else {
      ip.cross[a] = projected_divergence(us[a], vs[a + 1], &us[a + 1], &vs[a]);
    }
  }
  return ip;
}

// Accumulates B at time `t` into acc.
void integrate_to(const Interpolant& ip, const Lattice& lat, double t, const QuadratureSpec& quad,
                  Spectrum& acc, bool parallel_modes) {
  const auto ksq = lat.wavenumber_sq();
  for (const auto& nd : duhamel_nodes(t, quad)) {
    const auto it = std::lower_bound(ip.t.begin(), ip.t.end(), nd.tau);
    std::size_t b = static_cast<std::size_t>(it - ip.t.begin());
    if (b >= ip.t.size()) b = ip.t.size() - 1;
    std::span<const complex> src[3];
    double c[3] = {0.0, 0.0, 0.0};
    if (b == 0) {
      // before the first node without an anchor: hold
      src[2] = ip.diag[0];
      c[2] = 1.0;
    } else {
      const std::size_t a = b - 1;
      const double lam = (ip.anchored && a == 0)
                             ? nd.tau / ip.t[b]
                             : std::log(nd.tau / ip.t[a]) / std::log(ip.t[b] / ip.t[a]);
      const double wa = 1.0 - lam, wb = lam;
      src[0] = ip.diag[a];
      src[1] = ip.cross[a];
      src[2] = ip.diag[b];
      c[0] = wa * wa;
      c[1] = wa * wb;
      c[2] = wb * wb;
    }
    if (parallel_modes)
      kernels::omp::duhamel_accumulate(acc, src, c, ksq, nd.weight, nd.lag);
    else
      kernels::serial::duhamel_accumulate(acc, src, c, ksq, nd.weight, nd.lag);
  }
}

Field to_field(const Lattice& lat, const Spectrum& acc) {
  Field f(lat, FieldKind::vector, Representation::spectral);
  std::copy(acc.begin(), acc.end(), f.all_coeffs().begin());
  return to_physical(f);
}

}  // namespace

Trajectory bilinear_B(const Trajectory& u, const Trajectory& v, const QuadratureSpec& quad,
                      Execution exec) {
  require_compatible(u, v);
  validate(quad);
  const Lattice& lat = u.lattice;
  const Interpolant ip = build_interpolant(u, v, u.size() - 1, exec);
  const auto m = static_cast<std::ptrdiff_t>(u.size());
  std::vector<Field> out(u.size(), Field(lat, FieldKind::vector));
  const std::size_t len = lat.size() * static_cast<std::size_t>(lat.dim());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    Spectrum acc(len);
    integrate_to(ip, lat, u.times[static_cast<std::size_t>(j)], quad, acc, false);
    out[static_cast<std::size_t>(j)] = to_field(lat, acc);
  }
  return Trajectory{lat, u.times, std::move(out), Field(lat, FieldKind::vector)};
}

Field bilinear_B_at(const Trajectory& u, const Trajectory& v, double t, const QuadratureSpec& quad) {
  require_compatible(u, v);
  validate(quad);
  std::size_t j = 0;
  while (j < u.size() && std::abs(u.times[j] - t) > 1e-12 * u.times[j]) ++j;
  if (j == u.size()) throw DomainError("bilinear_B_at: t is not a mesh node");
  const Interpolant ip = build_interpolant(u, v, j, Execution::parallel);
  Spectrum acc(u.lattice.size() * static_cast<std::size_t>(u.lattice.dim()));
  integrate_to(ip, u.lattice, u.times[j], quad, acc, true);
  return to_field(u.lattice, acc);
}

// ---------------------------------------------------------------------------
// estimates

const char* to_string(EstimateTarget target) noexcept {
  switch (target) {
    case EstimateTarget::n_space: return "n_space";
    case EstimateTarget::k_space: return "k_space";
    case EstimateTarget::k_cross: return "k_cross";
  }
  return "?";
}

EstimateTarget estimate_target_from_string(const std::string& name) {
  for (auto t : {EstimateTarget::n_space, EstimateTarget::k_space, EstimateTarget::k_cross})
    if (name == to_string(t)) return t;
  throw ConfigError("bilinear.target: unknown target '" + name + "' (n_space, k_space, k_cross)");
}

void check_estimate_exponents(const ExponentBook& book, EstimateTarget target, double q1,
                              double q2) {
  switch (target) {
    case EstimateTarget::n_space:
      if (!book.n_target_admissible())
        throw DomainError("bilinear estimate into N needs q < q_tilde <= 2p");
      return;
    case EstimateTarget::k_space:
      if (!book.k_target_admissible())
        throw DomainError("bilinear estimate into K needs q_tilde > q >= d");
      return;
    case EstimateTarget::k_cross: {
      const double d = book.d, q = book.q;
      if (!(d <= q && q <= q2 && std::isfinite(q2) && q < q1 && std::isfinite(q1)))
        throw DomainError("cross-exponent estimate needs d <= q <= q2 < inf and q < q1 < inf");
      const bool low = q1 < 2.0 * d && q2 < d * q1 / (2.0 * d - q1);
      const bool mid = 2.0 * d <= q1 && q1 <= 2.0 * q;
      const bool high = q1 > 2.0 * q && q2 > q1 / 2.0;
      if (!(low || mid || high))
        throw DomainError("cross-exponent estimate: (q1, q2) outside the admissible region");
      return;
    }
  }
}

EstimateSample bilinear_estimate(const Trajectory& u, const Trajectory& v, const ExponentBook& book,
                                 EstimateTarget target, const QuadratureSpec& quad, double q1,
                                 double q2) {
  if (target != EstimateTarget::k_cross) q1 = q2 = book.q_tilde;
  check_estimate_exponents(book, target, q1, q2);
  const Trajectory b = bilinear_B(u, v, quad);
  const double T = u.horizon();
  EstimateSample out;
  out.horizon = T;
  out.times = u.times;
  NormReport num;
  if (target == EstimateTarget::n_space) {
    num = n_norm(b, book.s, book.p);
    out.denominator = std::pow(T, book.horizon_exponent()) * kato_norm(u, book.q, q1).value *
                      kato_norm(v, book.q, q1).value;
  } else {
    num = kato_norm(b, book.q, q2);
    out.denominator = std::pow(T, 0.5 * (1.0 - book.d / book.q)) *
                      kato_norm(u, book.q, q1).value * kato_norm(v, book.q, q1).value;
  }
  out.numerator = num.value;
  out.per_time = num.per_node;
  if (out.denominator > 0.0) {
    out.ratio = out.numerator / out.denominator;
    for (double& x : out.per_time) x /= out.denominator;
  } else {
    out.ratio = 0.0;
    std::fill(out.per_time.begin(), out.per_time.end(), 0.0);
  }
  return out;
}

BilinearEstimateReport bilinear_estimate_report(const Lattice& lattice, const ExponentBook& book,
                                                EstimateTarget target,
                                                const BilinearCorpusSpec& corpus, double q1,
                                                double q2) {
  if (target != EstimateTarget::k_cross) q1 = q2 = book.q_tilde;
  check_estimate_exponents(book, target, q1, q2);
  if (corpus.pairs < 1) throw ConfigError("bilinear.pairs: need at least one pair");
  if (corpus.horizons.empty()) throw ConfigError("bilinear.horizons: need at least one horizon");
  if (lattice.dim() != book.d) throw ConfigError("bilinear: lattice and exponent dimensions differ");
  for (double T : corpus.horizons)
    if (!lattice.in_window(T)) throw WindowError("bilinear: horizon outside the validity window");

  BilinearEstimateReport rep;
  rep.target = target;
  rep.book = book;
  rep.q1 = q1;
  rep.q2 = q2;
  rep.horizons = corpus.horizons;
  const QuadratureSpec base = QuadratureSpec::for_book(book, corpus.quad_nodes);
  const QuadratureSpec fine = QuadratureSpec::for_book(book, 2 * corpus.quad_nodes);

  std::vector<Field> us, vs;
  for (int i = 0; i < corpus.pairs; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    us.push_back(realize_datum(
        lattice, DatumSpec::random_band(mix_seed(corpus.seed, 2 * k), corpus.k_min, corpus.k_max)
                     .solenoidal()));
    vs.push_back(realize_datum(
        lattice,
        DatumSpec::random_band(mix_seed(corpus.seed, 2 * k + 1), corpus.k_min, corpus.k_max)
            .solenoidal()));
  }

  for (double T : corpus.horizons) {
    const auto mesh = quadratic_mesh(T, corpus.mesh_nodes);
    const auto mesh2 = quadratic_mesh(T, 2 * corpus.mesh_nodes);
    std::vector<double> row, row_fine;
    for (int i = 0; i < corpus.pairs; ++i) {
      const auto s = bilinear_estimate(heat_trajectory(us[i], mesh), heat_trajectory(vs[i], mesh),
                                       book, target, base, q1, q2);
      const auto f = bilinear_estimate(heat_trajectory(us[i], mesh2),
                                       heat_trajectory(vs[i], mesh2), book, target, fine, q1, q2);
      row.push_back(s.ratio);
      row_fine.push_back(f.ratio);
      if (s.ratio > rep.overall_max) {
        rep.overall_max = s.ratio;
        rep.worst = s;
      }
    }
    rep.max_ratio.push_back(*std::max_element(row.begin(), row.end()));
    rep.max_ratio_fine.push_back(*std::max_element(row_fine.begin(), row_fine.end()));
    rep.ratios.push_back(std::move(row));
    rep.ratios_fine.push_back(std::move(row_fine));
  }
  const auto [lo, hi] = std::minmax_element(rep.max_ratio.begin(), rep.max_ratio.end());
  rep.horizon_spread = *lo > 0.0 ? *hi / *lo : 1.0;
  rep.mesh_spread = 1.0;
  for (std::size_t h = 0; h < rep.max_ratio.size(); ++h) {
    const double a = rep.max_ratio[h], b = rep.max_ratio_fine[h];
    if (a > 0.0 && b > 0.0) rep.mesh_spread = std::max(rep.mesh_spread, std::max(a / b, b / a));
  }
  return rep;
}

nlohmann::json to_json(const BilinearEstimateReport& r) {
  return {{"target", to_string(r.target)},
          {"book", to_json(r.book)},
          {"q1", r.q1},
          {"q2", r.q2},
          {"horizons", r.horizons},
          {"max_ratio", r.max_ratio},
          {"max_ratio_fine", r.max_ratio_fine},
          {"overall_max", r.overall_max},
          {"horizon_spread", r.horizon_spread},
          {"mesh_spread", r.mesh_spread},
          {"ratios", r.ratios},
          {"ratios_fine", r.ratios_fine}};
}

}  // namespace mildns
