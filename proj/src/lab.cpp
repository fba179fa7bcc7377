#include "mildns/lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "mildns/datum.hpp"
#include "mildns/duhamel.hpp"
#include "mildns/multipliers.hpp"
#include "mildns/random.hpp"

namespace mildns::lab {

using nlohmann::json;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// config access

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string item;
  while (std::getline(ss, item, '.')) parts.push_back(item);
  return parts;
}

const json& at_path(const json& doc, const std::string& path) {
  const json* node = &doc;
  for (const auto& part : split_path(path)) {
    if (!node->is_object() || !node->contains(part)) throw ConfigError(path + ": missing");
    node = &(*node)[part];
  }
  return *node;
}

double num(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

int integer(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return v.get<int>();
}

std::uint64_t unsigned_integer(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(path + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool flag(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

std::string text(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> nums(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(path + ": expected a non-empty array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw ConfigError(key + ": " + why);
}

// Runs a module validation and reports any non-I/O failure as a ConfigError on `key`.
template <class F>
auto checked(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

// Every key of `patch` must already exist in `base`; objects recurse, values replace.
void strict_merge(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError((prefix.empty() ? "config" : prefix) + ": expected an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(key + ": unknown key");
    json& target = base[it.key()];
    if (target.is_object() && it->is_object())
      strict_merge(target, *it, key);
    else
      target = *it;
  }
}

// ---------------------------------------------------------------------------
// shared context

struct Context {
  const ExperimentConfig& cfg;
  const json& doc;
  std::uint64_t seed;
  Lattice lattice;
  ExponentBook book;
  DatumSpec datum;
  MeshSpec mesh;
};

Lattice parse_lattice(const json& doc) {
  return checked("lattice", [&] {
    return Lattice(integer(doc, "lattice.d"), integer(doc, "lattice.n"), num(doc, "lattice.box_len"));
  });
}

ExponentBook parse_book(const json& doc, int d) {
  return checked("book", [&] {
    return build_exponent_book(d, num(doc, "book.p"), num(doc, "book.s"), num(doc, "book.q_tilde"));
  });
}

DatumSpec parse_datum(const json& doc, const Lattice& lat, std::uint64_t seed) {
  DatumSpec spec;
  spec.kind = datum_kind_from_string(text(doc, "datum.kind"));
  spec.amplitude = num(doc, "datum.amplitude");
  spec.width = num(doc, "datum.width");
  const json& mode = at_path(doc, "datum.mode");
  require(mode.is_array() && mode.size() <= 3, "datum.mode", "expected up to three integers");
  spec.mode = {0, 0, 0};
  for (std::size_t i = 0; i < mode.size(); ++i) {
    require(mode[i].is_number_integer(), "datum.mode", "expected integers");
    spec.mode[i] = mode[i].get<int>();
  }
  spec.exponent = num(doc, "datum.exponent");
  spec.inner = num(doc, "datum.inner");
  spec.outer = num(doc, "datum.outer");
  spec.k_min = num(doc, "datum.k_min");
  spec.k_max = num(doc, "datum.k_max");
  spec.divergence_free = flag(doc, "datum.divergence_free");
  spec.seed = mix_seed(seed, 0);
  validate(spec, lat);
  return spec;
}

MeshSpec parse_mesh(const json& doc) {
  MeshSpec m{num(doc, "mesh.horizon"), integer(doc, "mesh.nodes"), integer(doc, "mesh.quad_nodes")};
  require(m.horizon > 0.0 && std::isfinite(m.horizon), "mesh.horizon", "must be positive");
  require(m.nodes >= 4, "mesh.nodes", "need at least 4 time nodes");
  return m;
}

Context make_context(const ExperimentConfig& cfg) {
  const json& doc = cfg.doc;
  const std::uint64_t seed = unsigned_integer(doc, "seed");
  Lattice lat = parse_lattice(doc);
  ExponentBook book = parse_book(doc, lat.dim());
  DatumSpec datum = parse_datum(doc, lat, seed);
  MeshSpec mesh = parse_mesh(doc);
  return Context{cfg, doc, seed, std::move(lat), book, datum, mesh};
}

double window(const Lattice& lat) { return lat.box_len() * lat.box_len() / 16.0; }

void require_window(const Lattice& lat, double t, const std::string& key) {
  require(t <= window(lat), key,
          "time " + io::format_double(t) + " leaves the validity window L^2/16 = " +
              io::format_double(window(lat)));
}

// Band-limited inputs to quadratic terms stay within |k|_inf <= n/4.
void require_dealiased(const Lattice& lat, double k_max, const std::string& key) {
  require(k_max <= lat.n() / 4.0, key, "band exceeds n/4, products would alias");
}

void require_quadrature(const ExponentBook& book, int nodes, const std::string& key) {
  checked(key, [&] {
    validate(QuadratureSpec::for_book(book, nodes));
    return 0;
  });
}

// ---------------------------------------------------------------------------
// calibration

struct CalibrationUse {
  std::string mode;  // none, auto, file
  CalibrationSpec spec;
  std::optional<Calibration> loaded;
  std::string file_hash;
};

CalibrationUse parse_calibration(const Context& ctx) {
  CalibrationUse use;
  use.mode = text(ctx.doc, "calibration.mode");
  require(use.mode == "none" || use.mode == "auto" || use.mode == "file", "calibration.mode",
          "expected none, auto or file");
  use.spec.pairs = integer(ctx.doc, "calibration.pairs");
  use.spec.seed = unsigned_integer(ctx.doc, "calibration.seed");
  use.spec.k_min = num(ctx.doc, "calibration.k_min");
  use.spec.k_max = num(ctx.doc, "calibration.k_max");
  use.spec.mesh_nodes = integer(ctx.doc, "calibration.mesh_nodes");
  use.spec.quad_nodes = integer(ctx.doc, "calibration.quad_nodes");
  use.spec.horizon = ctx.mesh.horizon;
  require(use.spec.pairs >= 20, "calibration.pairs", "need at least 20 pairs");
  require(use.spec.k_min >= 1.0 && use.spec.k_min <= use.spec.k_max, "calibration.k_min",
          "need 1 <= k_min <= k_max");
  require_dealiased(ctx.lattice, use.spec.k_max, "calibration.k_max");
  if (use.mode == "auto") {
    require(ctx.book.k_target_admissible(), "calibration.mode",
            "calibration needs q_tilde > q >= d for the book");
    require_quadrature(ctx.book, use.spec.quad_nodes, "calibration.quad_nodes");
  }
  if (use.mode == "file") {
    const std::string file = text(ctx.doc, "calibration.file");
    require(!file.empty(), "calibration.file", "required when calibration.mode is file");
    use.loaded = load_calibration(file);
    require(use.loaded->book_key == ctx.book.key(), "calibration.file",
            "calibrated for " + use.loaded->book_key + ", not " + ctx.book.key());
    use.file_hash = io::file_hash(file);
  }
  return use;
}

struct ResolvedCalibration {
  std::optional<Calibration> cal;
  std::string hash = "none";
};

ResolvedCalibration resolve(const Context& ctx, const CalibrationUse& use) {
  ResolvedCalibration r;
  if (use.mode == "file") {
    r.cal = use.loaded;
    r.hash = use.file_hash;
  } else if (use.mode == "auto") {
    r.cal = calibrate_thresholds(ctx.lattice, ctx.book, use.spec);
    r.hash = io::fnv1a_hex(to_json(*r.cal).dump());
  }
  return r;
}

// ---------------------------------------------------------------------------
// helpers

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return out;
}

std::vector<double> lin_spaced(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

json trace_summary(const PicardTrace& t) {
  return {{"converged", t.converged},
          {"iterations", t.iteration_count},
          {"residual", std::isfinite(t.residual) ? json(t.residual) : json(nullptr)},
          {"max_ratio", t.max_ratio()},
          {"stop_reason", t.stop_reason}};
}

io::Table trace_table(const PicardTrace& t) {
  io::Table tab;
  tab.columns = {"iteration", "norm", "aux_norm", "difference", "ratio"};
  for (const auto& r : t.iterations)
    tab.add({static_cast<double>(r.iteration), r.norm, r.aux_norm, r.difference, r.ratio});
  return tab;
}

// ||G_sigma||_{L^r} for the heat kernel (4 pi sigma)^{-d/2} e^{-|x|^2 / 4 sigma}.
double gaussian_lebesgue(int d, double sigma, double r) {
  const double base = std::pow(4.0 * std::numbers::pi * sigma, -0.5 * d);
  if (std::isinf(r)) return base;
  return base * std::pow(4.0 * std::numbers::pi * sigma / r, 0.5 * d / r);
}

// Scales u0 so the chosen smallness lhs equals fraction x threshold.
Field scale_to_fraction(const Field& u0, double horizon, const ExponentBook& book,
                        SmallnessVariant variant, double fraction) {
  const auto rep = smallness_lhs(u0, horizon, book, variant);
  const double threshold = variant == SmallnessVariant::besov ? book.sigma : book.delta;
  if (!(rep.lhs > 0.0)) throw DataError("datum has zero smallness lhs, cannot be scaled");
  Field out = u0;
  out *= fraction * threshold / rep.lhs;
  return out;
}

using Runner = std::function<ExperimentResult()>;

ExperimentResult start(const Context& ctx) {
  ExperimentResult r;
  r.id = ctx.cfg.id;
  r.config = ctx.doc;
  return r;
}

// ---------------------------------------------------------------------------
// experiments

Runner prep_kernel_decay(const Context& ctx) {
  const auto s_list = nums(ctx.doc, "params.s_list");
  const double r_min = num(ctx.doc, "params.r_min");
  const double r_max = num(ctx.doc, "params.r_max");
  const int count = integer(ctx.doc, "params.radii");
  const double tail = num(ctx.doc, "params.tail_start");
  const auto t_list = nums(ctx.doc, "params.t_list");
  require(count >= 2, "params.radii", "need at least two radii");
  require(r_min > 0.0 && r_min < r_max, "params.r_min", "need 0 < r_min < r_max");
  require(tail > r_min && tail < r_max, "params.tail_start", "must lie inside (r_min, r_max)");
  const auto radii = log_spaced(r_min, r_max, count);
  for (double s : s_list)
    checked("params.s_list", [&] {
      kernel_profile_direct(s, ctx.lattice, std::span<const double>(radii.data(), 1), 1.0);
      return 0;
    });
  for (double t : t_list) {
    require(t > 0.0, "params.t_list", "times must be positive");
    const Lattice unit(ctx.lattice.dim(), ctx.lattice.n(), ctx.lattice.box_len() / std::sqrt(t));
    require(2.0 * std::numbers::pi * unit.n() / unit.box_len() >= 16.0, "params.t_list",
            "rescaled lattice too coarse for t = " + io::format_double(t));
  }
  require(r_max <= ctx.lattice.box_len() / 4.0, "params.r_max", "exceeds L/4");
  return [&ctx, s_list, radii, tail, t_list] {
    auto res = start(ctx);
    io::Table profile{{"s", "r", "kernel", "bound_ratio"}, {}};
    io::Table summary{{"s", "tail_slope", "expected_slope", "slope_rel_err", "implied_constant",
                       "all_finite", "selfsim_max_rel_err"},
                      {}};
    double worst_slope = 0.0, worst_self = 0.0;
    bool finite = true;
    for (double s : s_list) {
      const auto p = kernel_profile(s, ctx.lattice, radii, tail);
      bool ok = true;
      for (std::size_t i = 0; i < radii.size(); ++i) {
        profile.add({s, radii[i], p.kernel_values[i], p.bound_ratio[i]});
        ok = ok && std::isfinite(p.bound_ratio[i]);
      }
      double self = 0.0;
      for (double t : t_list) {
        const auto direct = kernel_profile_direct(s, ctx.lattice, radii, t);
        const auto scaled = kernel_profile_scaled(s, ctx.lattice, radii, t);
        for (std::size_t i = 0; i < radii.size(); ++i)
          self = std::max(self, rel(scaled.kernel_values[i], direct.kernel_values[i]));
      }
      const double expected = -(ctx.lattice.dim() + 1 + s);
      const double slope_err = rel(p.tail_slope, expected);
      summary.add({s, p.tail_slope, expected, slope_err, p.implied_constant, ok ? 1.0 : 0.0, self});
      worst_slope = std::max(worst_slope, slope_err);
      worst_self = std::max(worst_self, self);
      finite = finite && ok;
    }
    res.tables = {{"profile", profile}, {"summary", summary}};
    res.summary = {{"max_slope_rel_err", worst_slope},
                   {"max_selfsim_rel_err", worst_self},
                   {"all_finite", finite}};
    return res;
  };
}

Runner prep_beta_integral(const Context& ctx) {
  const double g0 = num(ctx.doc, "params.gamma_min"), g1 = num(ctx.doc, "params.gamma_max");
  const double h0 = num(ctx.doc, "params.theta_min"), h1 = num(ctx.doc, "params.theta_max");
  const int count = integer(ctx.doc, "params.count");
  const double t = num(ctx.doc, "params.t");
  const int nodes = integer(ctx.doc, "params.nodes");
  require(g1 < 1.0 && g0 <= g1, "params.gamma_max", "need gamma_min <= gamma_max < 1");
  require(h1 < 1.0 && h0 <= h1, "params.theta_max", "need theta_min <= theta_max < 1");
  require(count >= 1, "params.count", "must be positive");
  require(t > 0.0, "params.t", "must be positive");
  require(nodes >= 8 && nodes % 2 == 0, "params.nodes", "need an even count >= 8");
  return [&ctx, g0, g1, h0, h1, count, t, nodes] {
    auto res = start(ctx);
    io::Table tab{{"gamma", "theta", "closed_form", "quadrature", "rel_err"}, {}};
    double worst = 0.0;
    for (double g : lin_spaced(g0, g1, count)) {
      for (double h : lin_spaced(h0, h1, count)) {
        const double exact = beta_integral(g, h, t);
        const double quad = beta_integral_quadrature(g, h, t, nodes);
        const double e = rel(quad, exact);
        worst = std::max(worst, e);
        tab.add({g, h, exact, quad, e});
      }
    }
    res.tables = {{"grid", tab}};
    res.summary = {{"max_rel_err", worst}, {"rule", QuadratureSpec::rule}, {"nodes", nodes}};
    return res;
  };
}

Runner prep_heat_decay(const Context& ctx) {
  const double q = num(ctx.doc, "params.q");
  const double qt = num(ctx.doc, "params.q_tilde");
  const double t0 = num(ctx.doc, "params.t_min"), t1 = num(ctx.doc, "params.t_max");
  const int per = integer(ctx.doc, "params.per_octave");
  const double f0 = num(ctx.doc, "params.fit_min"), f1 = num(ctx.doc, "params.fit_max");
  require(q >= 1.0 && qt > q, "params.q_tilde", "need 1 <= q < q_tilde");
  require(t0 > 0.0 && t0 < t1, "params.t_min", "need 0 < t_min < t_max");
  require(per >= 1, "params.per_octave", "must be positive");
  require(f0 >= t0 && f1 <= t1 && f0 < f1, "params.fit_min", "fit window must lie inside [t_min, t_max]");
  require_window(ctx.lattice, t1, "params.t_max");
  const double box = ctx.lattice.box_len();
  require(box * box >= 100.0 * t1, "params.t_max", "need L^2 >= 100 t_max");
  return [&ctx, q, qt, t0, t1, per, f0, f1] {
    auto res = start(ctx);
    const Field u0 = realize_datum(ctx.lattice, ctx.datum);
    const bool gaussian = ctx.datum.kind == DatumSpec::Kind::gaussian;
    const int d = ctx.lattice.dim();
    const double alpha = d * (1.0 / q - 1.0 / qt);
    io::Table tab{{"t", "norm", "closed_form", "rel_err", "weighted"}, {}};
    std::vector<double> ts, vs;
    double worst = 0.0;
    for (double t : dyadic_time_grid(t0, t1, per)) {
      const double v = lebesgue_norm(heat_flow(u0, t), qt);
      const double exact = gaussian ? gaussian_lebesgue(d, ctx.datum.width + t, qt) : nan;
      const double e = gaussian ? rel(v, exact) : nan;
      if (gaussian) worst = std::max(worst, e);
      tab.add({t, v, exact, e, std::pow(t, alpha / 2.0) * v});
      ts.push_back(t);
      vs.push_back(v);
    }
    const auto fit = decay_exponent_fit(ts, vs, {f0, f1});
    const double expected = -alpha / 2.0;
    res.tables = {{"decay", tab}};
    res.summary = {{"slope", fit.slope},
                   {"expected_slope", expected},
                   {"slope_rel_err", rel(fit.slope, expected)},
                   {"fit_points", fit.points},
                   {"power_law", fit.power_law},
                   {"max_closed_form_rel_err", gaussian ? json(worst) : json(nullptr)}};
    return res;
  };
}

Runner prep_besov_equiv(const Context& ctx) {
  const double s = num(ctx.doc, "params.s");
  const double q = num(ctx.doc, "params.q");
  const double t0 = num(ctx.doc, "params.t_min"), t1 = num(ctx.doc, "params.t_max");
  const int per = integer(ctx.doc, "params.per_octave");
  const double factor = num(ctx.doc, "params.rescale");
  require(s < 0.0, "params.s", "must be negative");
  require(q >= 1.0, "params.q", "must be at least 1");
  require(t0 > 0.0 && t0 < t1, "params.t_min", "need 0 < t_min < t_max");
  require(per >= 1, "params.per_octave", "must be positive");
  require(factor > 0.0, "params.rescale", "must be positive");
  require_window(ctx.lattice, t1, "params.t_max");
  return [&ctx, s, q, t0, t1, per, factor] {
    auto res = start(ctx);
    const Field u0 = realize_datum(ctx.lattice, ctx.datum);
    const auto grid = dyadic_time_grid(t0, t1, per);
    const auto rep = besov_norm_heat(u0, s, q, grid);
    Field scaled = u0;
    scaled *= factor;
    const auto rep_scaled = besov_norm_heat(scaled, s, q, grid);
    io::Table tab{{"t", "weighted"}, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) tab.add({grid[i], rep.per_node[i]});
    res.tables = {{"grid", tab}};
    res.summary = {{"value", rep.value},
                   {"argmax_t", rep.argmax_t.value_or(nan)},
                   {"argmax_t_rescaled", rep_scaled.argmax_t.value_or(nan)},
                   {"value_ratio", rep_scaled.value / rep.value},
                   {"rescale", factor},
                   {"definition", "heat characterization"}};
    if (ctx.datum.kind == DatumSpec::Kind::single_mode) {
      // |e^{t Delta} u0| = e^{-|k|^2 t} |u0| and ||cos||_q^q = L^d Gamma((q+1)/2) / (sqrt(pi) Gamma(q/2+1))
      const Lattice& lat = ctx.lattice;
      double k2 = 0.0;
      for (int a = 0; a < lat.dim(); ++a) {
        const double k = 2.0 * std::numbers::pi / lat.box_len() * ctx.datum.mode[a];
        k2 += k * k;
      }
      const double cos_q = std::pow(lat.volume() * std::exp(std::lgamma((q + 1) / 2) - std::lgamma(q / 2 + 1)) /
                                        std::sqrt(std::numbers::pi),
                                    1.0 / q);
      const double t_star = -s / (2.0 * k2);
      const double closed = std::abs(ctx.datum.amplitude) * cos_q * std::pow(t_star, -s / 2) * std::exp(s / 2);
      res.summary["closed_form"] = closed;
      res.summary["closed_form_argmax_t"] = t_star;
      res.summary["rel_err"] = rel(rep.value, closed);
    }
    return res;
  };
}

Runner prep_embedding(const Context& ctx) {
  const int count = integer(ctx.doc, "params.corpus");
  const double s1 = num(ctx.doc, "params.s1"), q1 = num(ctx.doc, "params.q1");
  const double s2 = num(ctx.doc, "params.s2"), q2 = num(ctx.doc, "params.q2");
  const double k0 = num(ctx.doc, "params.k_min"), k1 = num(ctx.doc, "params.k_max");
  require(count >= 2, "params.corpus", "need at least two fields");
  const int d = ctx.lattice.dim();
  require(std::abs((s1 - d / q1) - (s2 - d / q2)) <= 1e-12, "params.q2",
          "need s1 - d/q1 = s2 - d/q2");
  checked("params.k_max", [&] {
    validate(DatumSpec::random_band(0, k0, k1), ctx.lattice);
    return 0;
  });
  return [&ctx, count, s1, q1, s2, q2, k0, k1] {
    auto res = start(ctx);
    std::vector<Field> corpus;
    for (int i = 0; i < count; ++i)
      corpus.push_back(realize_scalar(ctx.lattice, DatumSpec::random_band(mix_seed(ctx.seed, 1 + i), k0, k1)));
    const auto rep = sobolev_embedding_check(corpus, s1, q1, s2, q2);
    io::Table tab{{"index", "ratio"}, {}};
    for (std::size_t i = 0; i < rep.ratios.size(); ++i) tab.add({static_cast<double>(i), rep.ratios[i]});
    res.tables = {{"ratios", tab}};
    res.summary = {{"max_ratio", rep.max_ratio}, {"max_ratio_half", rep.max_ratio_half}, {"stable", rep.stable}};
    return res;
  };
}

Runner prep_bilinear(const Context& ctx) {
  const EstimateTarget target = estimate_target_from_string(text(ctx.doc, "params.target"));
  BilinearCorpusSpec corpus;
  corpus.pairs = integer(ctx.doc, "params.pairs");
  corpus.k_min = num(ctx.doc, "params.k_min");
  corpus.k_max = num(ctx.doc, "params.k_max");
  corpus.mesh_nodes = integer(ctx.doc, "params.mesh_nodes");
  corpus.quad_nodes = integer(ctx.doc, "params.quad_nodes");
  corpus.horizons = nums(ctx.doc, "params.horizons");
  corpus.seed = mix_seed(ctx.seed, 1);
  const double q1 = num(ctx.doc, "params.q1"), q2 = num(ctx.doc, "params.q2");
  require(corpus.pairs >= 1, "params.pairs", "must be positive");
  require(corpus.mesh_nodes >= 4, "params.mesh_nodes", "need at least 4 nodes");
  require(corpus.k_min >= 1.0 && corpus.k_min <= corpus.k_max, "params.k_min", "need 1 <= k_min <= k_max");
  require_dealiased(ctx.lattice, corpus.k_max, "params.k_max");
  checked("params.target", [&] {
    check_estimate_exponents(ctx.book, target, q1 > 0 ? q1 : ctx.book.q_tilde, q2 > 0 ? q2 : ctx.book.q_tilde);
    return 0;
  });
  require_quadrature(ctx.book, corpus.quad_nodes, "params.quad_nodes");
  for (double h : corpus.horizons) {
    require(h > 0.0, "params.horizons", "must be positive");
    require_window(ctx.lattice, h, "params.horizons");
  }
  return [&ctx, target, corpus, q1, q2] {
    auto res = start(ctx);
    const auto rep = bilinear_estimate_report(ctx.lattice, ctx.book, target, corpus, q1, q2);
    io::Table tab{{"horizon", "pair", "ratio", "ratio_fine"}, {}};
    for (std::size_t h = 0; h < rep.horizons.size(); ++h)
      for (std::size_t p = 0; p < rep.ratios[h].size(); ++p)
        tab.add({rep.horizons[h], static_cast<double>(p), rep.ratios[h][p], rep.ratios_fine[h][p]});
    res.tables = {{"ratios", tab}};
    res.summary = to_json(rep);
    return res;
  };
}

Runner prep_smallness(const Context& ctx) {
  const auto use = parse_calibration(ctx);
  const auto fractions = nums(ctx.doc, "params.scales");
  require_window(ctx.lattice, ctx.mesh.horizon, "mesh.horizon");
  return [&ctx, use, fractions] {
    auto res = start(ctx);
    const auto cal = resolve(ctx, use);
    const ExponentBook book = cal.cal ? apply_calibration(ctx.book, *cal.cal) : ctx.book;
    const Field u0 = realize_datum(ctx.lattice, ctx.datum);
    io::Table tab{{"scale", "variant", "lhs", "threshold", "satisfied", "argmax_t", "grid_points"}, {}};
    for (double c : fractions) {
      Field u = u0;
      u *= c;
      for (auto v : {SmallnessVariant::heat_sup, SmallnessVariant::critical, SmallnessVariant::besov}) {
        if (v == SmallnessVariant::critical && !book.critical()) continue;
        const auto r = smallness_lhs(u, ctx.mesh.horizon, book, v);
        tab.add({c, static_cast<double>(v), r.lhs, r.threshold, r.satisfied ? 1.0 : 0.0, r.argmax_t,
                 static_cast<double>(r.grid_points)});
      }
    }
    res.tables = {{"smallness", tab}};
    res.codes = {{"variant", {{"0", "heat_sup"}, {"1", "critical"}, {"2", "besov"}}}};
    res.summary = {{"book", to_json(book)}};
    if (cal.cal) res.summary["calibration"] = to_json(*cal.cal);
    res.provenance["calibration_hash"] = cal.hash;
    return res;
  };
}

struct SolverInputs {
  SolveOptions opts;
  double fraction = 0.0;
  SmallnessVariant variant = SmallnessVariant::heat_sup;
};

SolverInputs parse_solver(const Context& ctx, const CalibrationUse& use) {
  SolverInputs in;
  in.opts.tol = num(ctx.doc, "solver.tol");
  in.opts.max_iter = integer(ctx.doc, "solver.max_iter");
  in.opts.override_smallness = flag(ctx.doc, "solver.override_smallness");
  in.opts.start_from_zero = flag(ctx.doc, "solver.start_from_zero");
  in.fraction = num(ctx.doc, "solver.smallness_fraction");
  in.variant = smallness_variant_from_string(text(ctx.doc, "solver.variant"));
  require(in.opts.tol > 0.0, "solver.tol", "must be positive");
  require(in.opts.max_iter >= 1, "solver.max_iter", "must be positive");
  require(in.fraction >= 0.0, "solver.smallness_fraction", "must be non-negative");
  require(in.fraction == 0.0 || use.mode != "none", "solver.smallness_fraction",
          "needs a calibration (calibration.mode auto or file)");
  require(in.variant != SmallnessVariant::critical || ctx.book.critical(), "solver.variant",
          "critical variant needs s = d/p - 1");
  require(ctx.book.k_target_admissible(), "book", "the solver needs q_tilde > q >= d");
  require_window(ctx.lattice, ctx.mesh.horizon, "mesh.horizon");
  require_quadrature(ctx.book, ctx.mesh.quad_nodes, "mesh.quad_nodes");
  if (ctx.datum.kind == DatumSpec::Kind::random_band) require_dealiased(ctx.lattice, ctx.datum.k_max, "datum.k_max");
  return in;
}

struct SolveSetup {
  ExponentBook book;
  Field u0;
  ResolvedCalibration cal;
};

SolveSetup setup_solve(const Context& ctx, const CalibrationUse& use, const SolverInputs& in) {
  SolveSetup s{ctx.book, realize_datum(ctx.lattice, ctx.datum), resolve(ctx, use)};
  if (s.cal.cal) s.book = apply_calibration(s.book, *s.cal.cal);
  if (in.fraction > 0.0) s.u0 = scale_to_fraction(s.u0, ctx.mesh.horizon, s.book, in.variant, in.fraction);
  return s;
}

Runner prep_solve(const Context& ctx) {
  const auto use = parse_calibration(ctx);
  const auto in = parse_solver(ctx, use);
  const bool snapshots = flag(ctx.doc, "params.write_snapshots");
  return [&ctx, use, in, snapshots] {
    auto res = start(ctx);
    const auto setup = setup_solve(ctx, use, in);
    const auto sol = std::make_shared<MildSolution>(solve_mild(setup.u0, setup.book, ctx.mesh, in.opts));
    const bool oracle = ctx.datum.kind == DatumSpec::Kind::taylor_green && ctx.lattice.dim() == 2;
    const auto kato = kato_norm(sol->trajectory, setup.book.q, setup.book.q_tilde);
    io::Table nodes{{"t", "kato_weighted", "l2", "divergence_rel", "oracle_rel_err"}, {}};
    double worst = 0.0, div = 0.0;
    for (std::size_t j = 0; j < sol->trajectory.size(); ++j) {
      const Field& u = sol->trajectory.fields[j];
      const double t = sol->trajectory.times[j];
      double err = nan;
      if (oracle) {
        // the Taylor-Green nonlinearity is a pure gradient, so u(t) = e^{t Delta} u0
        const Field exact = heat_flow(setup.u0, t);
        err = lebesgue_norm(u - exact, 2.0) / lebesgue_norm(exact, 2.0);
        worst = std::max(worst, err);
      }
      const double m = max_abs(u);
      const double dv = m > 0.0 ? max_abs(divergence(u)) / m : 0.0;
      div = std::max(div, dv);
      nodes.add({t, kato.per_node[j], lebesgue_norm(u, 2.0), dv, err});
    }
    res.tables = {{"nodes", nodes}, {"trace", trace_table(sol->trace)}};
    res.summary = {{"trace", trace_summary(sol->trace)},
                   {"integral_residual", integral_residual(*sol)},
                   {"kato_norm", kato.value},
                   {"max_divergence_rel", div},
                   {"smallness", to_json(sol->smallness)},
                   {"override_used", sol->override_used},
                   {"eta", sol->eta},
                   {"book", to_json(setup.book)}};
    if (oracle) res.summary["max_oracle_rel_err"] = worst;
    res.provenance["calibration_hash"] = setup.cal.hash;
    if (snapshots) res.extra = [sol](const std::filesystem::path& dir) { write_solution(dir / "solution", *sol); };
    return res;
  };
}

// A small-datum solve on the configured mesh and on the doubled mesh.
struct MeshPair {
  SolveSetup setup;
  MildSolution coarse, fine;
};

MeshPair solve_pair(const Context& ctx, const CalibrationUse& use, const SolverInputs& in) {
  auto setup = setup_solve(ctx, use, in);
  MeshSpec fine_mesh = ctx.mesh;
  fine_mesh.nodes *= 2;
  fine_mesh.quad_nodes *= 2;
  auto coarse = solve_mild(setup.u0, setup.book, ctx.mesh, in.opts);
  auto fine = solve_mild(setup.u0, setup.book, fine_mesh, in.opts);
  return {std::move(setup), std::move(coarse), std::move(fine)};
}

Runner prep_ladder(const Context& ctx) {
  const auto use = parse_calibration(ctx);
  const auto in = parse_solver(ctx, use);
  const auto r_list = nums(ctx.doc, "params.r_list");
  for (double r : r_list)
    require(r > std::max(ctx.book.p, ctx.book.q), "params.r_list", "rungs need r > max(p, q)");
  return [&ctx, use, in, r_list] {
    auto res = start(ctx);
    const auto pair = solve_pair(ctx, use, in);
    const auto a = regularity_ladder(pair.coarse, r_list);
    const auto b = regularity_ladder(pair.fine, r_list);
    io::Table tab{{"r", "weight", "value", "value_fine", "rel_change", "early_max", "bounded"}, {}};
    double worst = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double c = rel(a[i].value, b[i].value);
      worst = std::max(worst, c);
      finite = finite && std::isfinite(a[i].value) && std::isfinite(b[i].value);
      tab.add({a[i].r, a[i].weight, a[i].value, b[i].value, c, a[i].early_max, a[i].bounded ? 1.0 : 0.0});
    }
    res.tables = {{"ladder", tab}};
    res.summary = {{"max_rel_change", worst},
                   {"finite", finite},
                   {"trace", trace_summary(pair.coarse.trace)},
                   {"trace_fine", trace_summary(pair.fine.trace)}};
    res.provenance["calibration_hash"] = pair.setup.cal.hash;
    return res;
  };
}

Runner prep_fluctuation(const Context& ctx) {
  const auto use = parse_calibration(ctx);
  const auto in = parse_solver(ctx, use);
  const auto p_list = nums(ctx.doc, "params.p_tilde_list");
  require(ctx.book.critical(), "book", "fluctuation analysis needs s = d/p - 1");
  for (double p : p_list)
    require(p > std::max(ctx.book.p, static_cast<double>(ctx.book.d)) / 2.0, "params.p_tilde_list",
            "need p_tilde > max(p, d)/2");
  return [&ctx, use, in, p_list] {
    auto res = start(ctx);
    const auto pair = solve_pair(ctx, use, in);
    const auto a = fluctuation_analysis(pair.coarse, pair.setup.u0, p_list);
    const auto b = fluctuation_analysis(pair.fine, pair.setup.u0, p_list);
    io::Table tab{{"p_tilde", "s", "value", "value_fine", "rel_change", "argmax_t"}, {}};
    double worst = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double c = rel(a[i].value, b[i].value);
      worst = std::max(worst, c);
      finite = finite && std::isfinite(a[i].value) && std::isfinite(b[i].value);
      tab.add({a[i].p_tilde, a[i].s, a[i].value, b[i].value, c, a[i].argmax_t});
    }
    res.tables = {{"fluctuation", tab}};
    res.summary = {{"max_rel_change", worst},
                   {"finite", finite},
                   {"trace", trace_summary(pair.coarse.trace)},
                   {"trace_fine", trace_summary(pair.fine.trace)}};
    res.provenance["calibration_hash"] = pair.setup.cal.hash;
    return res;
  };
}

Runner prep_scaling(const Context& ctx) {
  const auto lambdas = nums(ctx.doc, "params.lambdas");
  for (double l : lambdas)
    require(l >= 1.0 && l == std::floor(l), "params.lambdas", "dilations must be positive integers");
  require_window(ctx.lattice, ctx.mesh.horizon, "mesh.horizon");
  return [&ctx, lambdas] {
    auto res = start(ctx);
    const Field u0 = realize_datum(ctx.lattice, ctx.datum);
    const double T = ctx.mesh.horizon;
    io::Table tab{{"lambda", "variant", "horizon", "lhs", "rel_diff"}, {}};
    double worst = 0.0;
    std::vector<SmallnessVariant> variants{SmallnessVariant::heat_sup};
    if (ctx.book.critical()) variants.push_back(SmallnessVariant::critical);
    for (auto v : variants) {
      const double base = smallness_lhs(u0, T, ctx.book, v).lhs;
      tab.add({1.0, static_cast<double>(v), T, base, 0.0});
      for (double l : lambdas) {
        const Field u = dilate(u0, static_cast<int>(l));
        const double lhs = smallness_lhs(u, T / (l * l), ctx.book, v).lhs;
        const double e = rel(lhs, base);
        if (v == SmallnessVariant::critical) worst = std::max(worst, e);
        tab.add({l, static_cast<double>(v), T / (l * l), lhs, e});
      }
    }
    res.tables = {{"scaling", tab}};
    res.codes = {{"variant", {{"0", "heat_sup"}, {"1", "critical"}}}};
    res.summary = {{"critical", ctx.book.critical()},
                   {"max_critical_rel_diff", ctx.book.critical() ? json(worst) : json(nullptr)}};
    return res;
  };
}

Runner prep_powerlaw(const Context& ctx) {
  const json& levels = at_path(ctx.doc, "params.levels");
  require(levels.is_array() && levels.size() >= 3, "params.levels", "need at least three [inner, outer] pairs");
  std::vector<std::pair<double, double>> cut;
  for (const auto& l : levels) {
    require(l.is_array() && l.size() == 2 && l[0].is_number() && l[1].is_number(), "params.levels",
            "each level is [inner, outer]");
    cut.emplace_back(l[0].get<double>(), l[1].get<double>());
  }
  double a = num(ctx.doc, "params.exponent");
  if (a <= 0.0) a = ctx.book.d / ctx.book.p;
  const double t0 = num(ctx.doc, "params.t_min");
  const int per = integer(ctx.doc, "params.per_octave");
  require(t0 > 0.0 && t0 < window(ctx.lattice), "params.t_min", "must lie in (0, L^2/16)");
  require(per >= 1, "params.per_octave", "must be positive");
  for (const auto& [e, r] : cut)
    checked("params.levels", [&] {
      validate(DatumSpec::power_law(a, e, r), ctx.lattice);
      return 0;
    });
  return [&ctx, cut, a, t0, per] {
    auto res = start(ctx);
    const auto grid = dyadic_time_grid(t0, window(ctx.lattice), per);
    io::Table tab{{"inner", "outer", "lp_norm", "besov", "lp_increment", "besov_rel_change"}, {}};
    std::vector<double> lp, bs;
    for (const auto& [e, r] : cut) {
      const Field u = realize_datum(ctx.lattice, DatumSpec::power_law(a, e, r));
      lp.push_back(lebesgue_norm(u, ctx.book.p));
      bs.push_back(besov_norm_heat(u, -ctx.book.alpha, ctx.book.q_tilde, grid).value);
      const std::size_t i = lp.size() - 1;
      tab.add({e, r, lp[i], bs[i], i ? lp[i] - lp[i - 1] : nan, i ? rel(bs[i], bs[i - 1]) : nan});
    }
    bool monotone = true;
    for (std::size_t i = 1; i < lp.size(); ++i) monotone = monotone && lp[i] > lp[i - 1];
    const std::size_t n = lp.size();
    const double last = lp[n - 1] - lp[n - 2], prev = lp[n - 2] - lp[n - 3];
    res.tables = {{"powerlaw", tab}};
    res.summary = {{"exponent", a},
                   {"lp_monotone", monotone},
                   {"increment_ratio", last / prev},
                   {"besov_last_rel_change", rel(bs[n - 1], bs[n - 2])}};
    return res;
  };
}

Runner prep_fixed_point_demo(const Context& ctx) {
  const double eta = num(ctx.doc, "params.eta");
  const auto ys = nums(ctx.doc, "params.y_list");
  FixedPointOptions opt;
  opt.eta = eta;
  opt.tol = num(ctx.doc, "params.tol");
  opt.max_iter = integer(ctx.doc, "params.max_iter");
  require(eta > 0.0, "params.eta", "must be positive");
  require(opt.tol > 0.0, "params.tol", "must be positive");
  require(opt.max_iter >= 1, "params.max_iter", "must be positive");
  return [&ctx, eta, ys, opt] {
    auto res = start(ctx);
    // the ball radius solves eta r^2 - r + |y| = 0, real only when 1 - 4 eta |y| >= 0
    io::Table tab{{"y", "eta", "ball_discriminant", "status", "iterations", "solution", "exact", "abs_err",
                   "residual"},
                  {}};
    json runs = json::array();
    for (double y : ys) {
      const double disc = 1.0 + 4.0 * eta * y;
      const double exact = disc >= 0.0 ? (std::sqrt(disc) - 1.0) / (2.0 * eta) : nan;
      const double ball = 1.0 - 4.0 * eta * std::abs(y);
      try {
        const auto r = scalar_fixed_point(y, eta, opt);
        tab.add({y, eta, ball, 1.0, static_cast<double>(r.trace.iteration_count), r.solution, exact,
                 std::abs(r.solution - exact), r.trace.residual});
        runs.push_back({{"y", y}, {"trace", to_json(r.trace)}});
      } catch (const DivergenceError& e) {
        tab.add({y, eta, ball, -1.0, static_cast<double>(e.trace().iteration_count), nan, exact, nan, nan});
        runs.push_back({{"y", y}, {"error", e.what()}, {"trace", to_json(e.trace())}});
      } catch (const NonConvergenceError& e) {
        tab.add({y, eta, ball, -2.0, static_cast<double>(e.trace().iteration_count), nan, exact, nan, nan});
        runs.push_back({{"y", y}, {"error", e.what()}, {"trace", to_json(e.trace())}});
      }
    }
    res.tables = {{"demo", tab}};
    res.codes = {{"status", {{"1", "converged"}, {"-1", "divergence"}, {"-2", "not converged"}}}};
    res.summary = {{"runs", runs}};
    return res;
  };
}

// ---------------------------------------------------------------------------
// registry

struct Entry {
  const char* id;
  const char* description;
  const char* checks;
  json defaults;  // patch over the common defaults
  Runner (*prepare)(const Context&);
};

json base_defaults() {
  return {
      {"experiment", ""},
      {"seed", 1},
      {"out", ""},
      {"lattice", {{"d", 2}, {"n", 32}, {"box_len", 2.0 * std::numbers::pi}}},
      {"book", {{"p", 2.0}, {"s", 0.0}, {"q_tilde", 4.0}}},
      {"datum",
       {{"kind", "random_band"},
        {"amplitude", 1.0},
        {"width", 0.1},
        {"mode", {1, 1, 0}},
        {"exponent", 1.0},
        {"inner", 0.5},
        {"outer", 1.0},
        {"k_min", 1.0},
        {"k_max", 8.0},
        {"divergence_free", true}}},
      {"mesh", {{"horizon", 1.0}, {"nodes", 16}, {"quad_nodes", 16}}},
      {"solver",
       {{"tol", 1e-9},
        {"max_iter", 100},
        {"override_smallness", false},
        {"start_from_zero", false},
        {"smallness_fraction", 0.0},
        {"variant", "heat_sup"}}},
      {"calibration",
       {{"mode", "none"},
        {"file", ""},
        {"pairs", 20},
        {"seed", 1},
        {"k_min", 1.0},
        {"k_max", 8.0},
        {"mesh_nodes", 16},
        {"quad_nodes", 16}}},
      {"params", json::object()},
  };
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<Entry> e;
    e.push_back({"kernel-decay", "pointwise decay of the kernel of Lambda^s e^{t Delta} P div",
                 "|K(x)| (1+|x|)^{d+1+s} bounded, tail slope -(d+1+s), self-similarity in t",
                 {{"lattice", {{"n", 2048}, {"box_len", 512.0}}},
                  {"params",
                   {{"s_list", {-0.5, 0.0, 0.4}},
                    {"r_min", 0.1},
                    {"r_max", 20.0},
                    {"radii", 32},
                    {"tail_start", 5.0},
                    {"t_list", {0.5, 2.0}}}}},
                 prep_kernel_decay});
    e.push_back({"beta-integral", "singular time convolution against its Gamma-function closed form",
                 "graded product quadrature matches Gamma(1-g)Gamma(1-h)/Gamma(2-g-h) t^{1-g-h}",
                 {{"params",
                   {{"gamma_min", -1.0},
                    {"gamma_max", 0.9},
                    {"theta_min", -1.0},
                    {"theta_max", 0.9},
                    {"count", 10},
                    {"t", 1.0},
                    {"nodes", 64}}}},
                 prep_beta_integral});
    e.push_back({"heat-decay", "L^q to L^q_tilde decay of the heat flow of a Gaussian",
                 "closed-form Gaussian norms and the -(d/2)(1/q - 1/q_tilde) decay rate",
                 {{"lattice", {{"n", 512}, {"box_len", 80.0}}},
                  {"datum", {{"kind", "gaussian"}, {"width", 0.1}, {"divergence_free", false}}},
                  {"params",
                   {{"q", 1.0},
                    {"q_tilde", 4.0},
                    {"t_min", 0.25},
                    {"t_max", 64.0},
                    {"per_octave", 4},
                    {"fit_min", 4.0},
                    {"fit_max", 64.0}}}},
                 prep_heat_decay});
    e.push_back({"besov-equiv", "heat characterization of the negative-order Besov norm",
                 "single-mode closed form on the dyadic grid, argmax invariant under amplitude scaling",
                 {{"datum", {{"kind", "single_mode"}, {"mode", {1, 1, 0}}, {"divergence_free", false}}},
                  {"params",
                   {{"s", -0.5}, {"q", 4.0}, {"t_min", std::ldexp(1.0, -10)}, {"t_max", 2.0},
                    {"per_octave", 4}, {"rescale", 3.0}}}},
                 prep_besov_equiv});
    e.push_back({"embedding", "homogeneous Sobolev embedding on a random band corpus",
                 "||f||_{H^{s2}_{q2}} / ||f||_{H^{s1}_{q1}} bounded and stable across the corpus",
                 {{"params",
                   {{"corpus", 50}, {"s1", 1.0}, {"q1", 2.0}, {"s2", 0.5}, {"q2", 4.0},
                    {"k_min", 1.0}, {"k_max", 8.0}}}},
                 prep_embedding});
    e.push_back({"bilinear", "bilinear Duhamel estimate ratios on a seeded corpus",
                 "ratio finite, stable in T and under time mesh doubling",
                 {{"params",
                   {{"target", "k_space"},
                    {"pairs", 50},
                    {"k_min", 1.0},
                    {"k_max", 8.0},
                    {"mesh_nodes", 16},
                    {"quad_nodes", 16},
                    {"horizons", {0.5, 1.0}},
                    {"q1", 0.0},
                    {"q2", 0.0}}}},
                 prep_bilinear});
    e.push_back({"smallness", "smallness conditions of the existence theory for a datum",
                 "heat_sup, critical and besov left-hand sides against calibrated thresholds",
                 {{"calibration", {{"mode", "auto"}}}, {"params", {{"scales", {0.01, 0.1, 1.0}}}}},
                 prep_smallness});
    e.push_back({"solve", "mild solution by Picard iteration in the Kato space",
                 "convergence trace, node errors against Taylor-Green, divergence",
                 {{"lattice", {{"n", 64}, {"box_len", two_pi}}},
                  {"datum", {{"kind", "taylor_green"}}},
                  {"mesh", {{"nodes", 32}, {"quad_nodes", 32}}},
                  {"solver", {{"override_smallness", true}}},
                  {"params", {{"write_snapshots", false}}}},
                 prep_solve});
    e.push_back({"ladder", "higher integrability of a small-data solution",
                 "sup t^{(d/2)(1/q-1/r)} ||u||_{L^r} finite and stable under mesh doubling",
                 {{"calibration", {{"mode", "auto"}}},
                  {"solver", {{"smallness_fraction", 0.5}}},
                  {"params", {{"r_list", {4.0, 8.0, 16.0}}}}},
                 prep_ladder});
    e.push_back({"fluctuation", "regularity of u - e^{t Delta} u0 for a small-data solution",
                 "sup ||u - e^{t Delta} u0||_{H^{d/p~-1}_{p~}} finite and stable under mesh doubling",
                 {{"calibration", {{"mode", "auto"}}},
                  {"solver", {{"smallness_fraction", 0.5}}},
                  {"params", {{"p_tilde_list", {1.5, 2.0, 4.0}}}}},
                 prep_fluctuation});
    e.push_back({"scaling", "smallness left-hand sides under u0 -> lambda u0(lambda x), T -> T/lambda^2",
                 "critical variant invariant under dyadic dilation",
                 {{"params", {{"lambdas", {2.0, 4.0}}}}},
                 prep_scaling});
    e.push_back({"powerlaw", "truncated |x|^{-d/p} under widening cutoffs",
                 "L^p norm grows without plateau while the Besov norm settles",
                 {{"lattice", {{"n", 1024}, {"box_len", 64.0}}},
                  {"datum", {{"kind", "power_law"}, {"divergence_free", false}}},
                  {"params",
                   {{"levels", {{1.0, 4.0}, {0.5, 8.0}, {0.25, 16.0}, {0.125, 32.0}}},
                    {"exponent", 0.0},
                    {"t_min", std::ldexp(1.0, -12)},
                    {"per_octave", 4}}}},
                 prep_powerlaw});
    e.push_back({"fixed-point-demo", "quadratic fixed point x = y - eta x^2 on the real line",
                 "convergence to the small root inside the ball, divergence outside",
                 {{"params", {{"eta", 1.0}, {"y_list", {0.25, 0.0, 1.0}}, {"tol", 1e-14}, {"max_iter", 50}}}},
                 prep_fixed_point_demo});
    return e;
  }();
  return entries;
}

const Entry& find_entry(const std::string& id) {
  for (const auto& e : registry())
    if (id == e.id) return e;
  std::string valid;
  for (const auto& e : registry()) valid += std::string(valid.empty() ? "" : ", ") + e.id;
  throw ConfigError("experiment: unknown id '" + id + "'; valid ids: " + valid);
}

json canonical(const ExperimentConfig& config) {
  json doc = config.doc;
  doc.erase("out");  // where results go does not change them
  return doc;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<ExperimentInfo> list_experiments() {
  std::vector<ExperimentInfo> out;
  for (const auto& e : registry()) out.push_back({e.id, e.description, e.checks});
  return out;
}

json default_config(const std::string& id) {
  const Entry& e = find_entry(id);
  json doc = base_defaults();
  doc["experiment"] = id;
  doc.merge_patch(e.defaults);
  return doc;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set: expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  const auto parts = split_path(key);
  json* node = &doc;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i])) throw ConfigError(key + ": unknown key");
    node = &(*node)[parts[i]];
  }
  if (node->is_object()) throw ConfigError(key + ": cannot replace a section");
  *node = std::move(value);
}

ExperimentConfig make_config(const std::string& id, const json& user,
                             const std::vector<std::string>& overrides) {
  json doc = default_config(id);
  if (user.is_object() && user.contains("experiment") && user["experiment"] != id)
    throw ConfigError("experiment: config is for '" + user["experiment"].dump() + "', not '" + id + "'");
  strict_merge(doc, user, "");
  doc["experiment"] = id;
  for (const auto& o : overrides) apply_override(doc, o);
  ExperimentConfig cfg;
  cfg.id = id;
  cfg.doc = std::move(doc);
  cfg.out = text(cfg.doc, "out");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& id,
                             const std::vector<std::string>& overrides) {
  const json user = io::read_json(path);
  if (!user.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
  std::string resolved = id;
  if (resolved.empty()) {
    if (!user.contains("experiment") || !user["experiment"].is_string())
      throw ConfigError("experiment: missing from " + path.string());
    resolved = user["experiment"].get<std::string>();
  }
  return make_config(resolved, user, overrides);
}

void validate(const ExperimentConfig& config) {
  const Entry& e = find_entry(config.id);
  const Context ctx = make_context(config);
  e.prepare(ctx);
}

const io::Table& ExperimentResult::table(const std::string& name) const {
  for (const auto& [n, t] : tables)
    if (n == name) return t;
  throw ConfigError("result has no table '" + name + "'");
}

std::string config_hash(const ExperimentConfig& config) { return io::fnv1a_hex(canonical(config).dump()); }

ExperimentResult run(const ExperimentConfig& config) {
  const Entry& e = find_entry(config.id);
  const Context ctx = make_context(config);
  const Runner runner = e.prepare(ctx);
  ExperimentResult res;
  try {
    res = runner();
  } catch (const DivergenceError& err) {
    throw ExperimentError(ErrorKind::numerical, std::string("experiment ") + e.id + ": " + err.what(),
                          to_json(err.trace()));
  } catch (const NonConvergenceError& err) {
    throw ExperimentError(ErrorKind::numerical, std::string("experiment ") + e.id + ": " + err.what(),
                          to_json(err.trace()));
  } catch (const ExperimentError&) {
    throw;
  } catch (const Error& err) {
    throw ExperimentError(err.kind(), std::string("experiment ") + e.id + ": " + err.what(), nullptr);
  }
  res.provenance["config_hash"] = config_hash(config);
  if (!res.provenance.contains("calibration_hash")) res.provenance["calibration_hash"] = "none";
  res.provenance["version"] = version;
  res.provenance["experiment"] = config.id;
  return res;
}

void write_result(const std::filesystem::path& dir, const ExperimentResult& result) {
  if (dir.empty()) throw ConfigError("out: output directory not set");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  json tables = json::array();
  for (const auto& [name, table] : result.tables) {
    const std::string file = name + ".csv";
    io::write_csv(dir / file, table);
    tables.push_back({{"name", name}, {"file", file}, {"columns", table.columns}, {"rows", table.rows.size()}});
  }
  json manifest = {{"experiment", result.id},
                   {"provenance", result.provenance},
                   {"config", result.config},
                   {"tables", tables},
                   {"codes", result.codes},
                   {"summary", result.summary}};
  io::write_json(dir / "manifest.json", manifest);
  if (result.extra) result.extra(dir);
}

ExperimentResult run_and_write(const ExperimentConfig& config) {
  if (config.out.empty()) throw ConfigError("out: output directory not set");
  auto res = run(config);
  write_result(config.out, res);
  return res;
}

Calibration calibrate(const ExperimentConfig& config) {
  const Context ctx = make_context(config);
  CalibrationUse use = parse_calibration(ctx);
  require(ctx.book.k_target_admissible(), "book", "calibration needs q_tilde > q >= d");
  require_quadrature(ctx.book, use.spec.quad_nodes, "calibration.quad_nodes");
  return calibrate_thresholds(ctx.lattice, ctx.book, use.spec);
}

}  // namespace mildns::lab
