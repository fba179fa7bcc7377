#include "mildns/picard.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "mildns/datum.hpp"
#include "mildns/io.hpp"
#include "mildns/kernels.hpp"
#include "mildns/random.hpp"

namespace mildns {

namespace {

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

double PicardTrace::max_ratio() const {
  double m = 0.0;
  for (const auto& r : iterations)
    if (std::isfinite(r.ratio)) m = std::max(m, r.ratio);
  return m;
}

nlohmann::json to_json(const PicardTrace& t) {
  nlohmann::json its = nlohmann::json::array();
  for (const auto& r : t.iterations)
    its.push_back({{"iteration", r.iteration},
                   {"norm", finite_or_null(r.norm)},
                   {"aux_norm", finite_or_null(r.aux_norm)},
                   {"difference", finite_or_null(r.difference)},
                   {"ratio", finite_or_null(r.ratio)}});
  return {{"iterations", its},
          {"residual", finite_or_null(t.residual)},
          {"iteration_count", t.iteration_count},
          {"converged", t.converged},
          {"stop_reason", t.stop_reason}};
}

FixedPointResult<double> scalar_fixed_point(double y, double eta, const FixedPointOptions& opt) {
  FixedPointOptions o = opt;
  if (!(o.eta > 0.0)) o.eta = eta;
  return abstract_fixed_point<double>(
      y, [eta](double a, double b) { return eta * a * b; }, [](double a) { return std::abs(a); },
      [](double a, double b) { return a - b; },
      [](double) { return std::numeric_limits<double>::quiet_NaN(); }, o);
}

// ---------------------------------------------------------------------------
// smallness

const char* to_string(SmallnessVariant v) noexcept {
  switch (v) {
    case SmallnessVariant::heat_sup: return "heat_sup";
    case SmallnessVariant::critical: return "critical";
    case SmallnessVariant::besov: return "besov";
  }
  return "?";
}

SmallnessVariant smallness_variant_from_string(const std::string& name) {
  for (auto v : {SmallnessVariant::heat_sup, SmallnessVariant::critical, SmallnessVariant::besov})
    if (name == to_string(v)) return v;
  throw ConfigError("smallness.variant: unknown variant '" + name +
                    "' (heat_sup, critical, besov)");
}

nlohmann::json to_json(const SmallnessReport& r) {
  return {{"variant", to_string(r.variant)}, {"lhs", r.lhs},
          {"threshold", r.threshold},        {"satisfied", r.satisfied},
          {"argmax_t", r.argmax_t},          {"grid_points", r.grid_points}};
}

std::vector<double> smallness_grid(double horizon, int octaves) {
  if (octaves < 1) throw ConfigError("smallness.octaves: must be positive");
  return dyadic_time_grid(horizon * std::exp2(-octaves), horizon);
}

SmallnessReport smallness_lhs(const Field& u0, double horizon, const ExponentBook& book,
                              SmallnessVariant variant, int octaves) {
  const Lattice& lat = u0.lattice();
  if (u0.kind() != FieldKind::vector) throw ShapeError("smallness: vector datum required");
  if (lat.dim() != book.d) throw ConfigError("smallness: lattice and exponent dimensions differ");
  if (!(horizon > 0.0)) throw ConfigError("smallness: horizon must be positive");
  if (!lat.in_window(horizon))
    throw WindowError("smallness: T exceeds the validity window L^2/16");
  SmallnessReport rep;
  rep.variant = variant;
  const double prefactor = std::pow(horizon, book.horizon_exponent());
  if (variant == SmallnessVariant::besov) {
    const auto grid = dyadic_time_grid(horizon * std::exp2(-octaves), lat.max_valid_time());
    const auto b = besov_norm_heat(u0, -book.alpha, book.q_tilde, grid);
    rep.lhs = prefactor * b.value;
    rep.argmax_t = b.argmax_t.value_or(0.0);
    rep.grid_points = grid.size();
    rep.threshold = book.sigma;
  } else {
    const auto grid = smallness_grid(horizon, octaves);
    const bool crit = variant == SmallnessVariant::critical;
    const double weight = crit ? 0.5 * (1.0 - book.d / book.q_tilde) : 0.5 * book.alpha;
    const Field spec = as_spectral(u0);
    double best = 0.0;
    for (double t : grid) {
      Field g = spec;
      kernels::omp::scale_by_heat(g.all_coeffs(), lat.wavenumber_sq(), t);
      const double v = std::pow(t, weight) * lebesgue_norm(to_physical(g), book.q_tilde);
      if (v > best) {
        best = v;
        rep.argmax_t = t;
      }
    }
    rep.lhs = crit ? best : prefactor * best;
    rep.grid_points = grid.size();
    rep.threshold = book.delta;
  }
  rep.satisfied = rep.lhs <= rep.threshold;
  return rep;
}

// ---------------------------------------------------------------------------
// solver

namespace {

void check_datum(const Field& u0, const ExponentBook& book) {
  if (u0.kind() != FieldKind::vector) throw ShapeError("solve: vector datum required");
  if (u0.lattice().dim() != book.d) throw ConfigError("solve: lattice and exponent dimensions differ");
  const double scale = max_abs(u0);
  if (scale == 0.0) return;
  const double k_nyquist = std::numbers::pi * u0.lattice().n() / u0.lattice().box_len();
  if (max_abs(divergence(u0)) > 1e-10 * scale * std::max(1.0, k_nyquist))
    throw DataError("solve: datum is not divergence free");
  const Field s = as_spectral(u0);
  for (int c = 0; c < s.components(); ++c)
    if (std::abs(s.coeffs(c)[0]) > 1e-12 * scale) throw DataError("solve: datum has a nonzero mean");
}

}  // namespace

MildSolution solve_mild(const Field& u0, const ExponentBook& book, const MeshSpec& mesh,
                        const SolveOptions& opts) {
  check_datum(u0, book);
  const Lattice& lat = u0.lattice();
  MildSolution sol{Trajectory{lat, {}, {}, std::nullopt}, Trajectory{lat, {}, {}, std::nullopt},
                   book, mesh, {}, {}, false, 0.0};
  sol.smallness = smallness_lhs(u0, mesh.horizon, book, SmallnessVariant::heat_sup);
  if (!sol.smallness.satisfied) {
    if (!opts.override_smallness)
      throw DomainError("solve: smallness condition fails (lhs " + io::format_double(sol.smallness.lhs) +
                        " > threshold " + io::format_double(sol.smallness.threshold) +
                        "); set override to run anyway");
    sol.override_used = true;
  }
  const QuadratureSpec quad = QuadratureSpec::for_book(book, mesh.quad_nodes);
  validate(quad);
  sol.eta = opts.eta > 0.0 ? opts.eta
            : book.calibrated()
                ? std::pow(mesh.horizon, book.horizon_exponent()) / (4.0 * book.delta)
                : 0.0;
  sol.heat = heat_trajectory(u0, quadratic_mesh(mesh.horizon, mesh.nodes));

  FixedPointOptions fp;
  fp.eta = sol.eta;
  fp.tol = opts.tol;
  fp.max_iter = opts.max_iter;
  auto bilinear = [&quad](const Trajectory& a, const Trajectory& b) { return bilinear_B(a, b, quad); };
  auto norm = [&book](const Trajectory& a) { return kato_norm(a, book.q, book.q_tilde).value; };
  auto sub = [](const Trajectory& a, const Trajectory& b) { return a - b; };
  auto aux = [&book](const Trajectory& a) { return n_norm(a, book.s, book.p).value; };
  std::optional<Trajectory> start;
  if (opts.start_from_zero) {
    start = zero_trajectory(lat, sol.heat.times);
  } else if (opts.start_perturbation) {
    if (!(opts.start_perturbation->lattice() == lat) || opts.start_perturbation->kind() != u0.kind())
      throw ShapeError("solve: start perturbation does not match the datum");
    start = heat_trajectory(u0 + *opts.start_perturbation, sol.heat.times);
  }
  auto result = abstract_fixed_point<Trajectory>(sol.heat, bilinear, norm, sub, aux, fp, start);
  sol.trajectory = std::move(result.solution);
  sol.trace = std::move(result.trace);
  return sol;
}

double integral_residual(const MildSolution& sol) {
  const QuadratureSpec quad = QuadratureSpec::for_book(sol.book, sol.mesh.quad_nodes);
  const Trajectory image = sol.heat - bilinear_B(sol.trajectory, sol.trajectory, quad);
  return kato_norm(sol.trajectory - image, sol.book.q, sol.book.q_tilde).value;
}

std::vector<LadderRow> regularity_ladder(const MildSolution& sol, const std::vector<double>& r_list) {
  const double floor_r = std::max(sol.book.p, sol.book.q);
  std::vector<LadderRow> rows;
  for (double r : r_list) {
    if (!(r > floor_r))
      throw DomainError("ladder: need r > max(p, q) = " + io::format_double(floor_r));
    LadderRow row;
    row.r = r;
    row.weight = sol.book.ladder_weight(r);
    const auto rep = weighted_sup_norm(sol.trajectory, row.weight, r);
    row.value = rep.value;
    row.argmax_t = rep.argmax_t.value_or(0.0);
    const std::size_t early = std::min<std::size_t>(5, rep.per_node.size());
    row.early_max = *std::max_element(rep.per_node.begin(), rep.per_node.begin() + early);
    row.bounded = std::isfinite(row.value) && std::isfinite(row.early_max);
    rows.push_back(row);
  }
  return rows;
}

std::vector<FluctuationRow> fluctuation_analysis(const MildSolution& sol, const Field& u0,
                                                 const std::vector<double>& p_tilde_list) {
  if (!sol.book.critical()) throw DomainError("fluctuation: needs a critical book, s = d/p - 1");
  const double floor_p = 0.5 * std::max(sol.book.p, static_cast<double>(sol.book.d));
  const Trajectory heat = heat_trajectory(u0, sol.trajectory.times);
  const Trajectory w = sol.trajectory - heat;
  std::vector<FluctuationRow> rows;
  for (double pt : p_tilde_list) {
    if (!(pt > floor_p))
      throw DomainError("fluctuation: need p_tilde > max(p, d)/2 = " + io::format_double(floor_p));
    FluctuationRow row;
    row.p_tilde = pt;
    row.s = sol.book.d / pt - 1.0;
    const auto rep = n_norm(w, row.s, pt);
    row.value = rep.value;
    row.argmax_t = rep.argmax_t.value_or(0.0);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// calibration

Calibration calibrate_thresholds(const Lattice& lattice, const ExponentBook& book,
                                 const CalibrationSpec& spec) {
  if (spec.pairs < 20)
    throw ConfigError("calibration: corpus needs at least 20 pairs (got " +
                      std::to_string(spec.pairs) + ")");
  if (lattice.dim() != book.d) throw ConfigError("calibration: lattice and exponent dimensions differ");
  check_estimate_exponents(book, EstimateTarget::k_space, book.q_tilde, book.q_tilde);
  Calibration cal;
  cal.book_key = book.key();
  cal.seed = spec.seed;
  cal.pairs = spec.pairs;
  cal.horizon = spec.horizon;
  const auto mesh = quadratic_mesh(spec.horizon, spec.mesh_nodes);
  const QuadratureSpec quad = QuadratureSpec::for_book(book, spec.quad_nodes);
  for (int i = 0; i < spec.pairs; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    const Field u0 = realize_datum(
        lattice, DatumSpec::random_band(mix_seed(spec.seed, 2 * k), spec.k_min, spec.k_max).solenoidal());
    const Field v0 = realize_datum(
        lattice,
        DatumSpec::random_band(mix_seed(spec.seed, 2 * k + 1), spec.k_min, spec.k_max).solenoidal());
    const auto sample = bilinear_estimate(heat_trajectory(u0, mesh), heat_trajectory(v0, mesh), book,
                                          EstimateTarget::k_space, quad);
    cal.max_ratio = std::max(cal.max_ratio, sample.ratio);
    for (const Field* f : {&u0, &v0}) {
      const double a = smallness_lhs(*f, spec.horizon, book, SmallnessVariant::heat_sup).lhs;
      const double b = smallness_lhs(*f, spec.horizon, book, SmallnessVariant::besov).lhs;
      if (b > 0.0) cal.besov_constant = std::max(cal.besov_constant, a / b);
    }
  }
  if (!(cal.max_ratio > 0.0)) throw NumericalError("calibration: bilinear ratios vanish on the corpus");
  cal.c_hat = 2.0 * cal.max_ratio;
  cal.delta = 1.0 / (4.0 * cal.c_hat);
  cal.sigma = cal.besov_constant > 0.0 ? cal.delta / cal.besov_constant : 0.0;
  return cal;
}

ExponentBook apply_calibration(ExponentBook book, const Calibration& cal) {
  if (cal.book_key != book.key())
    throw ConfigError("calibration: file is for " + cal.book_key + ", not " + book.key());
  book.delta = cal.delta;
  book.sigma = cal.sigma;
  return book;
}

nlohmann::json to_json(const Calibration& c) {
  return {{"book_key", c.book_key}, {"C_hat", c.c_hat},   {"max_ratio", c.max_ratio},
          {"delta", c.delta},       {"besov_constant", c.besov_constant},
          {"sigma", c.sigma},       {"corpus_seed", c.seed}, {"pairs", c.pairs},
          {"horizon", c.horizon}};
}

Calibration calibration_from_json(const nlohmann::json& j) {
  try {
    Calibration c;
    c.book_key = j.at("book_key").get<std::string>();
    c.c_hat = j.at("C_hat").get<double>();
    c.max_ratio = j.value("max_ratio", c.c_hat / 2.0);
    c.delta = j.at("delta").get<double>();
    c.besov_constant = j.value("besov_constant", 0.0);
    c.sigma = j.value("sigma", 0.0);
    c.seed = j.value("corpus_seed", std::uint64_t{0});
    c.pairs = j.value("pairs", 0);
    c.horizon = j.value("horizon", 0.0);
    if (!(c.delta > 0.0) || !(c.c_hat > 0.0)) throw ConfigError("calibration: non-positive constants");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("calibration: ") + e.what());
  }
}

void save_calibration(const std::filesystem::path& path, const Calibration& cal) {
  io::write_json(path, to_json(cal));
}

Calibration load_calibration(const std::filesystem::path& path) {
  return calibration_from_json(io::read_json(path));
}

void write_solution(const std::filesystem::path& dir, const MildSolution& sol) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t j = 0; j < sol.trajectory.size(); ++j) {
    char name[32];
    std::snprintf(name, sizeof name, "node_%04zu.bin", j);
    io::write_field(dir / name, sol.trajectory.fields[j]);
    nodes.push_back({{"t", sol.trajectory.times[j]}, {"file", name}});
  }
  const nlohmann::json manifest = {
      {"book", to_json(sol.book)},
      {"mesh",
       {{"horizon", sol.mesh.horizon}, {"nodes", sol.mesh.nodes}, {"quad_nodes", sol.mesh.quad_nodes},
        {"rule", QuadratureSpec::rule}}},
      {"lattice",
       {{"d", sol.trajectory.lattice.dim()},
        {"n", sol.trajectory.lattice.n()},
        {"box_len", sol.trajectory.lattice.box_len()}}},
      {"trace", to_json(sol.trace)},
      {"smallness", to_json(sol.smallness)},
      {"override_used", sol.override_used},
      {"eta", sol.eta},
      {"snapshots", nodes}};
  io::write_json(dir / "manifest.json", manifest);
}

}  // namespace mildns
