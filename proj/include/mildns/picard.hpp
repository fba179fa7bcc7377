#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mildns/duhamel.hpp"
#include "mildns/error.hpp"
#include "mildns/norms.hpp"

namespace mildns {

struct IterationRecord {
  int iteration = 0;
  double norm = 0.0;        // ||x_n|| in the governing norm
  double aux_norm = std::numeric_limits<double>::quiet_NaN();  // e.g. N-norm of x_n
  double difference = 0.0;  // ||x_{n+1} - x_n||
  double ratio = std::numeric_limits<double>::quiet_NaN();     // difference_n / difference_{n-1}
};

struct PicardTrace {
  std::vector<IterationRecord> iterations;
  double residual = std::numeric_limits<double>::quiet_NaN();
  int iteration_count = 0;
  bool converged = false;
  std::string stop_reason;

  /// Largest recorded contraction ratio (NaN entries ignored); 0 when none recorded.
  double max_ratio() const;
};

nlohmann::json to_json(const PicardTrace& trace);

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, PicardTrace trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const PicardTrace& trace() const noexcept { return trace_; }

 private:
  PicardTrace trace_;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, PicardTrace trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const PicardTrace& trace() const noexcept { return trace_; }

 private:
  PicardTrace trace_;
};

struct FixedPointOptions {
  double eta = 0.0;          // bilinear constant; the guard fires at guard_factor / eta (off if 0)
  double tol = 1e-9;
  int max_iter = 100;
  double guard_factor = 10.0;
  int stagnation_window = 5;  // consecutive ratios >= 1 that count as divergence
};

template <class X>
struct FixedPointResult {
  X solution;
  PicardTrace trace;
};

/// Solves x = y - B(x, x) by x_{n+1} = y - B(x_n, x_n) from x_0 = start (default y).
///
/// Stops when ||x_{n+1} - x_n|| <= tol max(1, ||y||); that difference is exactly the
/// residual ||x_n - (y - B(x_n, x_n))|| of the returned x_n. Throws DivergenceError when
/// an iterate leaves the ball of radius guard_factor / eta, when the difference is not
/// finite, or when stagnation_window consecutive ratios are >= 1; NonConvergenceError
/// after max_iter iterations.
///
/// `sub(a, b)` returns a - b, `norm` the governing norm, `aux` any secondary norm to record.
template <class X, class Bilinear, class Norm, class Sub, class Aux>
FixedPointResult<X> abstract_fixed_point(const X& y, Bilinear&& bilinear, Norm&& norm, Sub&& sub,
                                         Aux&& aux, const FixedPointOptions& opt,
                                         const std::optional<X>& start = std::nullopt) {
  if (!(opt.tol > 0.0)) throw ConfigError("picard.tol: must be positive");
  if (opt.max_iter < 1) throw ConfigError("picard.max_iter: must be positive");
  PicardTrace trace;
  const double scale = std::max(1.0, static_cast<double>(norm(y)));
  const double guard = opt.eta > 0.0 ? opt.guard_factor / opt.eta
                                     : std::numeric_limits<double>::infinity();
  X x = start ? *start : y;
  double prev = std::numeric_limits<double>::quiet_NaN();
  int climbing = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.norm = norm(x);
    rec.aux_norm = aux(x);
    if (!(rec.norm <= guard)) {
      trace.iterations.push_back(rec);
      trace.iteration_count = it;
      trace.stop_reason = "norm guard";
      throw DivergenceError("fixed point: iterate norm " + std::to_string(rec.norm) +
                                " exceeds the guard " + std::to_string(guard),
                            trace);
    }
    X next = sub(y, bilinear(x, x));
    rec.difference = norm(sub(next, x));
    if (it > 0 && prev > 0.0) rec.ratio = rec.difference / prev;
    trace.iterations.push_back(rec);
    trace.iteration_count = it + 1;
    if (!std::isfinite(rec.difference)) {
      trace.stop_reason = "non-finite difference";
      throw DivergenceError("fixed point: non-finite iterate", trace);
    }
    if (rec.difference <= opt.tol * scale) {
      trace.residual = rec.difference;
      trace.converged = true;
      trace.stop_reason = "tolerance";
      return {std::move(x), std::move(trace)};
    }
    climbing = (rec.ratio >= 1.0) ? climbing + 1 : 0;
    if (climbing >= opt.stagnation_window) {
      trace.stop_reason = "no contraction";
      throw DivergenceError("fixed point: no contraction over " +
                                std::to_string(opt.stagnation_window) + " iterations",
                            trace);
    }
    prev = rec.difference;
    x = std::move(next);
  }
  trace.stop_reason = "max_iter";
  throw NonConvergenceError("fixed point: not converged after " + std::to_string(opt.max_iter) +
                                " iterations",
                            trace);
}

/// Scalar model x = y - eta x^2 (B(x, z) = eta x z on the real line).
FixedPointResult<double> scalar_fixed_point(double y, double eta, const FixedPointOptions& opt);

// ---------------------------------------------------------------------------
// smallness conditions

enum class SmallnessVariant {
  heat_sup,  // T^{(1+s-d/p)/2} sup_{t<T} t^{alpha/2} ||e^{t Delta} u0||_{L^q_tilde}
  critical,  // sup_{t<T} t^{(1-d/q_tilde)/2} ||e^{t Delta} u0||_{L^q_tilde}, no T prefactor
  besov,     // T^{(1+s-d/p)/2} ||u0||_{B^{-alpha}_{q_tilde, inf}} (heat characterization)
};

const char* to_string(SmallnessVariant v) noexcept;
SmallnessVariant smallness_variant_from_string(const std::string& name);

struct SmallnessReport {
  SmallnessVariant variant = SmallnessVariant::heat_sup;
  double lhs = 0.0;
  double threshold = 0.0;  // delta (sigma for besov); 0 when uncalibrated
  bool satisfied = false;
  double argmax_t = 0.0;
  std::size_t grid_points = 0;
};

nlohmann::json to_json(const SmallnessReport& r);

/// Dyadic times 2^{j/4} in [T 2^{-octaves}, T].
std::vector<double> smallness_grid(double horizon, int octaves = 24);

SmallnessReport smallness_lhs(const Field& u0, double horizon, const ExponentBook& book,
                              SmallnessVariant variant, int octaves = 24);

// ---------------------------------------------------------------------------
// mild solutions

struct MeshSpec {
  double horizon = 1.0;
  int nodes = 32;       // M_t
  int quad_nodes = 32;  // M
};

struct SolveOptions {
  double tol = 1e-9;
  int max_iter = 100;
  bool override_smallness = false;  // run even when the smallness condition fails
  bool start_from_zero = false;     // x_0 = 0 instead of the heat flow
  std::optional<Field> start_perturbation;  // x_0 = e^{t Delta}(u0 + perturbation)
  double eta = 0.0;                 // explicit bilinear constant; else from the calibrated book
};

struct MildSolution {
  Trajectory trajectory;
  Trajectory heat;  // e^{t Delta} u0 on the same mesh
  ExponentBook book;
  MeshSpec mesh;
  PicardTrace trace;
  SmallnessReport smallness;
  bool override_used = false;
  double eta = 0.0;
};

/// Picard iteration for u = e^{t Delta} u0 - B(u, u) in the Kato norm K^{q_tilde}_{q,T}.
/// u0 must be a divergence-free, mean-zero vector field. Without a calibrated book or
/// an explicit eta the divergence guard is disabled.
MildSolution solve_mild(const Field& u0, const ExponentBook& book, const MeshSpec& mesh,
                        const SolveOptions& opts = {});

/// K-norm residual ||u - (e^{t Delta} u0 - B(u, u))|| re-evaluated from scratch.
double integral_residual(const MildSolution& sol);

struct LadderRow {
  double r = 0.0;
  double weight = 0.0;  // (d/2)(1/q - 1/r)
  double value = 0.0;   // sup_j t_j^weight ||u(t_j)||_{L^r}
  double argmax_t = 0.0;
  double early_max = 0.0;  // max over the first five nodes
  bool bounded = false;
};

/// Rungs r > max(p, q); throws DomainError otherwise.
std::vector<LadderRow> regularity_ladder(const MildSolution& sol, const std::vector<double>& r_list);

struct FluctuationRow {
  double p_tilde = 0.0;
  double s = 0.0;  // d / p_tilde - 1
  double value = 0.0;
  double argmax_t = 0.0;
};

/// sup_j ||u(t_j) - e^{t_j Delta} u0||_{H^{d/p~ - 1}_{p~}} for p~ > max(p, d)/2; needs a
/// critical book.
std::vector<FluctuationRow> fluctuation_analysis(const MildSolution& sol, const Field& u0,
                                                 const std::vector<double>& p_tilde_list);

// ---------------------------------------------------------------------------
// calibration

struct CalibrationSpec {
  int pairs = 20;
  std::uint64_t seed = 1;
  double k_min = 1.0;
  double k_max = 8.0;
  double horizon = 1.0;
  int mesh_nodes = 16;
  int quad_nodes = 16;
};

struct Calibration {
  std::string book_key;
  double c_hat = 0.0;          // 2 x max measured K -> K bilinear ratio
  double max_ratio = 0.0;
  double delta = 0.0;          // 1 / (4 c_hat)
  double besov_constant = 0.0; // max over the corpus of heat_sup / besov
  double sigma = 0.0;          // delta / besov_constant
  std::uint64_t seed = 0;
  int pairs = 0;
  double horizon = 0.0;
};

/// Throws ConfigError for fewer than 20 pairs.
Calibration calibrate_thresholds(const Lattice& lattice, const ExponentBook& book,
                                 const CalibrationSpec& spec);

/// Copies delta and sigma into the book (keys must match).
ExponentBook apply_calibration(ExponentBook book, const Calibration& cal);

nlohmann::json to_json(const Calibration& cal);
Calibration calibration_from_json(const nlohmann::json& j);
void save_calibration(const std::filesystem::path& path, const Calibration& cal);
Calibration load_calibration(const std::filesystem::path& path);

/// manifest.json (book, mesh, trace, smallness) plus node_XXXX.bin snapshots.
void write_solution(const std::filesystem::path& dir, const MildSolution& sol);

}  // namespace mildns
