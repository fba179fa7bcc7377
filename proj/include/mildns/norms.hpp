#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mildns/lattice.hpp"

namespace mildns {

/// Exponents of the existence theory for a given (d, p, s, q_tilde).
struct ExponentBook {
  int d = 2;
  double p = 2.0;
  double s = 0.0;
  double q = 2.0;        // 1/q = 1/p - s/d
  double q_tilde = 4.0;
  double alpha = 0.5;    // d (1/q - 1/q_tilde)
  double gamma = 0.75;   // (t - tau) exponent of the K -> K Duhamel integrand
  double theta = 0.5;    // tau exponent, equal to alpha
  double young_h = 1.0;  // 1/h = 1 + 1/q_tilde - 1/q
  double young_r = 1.0;  // 1/r = 1 + 1/p - 2/q_tilde; below 1 when q_tilde > 2p
  double delta = 0.0;    // smallness threshold, 0 until calibrated
  double sigma = 0.0;    // Besov-form threshold, 0 until calibrated

  /// (1 + s - d/p) / 2, the power of T in the smallness conditions.
  double horizon_exponent() const noexcept { return 0.5 * (1.0 + s - d / p); }
  /// (d/2)(1/q - 1/r), the time weight of the L^r rung of the regularity ladder.
  double ladder_weight(double r) const noexcept { return 0.5 * d * (1.0 / q - 1.0 / r); }
  bool critical() const noexcept;
  /// q < q_tilde <= 2p (bilinear estimate into N).
  bool n_target_admissible() const noexcept;
  /// q_tilde > q >= d (bilinear estimate into K).
  bool k_target_admissible() const noexcept;
  bool calibrated() const noexcept { return delta > 0.0; }
  /// Stable identifier of (d, p, s, q_tilde) used to key calibration files.
  std::string key() const;
};

/// Validates the hypotheses p > d/2, d/p - 1 <= s < d/(2p), q_tilde > max(p, q) and
/// fills in the derived exponents. Throws DomainError naming the violated inequality.
ExponentBook build_exponent_book(int d, double p, double s, double q_tilde);

nlohmann::json to_json(const ExponentBook& book);
ExponentBook exponent_book_from_json(const nlohmann::json& j);

/// Velocity (or generic vector) samples at increasing times 0 < t_1 < ... < t_M = T.
/// `initial` optionally carries the t = 0 value used to interpolate on (0, t_1).
struct Trajectory {
  Lattice lattice;
  std::vector<double> times;
  std::vector<Field> fields;
  std::optional<Field> initial;

  double horizon() const { return times.back(); }
  std::size_t size() const noexcept { return times.size(); }
};

/// t_j = T (j / m)^2, j = 1..m.
std::vector<double> quadratic_mesh(double horizon, int m);

/// Throws ShapeError/DataError on inconsistent nodes, lattices or kinds.
void validate(const Trajectory& traj);

/// e^{t_j Delta} u0 at the given times, with initial = u0.
Trajectory heat_trajectory(const Field& u0, const std::vector<double>& times);

/// Same field at every node.
Trajectory constant_trajectory(const Field& f, const std::vector<double>& times);

Trajectory operator-(const Trajectory& a, const Trajectory& b);
Trajectory operator+(const Trajectory& a, const Trajectory& b);
Trajectory operator*(double c, const Trajectory& a);
Trajectory zero_trajectory(const Lattice& lattice, const std::vector<double>& times);

struct NormReport {
  std::string kind;
  std::vector<std::pair<std::string, double>> exponents;
  double value = 0.0;
  std::optional<double> argmax_t;
  bool window_ok = true;
  std::vector<double> per_node;
};

nlohmann::json to_json(const NormReport& report);

/// L^r norm, r in [1, inf]; vector and tensor fields aggregate components as
/// (sum_m ||f_m||^2)^{1/2}. r = inf is the grid maximum.
double lebesgue_norm(const Field& f, double r);

/// ||Lambda^s f||_{L^p}.
double sobolev_norm(const Field& f, double s, double p);

/// Dyadic grid 2^{j/per_octave} covering [t_min, t_max].
std::vector<double> dyadic_time_grid(double t_min, double t_max, int per_octave = 4);

/// Heat characterization of the homogeneous Besov norm with third index infinity:
/// max over t in t_grid of t^{-s/2} ||e^{t Delta} f||_{L^q}, s < 0. The mean is
/// removed first (it is not a member of any homogeneous space and does not decay
/// on the torus). Throws WindowError if the grid leaves the validity window.
NormReport besov_norm_heat(const Field& f, double s, double q, const std::vector<double>& t_grid);

/// sup_j t_j^{alpha/2} ||u(t_j)||_{L^q_tilde}, alpha = d (1/q - 1/q_tilde).
NormReport kato_norm(const Trajectory& traj, double q, double q_tilde);

/// sup_j ||u(t_j)||_{H^s_p}.
NormReport n_norm(const Trajectory& traj, double s, double p);

/// sup_j t_j^{weight} ||u(t_j)||_{L^r}.
NormReport weighted_sup_norm(const Trajectory& traj, double weight, double r);

struct VanishingReport {
  std::vector<double> times;
  std::vector<double> values;
  bool vanishing = false;
};

/// t_j^{weight} ||u(t_j)||_{L^r} over the first five nodes and whether it strictly
/// decreases toward t = 0. Needs five nodes below T/100.
VanishingReport vanishing_at_zero(const Trajectory& traj, double weight, double r);

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_relative_residual = 0.0;
  bool power_law = true;  // false when the fit misses some point by more than 10%
  std::size_t points = 0;
};

/// Least-squares slope of log(value) against log(t) over t in [window.first, window.second].
DecayFit decay_exponent_fit(const std::vector<double>& t, const std::vector<double>& values,
                            std::pair<double, double> window);

struct EmbeddingReport {
  double max_ratio = 0.0;
  double max_ratio_half = 0.0;  // over the first half of the corpus
  bool stable = false;          // full and half maxima within a factor 2
  std::vector<double> ratios;
};

/// max over the corpus of ||f||_{H^{s2}_{q2}} / ||f||_{H^{s1}_{q1}} with
/// s1 - d/q1 = s2 - d/q2 and 1 < q1, q2 < inf.
EmbeddingReport sobolev_embedding_check(const std::vector<Field>& corpus, double s1, double q1,
                                        double s2, double q2);

}  // namespace mildns
