#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mildns/norms.hpp"

namespace mildns {

/// Gauss-Legendre nodes and weights on [0, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Product rule for integrals over [0, t] with endpoint behaviour tau^{-theta} at 0 and
/// (t - tau)^{-gamma} at t. [0, t] is split at t/2; the left half uses
/// tau = (t/2) sigma^{m_theta}, the right half t - tau = (t/2) sigma^{m_gamma}, each
/// followed by Gauss-Legendre with nodes/2 points.
struct QuadratureSpec {
  int nodes = 32;
  double gamma = 0.75;
  double theta = 0.5;

  static constexpr const char* rule = "split-graded-gauss-legendre";

  static QuadratureSpec for_book(const ExponentBook& book, int nodes);
};

/// Throws DomainError unless gamma < 1, theta < 1, nodes >= 8 and even.
void validate(const QuadratureSpec& quad);

/// Grading power m for endpoint exponent e < 1: m = j / (1 - e) with
/// j = max(1, ceil(2 (1 - e))), so the substituted weight sigma^{m(1-e)-1} is a
/// non-negative integer power and m >= 2.
double grading_exponent(double endpoint_exponent);

struct QuadratureNode {
  double tau;
  double lag;  // t - tau, computed without cancellation
  double weight;
};

/// Nodes in (0, t), ordered by increasing tau, with Jacobian-weighted weights.
std::vector<QuadratureNode> duhamel_nodes(double t, const QuadratureSpec& quad);

/// int_0^t (t - tau)^{-gamma} tau^{-theta} dtau
///   = Gamma(1 - gamma) Gamma(1 - theta) / Gamma(2 - gamma - theta) t^{1 - gamma - theta}.
/// Throws DomainError (divergent integral) unless gamma < 1 and theta < 1.
double beta_integral(double gamma, double theta, double t);

/// Same integral by the graded product rule, for cross-validation.
double beta_integral_quadrature(double gamma, double theta, double t, int nodes = 64);

enum class Execution { serial, parallel };

/// B(u, v)(t_j) = int_0^{t_j} e^{(t_j - tau) Delta} P div (u (x) v)(tau) dtau at every node.
/// Between nodes the trajectories are interpolated linearly in log t; on (0, t_1) they
/// are interpolated linearly in t toward `initial` when both carry one, otherwise held
/// at t_1. Output fields are physical with initial value zero.
Trajectory bilinear_B(const Trajectory& u, const Trajectory& v, const QuadratureSpec& quad,
                      Execution exec = Execution::parallel);

/// B(u, v)(t) at a single mesh node; throws DomainError if t is not a node.
Field bilinear_B_at(const Trajectory& u, const Trajectory& v, double t, const QuadratureSpec& quad);

enum class EstimateTarget {
  n_space,  // sup ||B||_{H^s_p} / (T^{(1+s-d/p)/2} ||u||_K ||v||_K), needs q < q_tilde <= 2p
  k_space,  // ||B||_K / (T^{(1-d/q)/2} ||u||_K ||v||_K), needs q_tilde > q >= d
  k_cross,  // ||B||_{K^{q2}} / (T^{(1-d/q)/2} ||u||_{K^{q1}} ||v||_{K^{q1}})
};

const char* to_string(EstimateTarget target) noexcept;
EstimateTarget estimate_target_from_string(const std::string& name);

/// Throws DomainError naming the violated exponent condition. For k_cross, q1 and q2
/// are the input and output integrabilities; otherwise both equal book.q_tilde.
void check_estimate_exponents(const ExponentBook& book, EstimateTarget target, double q1,
                              double q2);

struct EstimateSample {
  double horizon = 0.0;
  double ratio = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  std::vector<double> times;
  std::vector<double> per_time;  // node-wise contribution to the numerator / denominator
};

/// Ratio for one pair of trajectories on a common mesh.
EstimateSample bilinear_estimate(const Trajectory& u, const Trajectory& v, const ExponentBook& book,
                                 EstimateTarget target, const QuadratureSpec& quad,
                                 double q1 = 0.0, double q2 = 0.0);

struct BilinearCorpusSpec {
  int pairs = 50;
  std::uint64_t seed = 1;
  double k_min = 1.0;
  double k_max = 8.0;
  int mesh_nodes = 16;  // M_t
  int quad_nodes = 16;  // M
  std::vector<double> horizons{0.5, 1.0};
};

struct BilinearEstimateReport {
  EstimateTarget target = EstimateTarget::k_space;
  ExponentBook book;
  double q1 = 0.0;
  double q2 = 0.0;
  std::vector<double> horizons;
  std::vector<std::vector<double>> ratios;       // [horizon][pair], base mesh
  std::vector<std::vector<double>> ratios_fine;  // [horizon][pair], doubled mesh
  std::vector<double> max_ratio;                 // per horizon, base mesh
  std::vector<double> max_ratio_fine;            // per horizon, doubled mesh
  EstimateSample worst;                          // sample attaining the overall maximum
  double overall_max = 0.0;
  double horizon_spread = 1.0;  // max / min over horizons of max_ratio
  double mesh_spread = 1.0;     // worst max(fine/base, base/fine) over horizons
};

/// Corpus of divergence-free random band data; each pair is evolved by the heat flow
/// on every horizon and on two mesh levels (M_t, M) and (2 M_t, 2 M).
BilinearEstimateReport bilinear_estimate_report(const Lattice& lattice, const ExponentBook& book,
                                                EstimateTarget target,
                                                const BilinearCorpusSpec& corpus,
                                                double q1 = 0.0, double q2 = 0.0);

nlohmann::json to_json(const BilinearEstimateReport& report);

}  // namespace mildns
