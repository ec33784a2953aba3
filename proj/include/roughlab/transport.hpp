#pragma once

#include "roughlab/flows.hpp"
#include "roughlab/gaussian.hpp"
#include "roughlab/paths.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace roughlab {

enum class CostKind { Euclidean, SupDistance, PVarDistance, CMDistance, ProjectionMetric };

std::string to_string(CostKind kind);
CostKind cost_kind_from_string(const std::string& name);

/// Pseudometric between sample points. Euclidean applies to vectors, every
/// other kind to paths on a common grid.
struct GroundCost {
  CostKind kind = CostKind::Euclidean;
  double p = 2.5;             // PVarDistance
  std::size_t n_basis = 8;    // ProjectionMetric

  static GroundCost euclidean() { return {}; }
  static GroundCost sup_distance() { return {CostKind::SupDistance}; }
  static GroundCost pvar(double p) { return {CostKind::PVarDistance, p}; }
  static GroundCost cameron_martin() { return {CostKind::CMDistance}; }
  static GroundCost projection(std::size_t n_basis) { return {CostKind::ProjectionMetric, 2.5, n_basis}; }

  double operator()(const Vector& x, const Vector& y) const;
  double operator()(const SampledPath& x, const SampledPath& y) const;
};

/// n equally weighted points.
template <class Point>
struct EmpiricalMeasure {
  std::vector<Point> points;
  std::size_t size() const { return points.size(); }
};

using VectorMeasure = EmpiricalMeasure<Vector>;
using PathMeasure = EmpiricalMeasure<SampledPath>;

/// Entry (i, j) = cost(mu_i, nu_j).
template <class Point>
Eigen::MatrixXd cost_matrix(const EmpiricalMeasure<Point>& mu, const EmpiricalMeasure<Point>& nu,
                            const GroundCost& cost) {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(mu.size()), static_cast<Eigen::Index>(nu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cost(mu.points[i], nu.points[j]);
  return c;
}

inline constexpr std::size_t kMaxAssignmentSize = 4096;

/// Exact W_p between two uniform measures of equal size given their ground
/// cost matrix (entries may be +inf). Infinite entries are replaced by a
/// sentinel large enough that any matching avoiding them is preferred; if the
/// optimum still uses one, the result is +inf.
double wasserstein_from_costs(const Eigen::MatrixXd& ground, double p);
double wasserstein_bruteforce_from_costs(const Eigen::MatrixXd& ground, double p);

template <class Point>
double empirical_wasserstein(const EmpiricalMeasure<Point>& mu, const EmpiricalMeasure<Point>& nu,
                             const GroundCost& cost, double p);
template <class Point>
double wasserstein_bruteforce(const EmpiricalMeasure<Point>& mu, const EmpiricalMeasure<Point>& nu,
                              const GroundCost& cost, double p);

/// W_2 between N(m1, S1) and N(m2, S2):
///   |m1 - m2|^2 + tr(S1 + S2 - 2 (S2^{1/2} S1 S2^{1/2})^{1/2}).
double gaussian_w2(const GaussianSpec& a, const GaussianSpec& b);

struct KlResult {
  double value = 0.0;
  bool finite = true;  // false when the reference covariance is singular
};

/// Relative entropy H(nu | mu) of two finite-dimensional normal laws.
KlResult gaussian_kl(const GaussianSpec& nu, const GaussianSpec& mu);

struct T2Report {
  double lhs = 0.0;           // W_2 under the Mahalanobis metric of mu
  double rhs = 0.0;           // sqrt(C H(nu | mu))
  bool holds = false;         // lhs <= rhs (1 + 1e-9)
  double equality_gap = 0.0;  // rhs - lhs
};

T2Report t2_check_finite_dim(const GaussianSpec& nu, const GaussianSpec& mu, double c);

/// Monte Carlo controls shared by the sampling experiments.
struct McOptions {
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  std::size_t threads = 1;
};

/// Solution map applied to driver paths in the path-space shift experiment.
struct PathFlow {
  enum class Kind { Identity, Additive, Rough };
  Kind kind = Kind::Identity;
  VectorFieldSpec fields;
  Eigen::VectorXd xi;

  SampledPath apply(const SampledPath& x) const;
};

struct ShiftExperimentReport {
  double lhs = 0.0;        // (E ||y^1 - y^2||_{p-var}^{2-eps})^{1/(2-eps)}
  double entropy = 0.0;    // |h|_H^2 / 2
  double implied_c = 0.0;  // lhs^2 / entropy
};

/// Synchronous coupling of x and x + h with x Brownian; entropy of the shifted
/// law from the Cameron-Martin formula.
ShiftExperimentReport t2_shift_experiment_path(const GaussianSpec& spec, const SampledPath& h,
                                               const PathFlow& flow, double p, double epsilon,
                                               const McOptions& mc);

struct ShiftSweep {
  std::vector<double> scales;
  std::vector<ShiftExperimentReport> reports;
  double spread = 0.0;  // max implied_c / min implied_c
};

ShiftSweep t2_shift_scale_sweep(const GaussianSpec& spec, const SampledPath& h, const PathFlow& flow,
                                double p, double epsilon, const std::vector<double>& scales,
                                const McOptions& mc);

enum class PushforwardMap { Identity, Scale, Tanh };

struct PushforwardCase {
  double lhs = 0.0;  // empirical W_2(Psi#nu, Psi#mu)
  double se = 0.0;   // bootstrap standard error of lhs
  double rhs = 0.0;  // L sqrt(C H(nu | mu))
  bool holds = false;
};

struct PushforwardOptions {
  PushforwardMap map = PushforwardMap::Identity;
  double scale = 1.0;  // Scale map factor
  double c = 2.0;
  std::size_t samples = 2000;
  std::size_t bootstrap = 8;
};

double pushforward_lipschitz(const PushforwardOptions& opt);
Vector apply_pushforward(const PushforwardOptions& opt, const Vector& x);

PushforwardCase pushforward_check(const GaussianSpec& mu, const GaussianSpec& nu,
                                  const PushforwardOptions& opt, std::uint64_t seed, std::uint64_t stream);

/// Random Gaussian perturbation of mu: mean shift of norm in [0.5, 1.5] and a
/// diagonal rescaling of the covariance by factors in [e^{-0.3}, e^{0.3}].
GaussianSpec perturb_gaussian(const GaussianSpec& mu, SeededRng& rng);

struct MetricAxiomsReport {
  double d12 = 0.0, d21 = 0.0, d13 = 0.0, d23 = 0.0;
  double self = 0.0;             // W(split1, split1)
  double symmetry_error = 0.0;   // |d12 - d21|
  double triangle_excess = 0.0;  // max(0, d13 - d12 - d23)
  bool holds = false;
};

/// Splits points into three consecutive equal blocks and checks symmetry,
/// W(a, a) = 0, and the triangle inequality (tolerance 1e-10).
template <class Point>
MetricAxiomsReport metric_axioms_check(const std::vector<Point>& points, const GroundCost& cost, double p);

}  // namespace roughlab
