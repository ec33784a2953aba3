#pragma once

#include "roughlab/paths.hpp"
#include "roughlab/rng.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace roughlab {

enum class ProcessKind { BrownianMotion, FractionalBM, OrnsteinUhlenbeck, BrownianBridge, FiniteDim };

std::string to_string(ProcessKind kind);
ProcessKind process_kind_from_string(const std::string& name);

/// Law of a centred Gaussian process on a uniform grid of [0, horizon]
/// (independent identically distributed components), or a finite-dimensional
/// normal law N(mean, cov).
struct GaussianSpec {
  ProcessKind kind = ProcessKind::BrownianMotion;
  double hurst = 0.5;  // FractionalBM
  double theta = 1.0;  // OrnsteinUhlenbeck mean reversion
  double sigma = 1.0;  // OrnsteinUhlenbeck volatility
  Vector mean;                // FiniteDim
  Eigen::MatrixXd cov;        // FiniteDim
  double horizon = 1.0;
  std::size_t grid_size = 2;
  std::size_t dim = 1;

  static GaussianSpec brownian(double horizon, std::size_t n, std::size_t d = 1);
  static GaussianSpec fractional(double hurst, double horizon, std::size_t n, std::size_t d = 1);
  static GaussianSpec ornstein_uhlenbeck(double theta, double sigma, double horizon, std::size_t n,
                                         std::size_t d = 1);
  static GaussianSpec bridge(double horizon, std::size_t n, std::size_t d = 1);
  static GaussianSpec finite_dim(Vector mean, Eigen::MatrixXd cov);

  bool is_path() const { return kind != ProcessKind::FiniteDim; }
  void validate() const;

  /// Covariance of one component at times s, t (path kinds).
  double covariance(double s, double t) const;

  /// Largest covariance eigenvalue: sup of Var(l(X)) over unit functionals.
  double sigma2() const;
};

/// Precomputes what a spec needs (Cholesky factor for fBm, covariance square
/// root for FiniteDim) so repeated draws are cheap. Draws are pure functions
/// of the rng state.
class GaussianSampler {
 public:
  explicit GaussianSampler(GaussianSpec spec);

  const GaussianSpec& spec() const { return spec_; }
  SampledPath sample_path(SeededRng& rng) const;
  Vector sample_vector(SeededRng& rng) const;

 private:
  GaussianSpec spec_;
  std::vector<double> grid_;
  Eigen::MatrixXd factor_;
};

SampledPath sample_path(const GaussianSpec& spec, SeededRng& rng);
Vector sample_vector(const GaussianSpec& spec, SeededRng& rng);

/// Symmetric square root of a PSD matrix (eigenvalues clamped at zero).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a);

/// Brownian Cameron-Martin norm (sum |dh|^2 / dt)^{1/2}; requires h(0) = 0.
double cm_norm(const SampledPath& h);
/// cm_norm(x - y); requires x(0) = y(0).
double cm_distance(const SampledPath& x, const SampledPath& y);

/// Coefficients of a scalar path against the Cameron-Martin orthonormal
/// Schauder system: e_1(t) = t / sqrt(T), then integrated Haar functions,
/// coarse levels first. Requires a uniform dyadic grid and x(0) = 0.
std::vector<double> schauder_coeffs(const SampledPath& x, std::size_t n_basis);

/// Schauder coefficient functional k as point-evaluation weights.
struct PointFunctional {
  std::vector<std::pair<std::size_t, double>> terms;  // (grid index, weight)
  /// Operator norm w.r.t. the sup norm on paths vanishing at t = 0.
  double sup_norm_bound() const;
};
std::vector<PointFunctional> schauder_functionals(std::size_t grid_size, double horizon,
                                                  std::size_t n_basis);

/// min(l2 norm of the first n_basis Schauder coefficients of x - y, n_basis),
/// summed over components. Nondecreasing in n_basis.
double projection_metric(const SampledPath& x, const SampledPath& y, std::size_t n_basis);

/// (sum_{k <= n_basis} ||e*_k||^2)^{1/2}: projection_metric <= this * sup_distance
/// for scalar paths.
double projection_lipschitz(std::size_t grid_size, double horizon, std::size_t n_basis);

}  // namespace roughlab
