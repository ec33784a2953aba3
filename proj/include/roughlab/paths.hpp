#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace roughlab {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// A d-dimensional path sampled on a strictly increasing time grid. Between
/// grid points the path is the linear interpolant of its samples.
class SampledPath {
 public:
  /// Validates: times strictly increasing, one row of `values` per time,
  /// n >= 1, d >= 1, all entries finite.
  SampledPath(std::vector<double> times, Matrix values);

  /// Uniform grid of values.rows() points on [0, horizon].
  static SampledPath on_uniform_grid(double horizon, Matrix values);

  /// Samples f(t) (a d-vector) on the given grid.
  static SampledPath from_function(std::vector<double> times, std::size_t dim,
                                   const std::function<Vector(double)>& f);

  std::size_t size() const { return times_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(values_.cols()); }
  const std::vector<double>& times() const { return times_; }
  const Matrix& values() const { return values_; }
  double time(std::size_t i) const { return times_[i]; }
  double value(std::size_t i, std::size_t k) const { return values_(i, k); }
  Eigen::RowVectorXd point(std::size_t i) const { return values_.row(i); }
  double horizon() const { return times_.back() - times_.front(); }

  bool same_grid(const SampledPath& other) const;

  SampledPath operator+(const SampledPath& other) const;
  SampledPath operator-(const SampledPath& other) const;
  SampledPath scaled(double c) const;
  /// Keeps every `stride`-th grid point (the last point must be kept).
  SampledPath subsampled(std::size_t stride) const;

 private:
  std::vector<double> times_;
  Matrix values_;
};

std::vector<double> uniform_grid(std::size_t n, double horizon);

/// Closed index range [first, last] into a path grid.
struct IndexInterval {
  std::size_t first = 0;
  std::size_t last = 0;
};

inline IndexInterval full_interval(const SampledPath& x) { return {0, x.size() - 1}; }

/// Grid partition of an index interval; first and last entries are the
/// interval endpoints.
struct Partition {
  std::vector<std::size_t> indices;
};

struct SobolevParams {
  double delta = 1.0;  // in (0, 1]
  double p = 2.0;      // in (1, inf)
};

/// p-variation seminorm over grid partitions of `sub`. Exact for piecewise
/// linear paths. O(n^2) dynamic program; p == 1 reduces to total variation.
double p_variation(const SampledPath& path, double p, IndexInterval sub);
double p_variation(const SampledPath& path, double p);

/// A partition attaining the p-variation supremum.
Partition p_variation_partition(const SampledPath& path, double p, IndexInterval sub);

/// Exhaustive enumeration over all grid partitions; at most 16 points.
double p_variation_bruteforce(const SampledPath& path, double p, IndexInterval sub);
double p_variation_bruteforce(const SampledPath& path, double p);

/// max_i |x_i - y_i| on a common grid.
double sup_distance(const SampledPath& x, const SampledPath& y);

/// ||h||_{L^p} + |h|_{W^{delta,p}} on the whole grid.
double sobolev_norm(const SampledPath& h, const SobolevParams& params);
/// The seminorm part only.
double sobolev_seminorm(const SampledPath& h, const SobolevParams& params);
double lp_norm(const SampledPath& h, double p);

/// omega(s, t) = ||x||_{p-var; [s, t]}^p. Zero when s == t.
double control_eval(const SampledPath& path, double p, std::size_t s_idx, std::size_t t_idx);

/// Greedy block count on [s, t] for a control omega: tau_0 = s, tau_{i+1} is
/// the first grid index u > tau_i with omega(tau_i, u) >= alpha (capped at t).
/// Returns max{ i : tau_i < t }, so 0 when omega(s, t) < alpha.
std::size_t greedy_count(std::size_t s, std::size_t t, double alpha,
                         const std::function<double(std::size_t, std::size_t)>& omega);

namespace detail {

/// Incremental form of the variation recurrence
///   V(start) = 0,  V(u) = max_{start <= j < u} V(j) + cost(j, u),
/// extended one endpoint at a time.
class VariationAccumulator {
 public:
  explicit VariationAccumulator(std::size_t start) : start_(start) { v_.push_back(0.0); }

  std::size_t start() const { return start_; }
  std::size_t end() const { return start_ + v_.size() - 1; }
  double value() const { return v_.back(); }

  /// Appends endpoint end()+1 and returns V at it.
  template <class Cost>
  double extend(Cost&& cost) {
    const std::size_t u = end() + 1;
    double best = 0.0;
    for (std::size_t j = 0; j < v_.size(); ++j) {
      const double cand = v_[j] + cost(start_ + j, u);
      if (cand > best) best = cand;
    }
    v_.push_back(best);
    return best;
  }

 private:
  std::size_t start_;
  std::vector<double> v_;
};

/// Runs the recurrence over [first, last] and returns V(last).
template <class Cost>
double variation_sup(std::size_t first, std::size_t last, Cost&& cost) {
  VariationAccumulator acc(first);
  while (acc.end() < last) acc.extend(cost);
  return acc.value();
}

void check_interval(const SampledPath& path, IndexInterval sub);

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(std::size_t order);

}  // namespace detail

}  // namespace roughlab
