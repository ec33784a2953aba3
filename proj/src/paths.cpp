#include "roughlab/paths.hpp"

#include "roughlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace roughlab {

using detail::require;

SampledPath::SampledPath(std::vector<double> times, Matrix values)
    : times_(std::move(times)), values_(std::move(values)) {
  require(!times_.empty(), "SampledPath: empty grid");
  require(values_.cols() >= 1, "SampledPath: dimension must be >= 1");
  require(static_cast<std::size_t>(values_.rows()) == times_.size(),
          "SampledPath: " + std::to_string(times_.size()) + " times but " +
              std::to_string(values_.rows()) + " value rows");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    require(std::isfinite(times_[i]), "SampledPath: non-finite time");
    if (i > 0) require(times_[i] > times_[i - 1], "SampledPath: times must be strictly increasing");
  }
  require(values_.allFinite(), "SampledPath: non-finite value");
}

SampledPath SampledPath::on_uniform_grid(double horizon, Matrix values) {
  const auto n = static_cast<std::size_t>(values.rows());
  return SampledPath(uniform_grid(n, horizon), std::move(values));
}

SampledPath SampledPath::from_function(std::vector<double> times, std::size_t dim,
                                       const std::function<Vector(double)>& f) {
  Matrix values(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Vector v = f(times[i]);
    require(static_cast<std::size_t>(v.size()) == dim, "from_function: wrong output dimension");
    values.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return SampledPath(std::move(times), std::move(values));
}

bool SampledPath::same_grid(const SampledPath& other) const {
  return times_ == other.times_;
}

SampledPath SampledPath::operator+(const SampledPath& other) const {
  require(same_grid(other) && dim() == other.dim(), "path sum: grid or dimension mismatch");
  return SampledPath(times_, values_ + other.values_);
}

SampledPath SampledPath::operator-(const SampledPath& other) const {
  require(same_grid(other) && dim() == other.dim(), "path difference: grid or dimension mismatch");
  return SampledPath(times_, values_ - other.values_);
}

SampledPath SampledPath::scaled(double c) const { return SampledPath(times_, values_ * c); }

SampledPath SampledPath::subsampled(std::size_t stride) const {
  require(stride >= 1 && (size() - 1) % stride == 0, "subsampled: stride must divide n-1");
  const std::size_t m = (size() - 1) / stride + 1;
  std::vector<double> t(m);
  Matrix v(static_cast<Eigen::Index>(m), values_.cols());
  for (std::size_t i = 0; i < m; ++i) {
    t[i] = times_[i * stride];
    v.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(i * stride));
  }
  return SampledPath(std::move(t), std::move(v));
}

std::vector<double> uniform_grid(std::size_t n, double horizon) {
  require(n >= 1, "uniform_grid: n must be >= 1");
  require(horizon > 0.0, "uniform_grid: horizon must be positive");
  std::vector<double> t(n);
  if (n == 1) return {0.0};
  for (std::size_t i = 0; i < n; ++i)
    t[i] = horizon * static_cast<double>(i) / static_cast<double>(n - 1);
  return t;
}

namespace detail {

void check_interval(const SampledPath& path, IndexInterval sub) {
  require(sub.first <= sub.last && sub.last < path.size(),
          "interval [" + std::to_string(sub.first) + ", " + std::to_string(sub.last) +
              "] outside grid of " + std::to_string(path.size()) + " points");
}

namespace {

GaussRule compute_gauss(std::size_t order) {
  GaussRule rule;
  const int n = static_cast<int>(order);
  for (int k = 1; k <= n; ++k) {
    double x = std::cos(M_PI * (k - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p0 = std::legendre(n, x);
      const double p1 = std::legendre(n - 1, x);
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double p0 = std::legendre(n, x);
    const double p1 = std::legendre(n - 1, x);
    dp = n * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes.push_back(0.5 * (x + 1.0));
    rule.weights.push_back(0.5 * w);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(std::size_t order) {
  static std::mutex mu;
  static std::map<std::size_t, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss(order)).first;
  return it->second;
}

}  // namespace detail

namespace {

void check_p(double p) {
  require(std::isfinite(p) && p >= 1.0, "p-variation: p must be >= 1, got " + std::to_string(p));
}

double increment_norm_sq(const Matrix& v, std::size_t j, std::size_t u) {
  return (v.row(static_cast<Eigen::Index>(u)) - v.row(static_cast<Eigen::Index>(j))).squaredNorm();
}

}  // namespace

double p_variation(const SampledPath& path, double p, IndexInterval sub) {
  check_p(p);
  detail::check_interval(path, sub);
  const Matrix& v = path.values();
  if (sub.first == sub.last) return 0.0;
  if (p == 1.0) {
    // Triangle inequality: the finest partition is optimal.
    double total = 0.0;
    for (std::size_t i = sub.first; i < sub.last; ++i) total += std::sqrt(increment_norm_sq(v, i, i + 1));
    return total;
  }
  const double half_p = 0.5 * p;
  const std::size_t d = path.dim();
  const double* data = v.data();
  const double sup = detail::variation_sup(sub.first, sub.last, [&](std::size_t j, std::size_t u) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = data[u * d + k] - data[j * d + k];
      sq += diff * diff;
    }
    return std::pow(sq, half_p);
  });
  return std::pow(sup, 1.0 / p);
}

double p_variation(const SampledPath& path, double p) {
  return p_variation(path, p, full_interval(path));
}

Partition p_variation_partition(const SampledPath& path, double p, IndexInterval sub) {
  check_p(p);
  detail::check_interval(path, sub);
  const Matrix& v = path.values();
  const std::size_t len = sub.last - sub.first + 1;
  std::vector<double> best(len, 0.0);
  std::vector<std::size_t> prev(len, 0);
  for (std::size_t u = 1; u < len; ++u) {
    best[u] = -1.0;
    for (std::size_t j = 0; j < u; ++j) {
      const double cand =
          best[j] + std::pow(increment_norm_sq(v, sub.first + j, sub.first + u), 0.5 * p);
      if (cand > best[u]) {
        best[u] = cand;
        prev[u] = j;
      }
    }
  }
  Partition part;
  std::size_t u = len - 1;
  part.indices.push_back(sub.first + u);
  while (u > 0) {
    u = prev[u];
    part.indices.push_back(sub.first + u);
  }
  std::reverse(part.indices.begin(), part.indices.end());
  return part;
}

double p_variation_bruteforce(const SampledPath& path, double p, IndexInterval sub) {
  check_p(p);
  detail::check_interval(path, sub);
  const std::size_t len = sub.last - sub.first + 1;
  if (len > 16)
    throw RefusalError("p_variation_bruteforce: " + std::to_string(len) +
                       " points exceeds the 16-point enumeration limit");
  if (len == 1) return 0.0;
  const Matrix& v = path.values();
  const std::size_t interior = len - 2;
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << interior); ++mask) {
    double sum = 0.0;
    std::size_t last = sub.first;
    for (std::size_t k = 0; k < interior; ++k) {
      if (mask & (1u << k)) {
        const std::size_t idx = sub.first + 1 + k;
        sum += std::pow(increment_norm_sq(v, last, idx), 0.5 * p);
        last = idx;
      }
    }
    sum += std::pow(increment_norm_sq(v, last, sub.last), 0.5 * p);
    best = std::max(best, sum);
  }
  return std::pow(best, 1.0 / p);
}

double p_variation_bruteforce(const SampledPath& path, double p) {
  return p_variation_bruteforce(path, p, full_interval(path));
}

double sup_distance(const SampledPath& x, const SampledPath& y) {
  require(x.same_grid(y) && x.dim() == y.dim(), "sup_distance: grid or dimension mismatch");
  return (x.values() - y.values()).rowwise().norm().maxCoeff();
}

double control_eval(const SampledPath& path, double p, std::size_t s_idx, std::size_t t_idx) {
  require(s_idx <= t_idx, "control_eval: s_idx > t_idx");
  const double v = p_variation(path, p, {s_idx, t_idx});
  return std::pow(v, p);
}

std::size_t greedy_count(std::size_t s, std::size_t t, double alpha,
                         const std::function<double(std::size_t, std::size_t)>& omega) {
  require(alpha > 0.0, "greedy_count: alpha must be positive");
  require(s <= t, "greedy_count: s > t");
  std::size_t count = 0;
  std::size_t tau = s;
  while (tau < t) {
    std::size_t u = tau + 1;
    while (u < t && omega(tau, u) < alpha) ++u;
    // u == t either filled the block or hit the cap; only a block ending
    // strictly before t adds another tau_i < t.
    if (u >= t) break;
    ++count;
    tau = u;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Fractional Sobolev norm of a piecewise linear path.

double lp_norm(const SampledPath& h, double p) {
  require(p >= 1.0, "lp_norm: p must be >= 1");
  const auto& rule = detail::gauss_legendre(4);
  const Matrix& v = h.values();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    const double dt = h.time(i + 1) - h.time(i);
    for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
      const double w = rule.nodes[g];
      const double n = ((1.0 - w) * v.row(static_cast<Eigen::Index>(i)) +
                        w * v.row(static_cast<Eigen::Index>(i + 1)))
                           .norm();
      sum += rule.weights[g] * dt * std::pow(n, p);
    }
  }
  return std::pow(sum, 1.0 / p);
}

namespace {

// Integral over the square cell_i x cell_j (i < j, not adjacent) of
// |h(v) - h(u)|^p / |v - u|^{1 + delta p} by tensor Gauss-Legendre.
double far_cell(const SampledPath& h, std::size_t i, std::size_t j, double p, double expo,
                const detail::GaussRule& rule) {
  const Matrix& v = h.values();
  const std::size_t d = h.dim();
  const double ti = h.time(i), dti = h.time(i + 1) - ti;
  const double tj = h.time(j), dtj = h.time(j + 1) - tj;
  double sum = 0.0;
  for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
    const double wa = rule.nodes[a];
    const double u = ti + wa * dti;
    for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
      const double wb = rule.nodes[b];
      const double t = tj + wb * dtj;
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double hu = (1 - wa) * v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) +
                          wa * v(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(k));
        const double hv = (1 - wb) * v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) +
                          wb * v(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(k));
        sq += (hv - hu) * (hv - hu);
      }
      sum += rule.weights[a] * rule.weights[b] * std::pow(sq, 0.5 * p) / std::pow(t - u, expo);
    }
  }
  return sum * dti * dtj;
}

// Adjacent cells sharing node t_{i+1}. With a = t - u, b = v - t and the map
// a = r w, b = r (1 - w) the integrand is r^{p - delta p} |g(w)|^p where
// g(w) = slope_i w + slope_j (1 - w); the part r <= min(dt_i, dt_j) separates.
double adjacent_cells(const Eigen::RowVectorXd& slope_i, const Eigen::RowVectorXd& slope_j,
                      double dti, double dtj, double p, double delta,
                      const detail::GaussRule& rule) {
  const double c = p - delta * p;
  auto g_pow = [&](double w) { return std::pow((slope_i * w + slope_j * (1.0 - w)).norm(), p); };
  const double lo = std::min(dti, dtj), hi = std::max(dti, dtj), top = dti + dtj;
  double w_int = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) w_int += rule.weights[k] * g_pow(rule.nodes[k]);
  double total = std::pow(lo, c + 1.0) / (c + 1.0) * w_int;

  auto band = [&](double r0, double r1) {
    double s = 0.0;
    for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
      const double r = r0 + rule.nodes[a] * (r1 - r0);
      const double w0 = std::max(0.0, 1.0 - dtj / r);
      const double w1 = std::min(1.0, dti / r);
      if (w1 <= w0) continue;
      double inner = 0.0;
      for (std::size_t b = 0; b < rule.nodes.size(); ++b)
        inner += rule.weights[b] * g_pow(w0 + rule.nodes[b] * (w1 - w0));
      s += rule.weights[a] * std::pow(r, c) * inner * (w1 - w0);
    }
    return s * (r1 - r0);
  };
  if (hi > lo) total += band(lo, hi);
  total += band(hi, top);
  return total;
}

}  // namespace

double sobolev_seminorm(const SampledPath& h, const SobolevParams& params) {
  const double delta = params.delta, p = params.p;
  require(delta > 0.0 && delta <= 1.0, "sobolev_norm: delta must lie in (0, 1]");
  require(p > 1.0 && std::isfinite(p), "sobolev_norm: p must lie in (1, inf)");
  require(h.size() >= 2, "sobolev_norm: need at least two grid points");
  const std::size_t segs = h.size() - 1;
  std::vector<Eigen::RowVectorXd> slope(segs);
  std::vector<double> dt(segs);
  for (std::size_t i = 0; i < segs; ++i) {
    dt[i] = h.time(i + 1) - h.time(i);
    slope[i] = (h.values().row(static_cast<Eigen::Index>(i + 1)) -
                h.values().row(static_cast<Eigen::Index>(i))) /
               dt[i];
  }
  if (delta == 1.0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < segs; ++i) sum += std::pow(slope[i].norm(), p) * dt[i];
    return std::pow(sum, 1.0 / p);
  }
  const double expo = 1.0 + delta * p;
  const double a = p - 1.0 - delta * p;  // > -1
  const auto& fine = detail::gauss_legendre(8);
  const auto& coarse = detail::gauss_legendre(3);
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < segs; ++i) {
    // Same segment: |h(v) - h(u)| = |slope| |v - u|, integrated exactly.
    diag += std::pow(slope[i].norm(), p) * 2.0 * std::pow(dt[i], a + 2.0) / ((a + 1.0) * (a + 2.0));
    if (i + 1 < segs) off += adjacent_cells(slope[i], slope[i + 1], dt[i], dt[i + 1], p, delta, fine);
    for (std::size_t j = i + 2; j < segs; ++j)
      off += far_cell(h, i, j, p, expo, j - i <= 8 ? fine : coarse);
  }
  return std::pow(diag + 2.0 * off, 1.0 / p);
}

double sobolev_norm(const SampledPath& h, const SobolevParams& params) {
  const double semi = sobolev_seminorm(h, params);
  return lp_norm(h, params.p) + semi;
}

}  // namespace roughlab
