#include "roughlab/gaussian.hpp"

#include "roughlab/errors.hpp"

#include <cmath>

namespace roughlab {

using detail::require;

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::BrownianMotion: return "brownian";
    case ProcessKind::FractionalBM: return "fbm";
    case ProcessKind::OrnsteinUhlenbeck: return "ou";
    case ProcessKind::BrownianBridge: return "bridge";
    case ProcessKind::FiniteDim: return "finite";
  }
  return "?";
}

ProcessKind process_kind_from_string(const std::string& name) {
  for (auto k : {ProcessKind::BrownianMotion, ProcessKind::FractionalBM, ProcessKind::OrnsteinUhlenbeck,
                 ProcessKind::BrownianBridge, ProcessKind::FiniteDim})
    if (to_string(k) == name) return k;
  throw ArgumentError("unknown process kind '" + name + "' (brownian, fbm, ou, bridge, finite)");
}

GaussianSpec GaussianSpec::brownian(double horizon, std::size_t n, std::size_t d) {
  GaussianSpec s;
  s.kind = ProcessKind::BrownianMotion;
  s.horizon = horizon;
  s.grid_size = n;
  s.dim = d;
  s.validate();
  return s;
}

GaussianSpec GaussianSpec::fractional(double hurst, double horizon, std::size_t n, std::size_t d) {
  GaussianSpec s = brownian(horizon, n, d);
  s.kind = ProcessKind::FractionalBM;
  s.hurst = hurst;
  s.validate();
  return s;
}

GaussianSpec GaussianSpec::ornstein_uhlenbeck(double theta, double sigma, double horizon, std::size_t n,
                                              std::size_t d) {
  GaussianSpec s = brownian(horizon, n, d);
  s.kind = ProcessKind::OrnsteinUhlenbeck;
  s.theta = theta;
  s.sigma = sigma;
  s.validate();
  return s;
}

GaussianSpec GaussianSpec::bridge(double horizon, std::size_t n, std::size_t d) {
  GaussianSpec s = brownian(horizon, n, d);
  s.kind = ProcessKind::BrownianBridge;
  return s;
}

GaussianSpec GaussianSpec::finite_dim(Vector mean, Eigen::MatrixXd cov) {
  GaussianSpec s;
  s.kind = ProcessKind::FiniteDim;
  s.dim = static_cast<std::size_t>(mean.size());
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  s.validate();
  return s;
}

void GaussianSpec::validate() const {
  if (kind == ProcessKind::FiniteDim) {
    require(mean.size() >= 1, "GaussianSpec: empty mean");
    require(cov.rows() == mean.size() && cov.cols() == mean.size(), "GaussianSpec: covariance shape mismatch");
    require(mean.allFinite() && cov.allFinite(), "GaussianSpec: non-finite mean or covariance");
    require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff()),
            "GaussianSpec: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -1e-10 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff()),
            "GaussianSpec: covariance not positive semidefinite");
    return;
  }
  require(horizon > 0.0 && std::isfinite(horizon), "GaussianSpec: horizon must be positive");
  require(grid_size >= 2, "GaussianSpec: grid size must be >= 2");
  require(dim >= 1, "GaussianSpec: dimension must be >= 1");
  if (kind == ProcessKind::FractionalBM)
    require(hurst > 0.0 && hurst < 1.0, "GaussianSpec: Hurst parameter must lie in (0, 1)");
  if (kind == ProcessKind::OrnsteinUhlenbeck)
    require(theta > 0.0 && sigma > 0.0, "GaussianSpec: OU needs theta > 0 and sigma > 0");
}

double GaussianSpec::covariance(double s, double t) const {
  switch (kind) {
    case ProcessKind::BrownianMotion: return std::min(s, t);
    case ProcessKind::FractionalBM: {
      const double h2 = 2.0 * hurst;
      return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
    }
    case ProcessKind::OrnsteinUhlenbeck:
      return sigma * sigma / (2.0 * theta) * (std::exp(-theta * std::abs(t - s)) - std::exp(-theta * (t + s)));
    case ProcessKind::BrownianBridge: return std::min(s, t) - s * t / horizon;
    case ProcessKind::FiniteDim: break;
  }
  throw ArgumentError("GaussianSpec::covariance: not a path law");
}

double GaussianSpec::sigma2() const {
  if (kind == ProcessKind::FiniteDim) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff());
  }
  const auto grid = uniform_grid(grid_size, horizon);
  Eigen::MatrixXd c(grid_size - 1, grid_size - 1);
  for (std::size_t i = 1; i < grid_size; ++i)
    for (std::size_t j = 1; j < grid_size; ++j)
      c(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) = covariance(grid[i], grid[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("psd_sqrt: eigendecomposition failed");
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

GaussianSampler::GaussianSampler(GaussianSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind == ProcessKind::FiniteDim) {
    factor_ = psd_sqrt(spec_.cov);
    return;
  }
  grid_ = uniform_grid(spec_.grid_size, spec_.horizon);
  if (spec_.kind == ProcessKind::FractionalBM) {
    const std::size_t m = spec_.grid_size - 1;
    Eigen::MatrixXd c(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = spec_.covariance(grid_[i + 1], grid_[j + 1]);
    c.diagonal().array() += 1e-12 * c.trace() / static_cast<double>(m);
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw NumericalError("fBm covariance: Cholesky factorization failed");
    factor_ = llt.matrixL();
  }
}

SampledPath GaussianSampler::sample_path(SeededRng& rng) const {
  require(spec_.is_path(), "sample_path: spec is finite-dimensional");
  const std::size_t n = spec_.grid_size, d = spec_.dim;
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  switch (spec_.kind) {
    case ProcessKind::BrownianMotion:
    case ProcessKind::BrownianBridge: {
      for (std::size_t i = 1; i < n; ++i) {
        const double sd = std::sqrt(grid_[i] - grid_[i - 1]);
        for (std::size_t k = 0; k < d; ++k)
          v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
              v(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(k)) + sd * rng.normal();
      }
      if (spec_.kind == ProcessKind::BrownianBridge) {
        const Eigen::RowVectorXd end = v.row(static_cast<Eigen::Index>(n - 1));
        for (std::size_t i = 0; i < n; ++i)
          v.row(static_cast<Eigen::Index>(i)) -= (grid_[i] / spec_.horizon) * end;
        v.row(static_cast<Eigen::Index>(n - 1)).setZero();
      }
      break;
    }
    case ProcessKind::OrnsteinUhlenbeck: {
      for (std::size_t i = 1; i < n; ++i) {
        const double dt = grid_[i] - grid_[i - 1];
        const double decay = std::exp(-spec_.theta * dt);
        const double sd = spec_.sigma * std::sqrt(-std::expm1(-2.0 * spec_.theta * dt) / (2.0 * spec_.theta));
        for (std::size_t k = 0; k < d; ++k)
          v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
              decay * v(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(k)) + sd * rng.normal();
      }
      break;
    }
    case ProcessKind::FractionalBM: {
      const auto m = static_cast<Eigen::Index>(n - 1);
      Vector z(m);
      for (std::size_t k = 0; k < d; ++k) {
        for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
        const Vector x = factor_.triangularView<Eigen::Lower>() * z;
        v.col(static_cast<Eigen::Index>(k)).tail(m) = x;
      }
      break;
    }
    case ProcessKind::FiniteDim: break;
  }
  return SampledPath(grid_, std::move(v));
}

Vector GaussianSampler::sample_vector(SeededRng& rng) const {
  require(spec_.kind == ProcessKind::FiniteDim, "sample_vector: spec is a path law");
  Vector z(spec_.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return spec_.mean + factor_ * z;
}

SampledPath sample_path(const GaussianSpec& spec, SeededRng& rng) {
  return GaussianSampler(spec).sample_path(rng);
}

Vector sample_vector(const GaussianSpec& spec, SeededRng& rng) {
  return GaussianSampler(spec).sample_vector(rng);
}

// ---------------------------------------------------------------------------
// Cameron-Martin geometry of Brownian motion.

namespace {

void require_starts_at_zero(const SampledPath& h, const char* who) {
  require(h.point(0).cwiseAbs().maxCoeff() <= 1e-12, std::string(who) + ": path must start at 0");
}

std::size_t dyadic_level(const SampledPath& x) {
  const std::size_t segs = x.size() - 1;
  require(x.size() >= 2 && (segs & (segs - 1)) == 0, "Schauder system: n-1 must be a power of two");
  const double dt = x.horizon() / static_cast<double>(segs);
  for (std::size_t i = 0; i < x.size(); ++i)
    require(std::abs(x.time(i) - x.time(0) - dt * static_cast<double>(i)) <= 1e-9 * x.horizon(),
            "Schauder system: grid must be uniform");
  std::size_t level = 0;
  while ((std::size_t{1} << level) < segs) ++level;
  return level;
}

}  // namespace

double cm_norm(const SampledPath& h) {
  require_starts_at_zero(h, "cm_norm");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    const double dt = h.time(i + 1) - h.time(i);
    sum += (h.point(i + 1) - h.point(i)).squaredNorm() / dt;
  }
  return std::sqrt(sum);
}

double cm_distance(const SampledPath& x, const SampledPath& y) { return cm_norm(x - y); }

double PointFunctional::sup_norm_bound() const {
  double s = 0.0;
  for (const auto& [idx, w] : terms)
    if (idx > 0) s += std::abs(w);
  return s;
}

std::vector<PointFunctional> schauder_functionals(std::size_t grid_size, double horizon,
                                                  std::size_t n_basis) {
  const std::size_t segs = grid_size - 1;
  require(grid_size >= 2 && (segs & (segs - 1)) == 0, "Schauder system: n-1 must be a power of two");
  require(n_basis <= segs, "Schauder system: at most n-1 basis functions on this grid");
  std::vector<PointFunctional> out;
  out.reserve(n_basis);
  const double root_t = std::sqrt(horizon);
  if (n_basis >= 1) out.push_back({{{segs, 1.0 / root_t}}});
  for (std::size_t level = 0; out.size() < n_basis; ++level) {
    const std::size_t count = std::size_t{1} << level;
    const std::size_t width = segs / count;
    const double c = std::sqrt(static_cast<double>(count)) / root_t;
    for (std::size_t k = 0; k < count && out.size() < n_basis; ++k) {
      const std::size_t left = k * width, right = left + width, mid = left + width / 2;
      out.push_back({{{mid, 2.0 * c}, {left, -c}, {right, -c}}});
    }
  }
  return out;
}

namespace {

std::vector<double> coeffs_component(const SampledPath& x, std::size_t comp, std::size_t n_basis) {
  const auto funcs = schauder_functionals(x.size(), x.horizon(), n_basis);
  std::vector<double> out(funcs.size());
  for (std::size_t k = 0; k < funcs.size(); ++k) {
    double s = 0.0;
    for (const auto& [idx, w] : funcs[k].terms) s += w * (x.value(idx, comp) - x.value(0, comp));
    out[k] = s;
  }
  return out;
}

}  // namespace

std::vector<double> schauder_coeffs(const SampledPath& x, std::size_t n_basis) {
  require(x.dim() == 1, "schauder_coeffs: scalar path required");
  dyadic_level(x);
  require_starts_at_zero(x, "schauder_coeffs");
  return coeffs_component(x, 0, n_basis);
}

double projection_metric(const SampledPath& x, const SampledPath& y, std::size_t n_basis) {
  require(x.same_grid(y) && x.dim() == y.dim(), "projection_metric: grid or dimension mismatch");
  dyadic_level(x);
  const SampledPath diff = x - y;
  require_starts_at_zero(diff, "projection_metric (x(0) must equal y(0))");
  double sq = 0.0;
  for (std::size_t k = 0; k < diff.dim(); ++k)
    for (double c : coeffs_component(diff, k, n_basis)) sq += c * c;
  return std::min(std::sqrt(sq), static_cast<double>(n_basis));
}

double projection_lipschitz(std::size_t grid_size, double horizon, std::size_t n_basis) {
  double s = 0.0;
  for (const auto& f : schauder_functionals(grid_size, horizon, n_basis)) {
    const double b = f.sup_norm_bound();
    s += b * b;
  }
  return std::sqrt(s);
}

}  // namespace roughlab
