#include "roughlab/transport.hpp"

#include "roughlab/assignment.hpp"
#include "roughlab/errors.hpp"
#include "roughlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace roughlab {

using detail::require;

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::Euclidean: return "euclidean";
    case CostKind::SupDistance: return "sup";
    case CostKind::PVarDistance: return "pvar";
    case CostKind::CMDistance: return "cm";
    case CostKind::ProjectionMetric: return "projection";
  }
  return "?";
}

CostKind cost_kind_from_string(const std::string& name) {
  for (auto k : {CostKind::Euclidean, CostKind::SupDistance, CostKind::PVarDistance, CostKind::CMDistance,
                 CostKind::ProjectionMetric})
    if (to_string(k) == name) return k;
  throw ArgumentError("unknown ground cost '" + name + "' (euclidean, sup, pvar, cm, projection)");
}

double GroundCost::operator()(const Vector& x, const Vector& y) const {
  require(kind == CostKind::Euclidean, "ground cost " + to_string(kind) + " needs path samples");
  require(x.size() == y.size(), "Euclidean cost: dimension mismatch");
  return (x - y).norm();
}

double GroundCost::operator()(const SampledPath& x, const SampledPath& y) const {
  switch (kind) {
    case CostKind::Euclidean:
      require(x.same_grid(y), "Euclidean cost on paths: grid mismatch");
      return (x.values() - y.values()).norm();
    case CostKind::SupDistance: return roughlab::sup_distance(x, y);
    case CostKind::PVarDistance: return p_variation(x - y, p);
    case CostKind::CMDistance: return cm_distance(x, y);
    case CostKind::ProjectionMetric: return projection_metric(x, y, n_basis);
  }
  return 0.0;
}

double wasserstein_from_costs(const Eigen::MatrixXd& ground, double p) {
  require(p >= 1.0, "Wasserstein: p must be >= 1");
  require(ground.rows() == ground.cols(), "Wasserstein: measures must have equal sample counts");
  const auto n = static_cast<std::size_t>(ground.rows());
  require(n >= 1, "Wasserstein: empty measure");
  if (n > kMaxAssignmentSize)
    throw RefusalError("Wasserstein: " + std::to_string(n) + " samples exceeds the assignment limit of " +
                       std::to_string(kMaxAssignmentSize));
  Eigen::MatrixXd powered = ground.array().pow(p).matrix();
  double max_finite = 0.0;
  bool any_inf = false;
  for (Eigen::Index k = 0; k < powered.size(); ++k) {
    const double c = powered.data()[k];
    require(!std::isnan(c) && c >= 0.0, "Wasserstein: costs must be nonnegative");
    if (std::isinf(c)) any_inf = true;
    else max_finite = std::max(max_finite, c);
  }
  if (any_inf) {
    const double sentinel = std::max(1e3, static_cast<double>(n + 1)) * max_finite + 1.0;
    for (Eigen::Index k = 0; k < powered.size(); ++k)
      if (std::isinf(powered.data()[k])) powered.data()[k] = sentinel;
  }
  const Assignment a = solve_assignment(powered);
  if (any_inf)
    for (std::size_t i = 0; i < n; ++i)
      if (std::isinf(ground(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a.row_to_col[i]))))
        return std::numeric_limits<double>::infinity();
  return std::pow(a.cost / static_cast<double>(n), 1.0 / p);
}

double wasserstein_bruteforce_from_costs(const Eigen::MatrixXd& ground, double p) {
  require(p >= 1.0, "Wasserstein: p must be >= 1");
  require(ground.rows() == ground.cols() && ground.rows() >= 1, "Wasserstein: measures must have equal sample counts");
  const Assignment a = solve_assignment_bruteforce(ground.array().pow(p).matrix());
  if (std::isinf(a.cost)) return a.cost;
  return std::pow(a.cost / static_cast<double>(ground.rows()), 1.0 / p);
}

template <class Point>
double empirical_wasserstein(const EmpiricalMeasure<Point>& mu, const EmpiricalMeasure<Point>& nu,
                             const GroundCost& cost, double p) {
  require(mu.size() == nu.size(), "empirical_wasserstein: sample counts differ (" + std::to_string(mu.size()) +
                                      " vs " + std::to_string(nu.size()) + ")");
  if (mu.size() > kMaxAssignmentSize)
    throw RefusalError("empirical_wasserstein: too many samples");
  return wasserstein_from_costs(cost_matrix(mu, nu, cost), p);
}

template <class Point>
double wasserstein_bruteforce(const EmpiricalMeasure<Point>& mu, const EmpiricalMeasure<Point>& nu,
                              const GroundCost& cost, double p) {
  require(mu.size() == nu.size(), "wasserstein_bruteforce: sample counts differ");
  if (mu.size() > 8) throw RefusalError("wasserstein_bruteforce: n > 8");
  return wasserstein_bruteforce_from_costs(cost_matrix(mu, nu, cost), p);
}

template double empirical_wasserstein(const VectorMeasure&, const VectorMeasure&, const GroundCost&, double);
template double empirical_wasserstein(const PathMeasure&, const PathMeasure&, const GroundCost&, double);
template double wasserstein_bruteforce(const VectorMeasure&, const VectorMeasure&, const GroundCost&, double);
template double wasserstein_bruteforce(const PathMeasure&, const PathMeasure&, const GroundCost&, double);

// ---------------------------------------------------------------------------
// Closed forms for normal laws.

namespace {

void require_finite_pair(const GaussianSpec& a, const GaussianSpec& b, const char* who) {
  require(a.kind == ProcessKind::FiniteDim && b.kind == ProcessKind::FiniteDim,
          std::string(who) + ": finite-dimensional specs required");
  require(a.mean.size() == b.mean.size(), std::string(who) + ": dimension mismatch");
}

}  // namespace

double gaussian_w2(const GaussianSpec& a, const GaussianSpec& b) {
  require_finite_pair(a, b, "gaussian_w2");
  const Eigen::MatrixXd root_b = psd_sqrt(b.cov);
  Eigen::MatrixXd inner = root_b * a.cov * root_b;
  inner = 0.5 * (inner + inner.transpose());
  const Eigen::MatrixXd cross = psd_sqrt(inner);
  const double trace_term = (a.cov + b.cov - 2.0 * cross).trace();
  const double sq = (a.mean - b.mean).squaredNorm() + trace_term;
  if (!std::isfinite(sq)) throw NumericalError("gaussian_w2: non-finite result");
  return std::sqrt(std::max(0.0, sq));
}

KlResult gaussian_kl(const GaussianSpec& nu, const GaussianSpec& mu) {
  require_finite_pair(nu, mu, "gaussian_kl");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto k = static_cast<double>(nu.mean.size());
  Eigen::LLT<Eigen::MatrixXd> llt_mu(mu.cov);
  if (llt_mu.info() != Eigen::Success) return {inf, false};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_nu(nu.cov, Eigen::EigenvaluesOnly);
  if (es_nu.eigenvalues().minCoeff() <= 0.0) return {inf, false};
  const double logdet_mu = 2.0 * llt_mu.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_nu = es_nu.eigenvalues().array().log().sum();
  const Vector dm = mu.mean - nu.mean;
  const double trace = llt_mu.solve(nu.cov).trace();
  const double quad = dm.dot(llt_mu.solve(dm));
  const double kl = 0.5 * (trace + quad - k + logdet_mu - logdet_nu);
  return {std::max(0.0, kl), true};
}

T2Report t2_check_finite_dim(const GaussianSpec& nu, const GaussianSpec& mu, double c) {
  require_finite_pair(nu, mu, "t2_check_finite_dim");
  require(c > 0.0, "t2_check_finite_dim: C must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mu.cov);
  require(es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0,
          "t2_check_finite_dim: reference covariance must be positive definite");
  const Eigen::MatrixXd whiten =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  Eigen::MatrixXd cov_nu = whiten * nu.cov * whiten;
  cov_nu = 0.5 * (cov_nu + cov_nu.transpose());
  const auto k = mu.mean.size();
  const GaussianSpec nu_w = GaussianSpec::finite_dim(whiten * nu.mean, cov_nu);
  const GaussianSpec mu_w = GaussianSpec::finite_dim(whiten * mu.mean, Eigen::MatrixXd::Identity(k, k));
  T2Report r;
  r.lhs = gaussian_w2(nu_w, mu_w);
  const KlResult kl = gaussian_kl(nu, mu);
  r.rhs = std::sqrt(c * kl.value);
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-9);
  r.equality_gap = r.rhs - r.lhs;
  return r;
}

// ---------------------------------------------------------------------------
// Path-space shift experiment.

SampledPath PathFlow::apply(const SampledPath& x) const {
  switch (kind) {
    case Kind::Identity: return x;
    case Kind::Additive: return ode_additive_solve(x, fields, xi);
    case Kind::Rough: return rde_solve(chen_lift(x), fields, xi);
  }
  return x;
}

ShiftExperimentReport t2_shift_experiment_path(const GaussianSpec& spec, const SampledPath& h,
                                               const PathFlow& flow, double p, double epsilon,
                                               const McOptions& mc) {
  require(spec.kind == ProcessKind::BrownianMotion, "t2_shift_experiment_path: Brownian driver required");
  require(epsilon > 0.0 && epsilon < 1.0, "t2_shift_experiment_path: epsilon must lie in (0, 1)");
  require(mc.trials >= 1, "t2_shift_experiment_path: need at least one trial");
  const GaussianSampler sampler(spec);
  const double power = 2.0 - epsilon;
  std::vector<double> values(mc.trials);
  parallel_for(mc.trials, mc.threads, [&](std::size_t i) {
    SeededRng rng(mc.seed, i);
    const SampledPath x = sampler.sample_path(rng);
    require(x.same_grid(h) && x.dim() == h.dim(), "t2_shift_experiment_path: h must live on the driver grid");
    const double d = p_variation(flow.apply(x + h) - flow.apply(x), p);
    values[i] = std::pow(d, power);
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(mc.trials);
  ShiftExperimentReport r;
  r.lhs = std::pow(mean, 1.0 / power);
  const double cm = cm_norm(h);
  r.entropy = 0.5 * cm * cm;
  r.implied_c = r.entropy > 0.0 ? r.lhs * r.lhs / r.entropy : 0.0;
  return r;
}

ShiftSweep t2_shift_scale_sweep(const GaussianSpec& spec, const SampledPath& h, const PathFlow& flow,
                                double p, double epsilon, const std::vector<double>& scales,
                                const McOptions& mc) {
  require(!scales.empty(), "t2_shift_scale_sweep: no scales");
  ShiftSweep sweep;
  sweep.scales = scales;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double s : scales) {
    sweep.reports.push_back(t2_shift_experiment_path(spec, h.scaled(s), flow, p, epsilon, mc));
    lo = std::min(lo, sweep.reports.back().implied_c);
    hi = std::max(hi, sweep.reports.back().implied_c);
  }
  sweep.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return sweep;
}

// ---------------------------------------------------------------------------
// Push-forward under Lipschitz maps.

double pushforward_lipschitz(const PushforwardOptions& opt) {
  switch (opt.map) {
    case PushforwardMap::Identity: return 1.0;
    case PushforwardMap::Scale: return std::abs(opt.scale);
    case PushforwardMap::Tanh: return 1.0;
  }
  return 1.0;
}

Vector apply_pushforward(const PushforwardOptions& opt, const Vector& x) {
  switch (opt.map) {
    case PushforwardMap::Identity: return x;
    case PushforwardMap::Scale: return opt.scale * x;
    case PushforwardMap::Tanh: return x.array().tanh().matrix();
  }
  return x;
}

GaussianSpec perturb_gaussian(const GaussianSpec& mu, SeededRng& rng) {
  const auto k = mu.mean.size();
  Vector dir(k);
  for (Eigen::Index i = 0; i < k; ++i) dir(i) = rng.normal();
  if (dir.norm() == 0.0) dir(0) = 1.0;
  const double radius = 0.5 + rng.uniform();
  Vector scale(k);
  for (Eigen::Index i = 0; i < k; ++i) scale(i) = std::exp(0.3 * (2.0 * rng.uniform() - 1.0));
  Eigen::MatrixXd cov = scale.asDiagonal() * mu.cov * scale.asDiagonal();
  cov = 0.5 * (cov + cov.transpose());
  return GaussianSpec::finite_dim(mu.mean + radius * dir.normalized(), cov);
}

PushforwardCase pushforward_check(const GaussianSpec& mu, const GaussianSpec& nu, const PushforwardOptions& opt,
                                  std::uint64_t seed, std::uint64_t stream) {
  require(opt.samples >= 2 && opt.samples <= kMaxAssignmentSize, "pushforward_check: bad sample count");
  SeededRng rng(seed, stream);
  const GaussianSampler s_nu(nu), s_mu(mu);
  std::vector<Vector> a(opt.samples), b(opt.samples);
  for (auto& v : a) v = apply_pushforward(opt, s_nu.sample_vector(rng));
  for (auto& v : b) v = apply_pushforward(opt, s_mu.sample_vector(rng));
  const GroundCost euclid;
  const Eigen::MatrixXd ground = cost_matrix(VectorMeasure{a}, VectorMeasure{b}, euclid);
  PushforwardCase out;
  out.lhs = wasserstein_from_costs(ground, 2.0);
  if (opt.bootstrap >= 2) {
    std::vector<double> boot;
    const auto n = static_cast<Eigen::Index>(opt.samples);
    Eigen::MatrixXd resampled(n, n);
    std::uniform_int_distribution<std::size_t> pick(0, opt.samples - 1);
    for (std::size_t rep = 0; rep < opt.bootstrap; ++rep) {
      std::vector<std::size_t> ri(opt.samples), ci(opt.samples);
      for (auto& r : ri) r = pick(rng.engine());
      for (auto& c : ci) c = pick(rng.engine());
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          resampled(i, j) = ground(static_cast<Eigen::Index>(ri[static_cast<std::size_t>(i)]),
                                   static_cast<Eigen::Index>(ci[static_cast<std::size_t>(j)]));
      boot.push_back(wasserstein_from_costs(resampled, 2.0));
    }
    double mean = 0.0;
    for (double v : boot) mean += v;
    mean /= static_cast<double>(boot.size());
    double var = 0.0;
    for (double v : boot) var += (v - mean) * (v - mean);
    out.se = std::sqrt(var / static_cast<double>(boot.size() - 1));
  }
  const KlResult kl = gaussian_kl(nu, mu);
  out.rhs = pushforward_lipschitz(opt) * std::sqrt(opt.c * kl.value);
  out.holds = out.lhs <= out.rhs + 3.0 * out.se;
  return out;
}

// ---------------------------------------------------------------------------

template <class Point>
MetricAxiomsReport metric_axioms_check(const std::vector<Point>& points, const GroundCost& cost, double p) {
  const std::size_t m = points.size() / 3;
  require(m >= 1, "metric_axioms_check: need at least three points");
  EmpiricalMeasure<Point> a, b, c;
  a.points.assign(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(m));
  b.points.assign(points.begin() + static_cast<std::ptrdiff_t>(m), points.begin() + static_cast<std::ptrdiff_t>(2 * m));
  c.points.assign(points.begin() + static_cast<std::ptrdiff_t>(2 * m),
                  points.begin() + static_cast<std::ptrdiff_t>(3 * m));
  MetricAxiomsReport r;
  r.d12 = empirical_wasserstein(a, b, cost, p);
  r.d21 = empirical_wasserstein(b, a, cost, p);
  r.d13 = empirical_wasserstein(a, c, cost, p);
  r.d23 = empirical_wasserstein(b, c, cost, p);
  r.self = empirical_wasserstein(a, a, cost, p);
  r.symmetry_error = std::abs(r.d12 - r.d21);
  r.triangle_excess = std::max({0.0, r.d13 - r.d12 - r.d23, r.d12 - r.d13 - r.d23, r.d23 - r.d12 - r.d13});
  r.holds = r.symmetry_error == 0.0 && r.self == 0.0 && r.triangle_excess <= 1e-10;
  return r;
}

template MetricAxiomsReport metric_axioms_check(const std::vector<Vector>&, const GroundCost&, double);
template MetricAxiomsReport metric_axioms_check(const std::vector<SampledPath>&, const GroundCost&, double);

}  // namespace roughlab
