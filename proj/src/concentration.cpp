#include "roughlab/concentration.hpp"

#include "roughlab/errors.hpp"
#include "roughlab/parallel.hpp"
#include "roughlab/roughlift.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace roughlab {

using detail::require;

namespace {

constexpr std::size_t kTailLevels = 32;
constexpr double kMinTailCount = 30.0;

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2)));
}

}  // namespace

std::string to_string(TailVerdict v) {
  switch (v) {
    case TailVerdict::Gaussian: return "gaussian";
    case TailVerdict::Bounded: return "bounded";
    case TailVerdict::Heavy: return "heavy";
  }
  return "?";
}

double normal_survival(double r) { return 0.5 * std::erfc(r / std::sqrt(2.0)); }

double inverse_normal_survival(double s) {
  require(s > 0.0 && s < 1.0, "inverse_normal_survival: argument must lie in (0, 1)");
  return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * s);
}

double TailFit::fitted_log_survival(double r) const {
  if (sigma2 <= 0.0) return 0.0;
  return std::min(0.0, std::log(amplitude * normal_survival((r - r1) / std::sqrt(sigma2))));
}

namespace {

// Radii, log-survival, amplitude-profiled probit fit and residual trend for sorted samples.
void fit_sorted(const std::vector<double>& sorted, double quantile_lo, std::optional<double> fixed_amp, TailFit& fit) {
  const auto n = static_cast<double>(sorted.size());
  const double median = sorted[sorted.size() / 2];
  fit.radii.clear();
  fit.log_survival.clear();
  const double s_hi = 1.0 - quantile_lo, s_lo = kMinTailCount / n;
  for (std::size_t i = 0; i < kTailLevels; ++i) {
    const double level = s_hi * std::pow(s_lo / s_hi, static_cast<double>(i) / (kTailLevels - 1));
    const auto idx = std::min(sorted.size() - 1, static_cast<std::size_t>(std::floor((1.0 - level) * n)));
    const double r = sorted[idx];
    if (r <= median) continue;
    if (!fit.radii.empty() && r <= fit.radii.back()) continue;
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), r);
    if (above == 0) continue;
    fit.radii.push_back(r);
    fit.log_survival.push_back(std::log(static_cast<double>(above) / n));
  }
  fit.n_tail = fit.radii.size();
  if (fit.n_tail < kMinTailPoints) return;

  // For each amplitude A the probit line z = Phibar^{-1}(S / A) = (r - r1) / sigma
  // is a weighted linear fit; A is chosen to minimise the weighted log S misfit.
  const std::size_t m = fit.n_tail;
  std::vector<double> surv(m), wl(m);
  for (std::size_t i = 0; i < m; ++i) {
    surv[i] = std::exp(fit.log_survival[i]);
    wl[i] = surv[i] / std::sqrt(surv[i] * std::max(1.0 - surv[i], 1e-12) / n);  // inverse sd of log S
  }
  struct Line {
    double a = 0.0, b = 0.0, sse = std::numeric_limits<double>::infinity();
  };
  auto line_for = [&](double amp) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(m), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double z = inverse_normal_survival(surv[i] / amp);
      const double dens = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
      const double w = amp * dens / std::sqrt(surv[i] * std::max(1.0 - surv[i], 1e-12) / n);
      x.row(k) << w * fit.radii[i], w;
      y(k) = w * z;
    }
    Line l;
    const Eigen::Vector2d ab = x.colPivHouseholderQr().solve(y);
    l.a = ab(0);
    l.b = ab(1);
    if (!(l.a > 0.0)) return l;
    l.sse = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double model = std::log(amp * normal_survival(l.a * fit.radii[i] + l.b));
      l.sse += std::pow(wl[i] * (fit.log_survival[i] - std::min(0.0, model)), 2);
    }
    return l;
  };
  double log_amp = fixed_amp ? std::log(*fixed_amp) : 0.0;
  if (!fixed_amp) {
    const double lo = std::log(kMinTailAmplitude), hi = std::log(kMaxTailAmplitude);
    constexpr int kGrid = 24;
    int best = 0;
    std::vector<double> grid_sse(kGrid + 1);
    for (int g = 0; g <= kGrid; ++g) {
      grid_sse[static_cast<std::size_t>(g)] = line_for(std::exp(lo + (hi - lo) * g / kGrid)).sse;
      if (grid_sse[static_cast<std::size_t>(g)] < grid_sse[static_cast<std::size_t>(best)]) best = g;
    }
    // Golden-section refinement on the bracketing grid cells.
    double u = lo + (hi - lo) * std::max(best - 1, 0) / kGrid, v = lo + (hi - lo) * std::min(best + 1, kGrid) / kGrid;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = v - phi * (v - u), d = u + phi * (v - u);
    double fc = line_for(std::exp(c)).sse, fd = line_for(std::exp(d)).sse;
    for (int it = 0; it < 40; ++it) {
      if (fc <= fd) {
        v = d, d = c, fd = fc;
        c = v - phi * (v - u);
        fc = line_for(std::exp(c)).sse;
      } else {
        u = c, c = d, fc = fd;
        d = u + phi * (v - u);
        fd = line_for(std::exp(d)).sse;
      }
    }
    log_amp = 0.5 * (u + v);
    if (!(line_for(std::exp(log_amp)).sse <= grid_sse[static_cast<std::size_t>(best)])) log_amp = lo + (hi - lo) * best / kGrid;
  }
  const Line l = line_for(std::exp(log_amp));
  if (!(l.a > 0.0) || !std::isfinite(l.sse)) {
    fit.sigma2 = 0.0;
    return;
  }
  fit.amplitude = std::exp(log_amp);
  fit.sigma2 = 1.0 / (l.a * l.a);
  fit.r1 = -l.b / l.a;

  const double lbar = std::accumulate(fit.log_survival.begin(), fit.log_survival.end(), 0.0) / static_cast<double>(m);
  const double rbar = std::accumulate(fit.radii.begin(), fit.radii.end(), 0.0) / static_cast<double>(m);
  double ss_res = 0.0, ss_tot = 0.0, rvar = 0.0;
  Eigen::VectorXd resid(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    resid(k) = fit.log_survival[i] - fit.fitted_log_survival(fit.radii[i]);
    ss_res += resid(k) * resid(k);
    ss_tot += (fit.log_survival[i] - lbar) * (fit.log_survival[i] - lbar);
    rvar += (fit.radii[i] - rbar) * (fit.radii[i] - rbar);
  }
  fit.r2 = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 0.0;

  // Weighted quadratic trend of the log S residuals; curvature is its second derivative.
  const double rsd = std::sqrt(rvar / static_cast<double>(m));
  Eigen::MatrixXd q(static_cast<Eigen::Index>(m), 3);
  for (std::size_t i = 0; i < m; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double t = (fit.radii[i] - rbar) / rsd;
    q.row(k) << wl[i], wl[i] * t, wl[i] * t * t;
  }
  const Eigen::Vector3d beta = q.colPivHouseholderQr().solve(Eigen::Map<const Eigen::VectorXd>(wl.data(), static_cast<Eigen::Index>(m)).cwiseProduct(resid));
  fit.curvature = 2.0 * beta(2) / (rsd * rsd);
}

constexpr std::size_t kBootstrapReps = 200;

}  // namespace

TailFit tail_fit(std::vector<double> samples, double quantile_lo, std::optional<double> amplitude) {
  require(quantile_lo > 0.5 - 1e-12 && quantile_lo < 0.99, "tail_fit: quantile_lo must lie in [0.5, 0.99)");
  require(!amplitude || (*amplitude >= 1.0 && std::isfinite(*amplitude)), "tail_fit: amplitude must be finite and >= 1");
  if (samples.size() < kMinTailSamples)
    throw RefusalError("tail_fit: need at least " + std::to_string(kMinTailSamples) + " samples, got " +
                       std::to_string(samples.size()));
  for (double s : samples) require(std::isfinite(s), "tail_fit: samples must be finite");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());

  TailFit fit;
  fit_sorted(sorted, quantile_lo, amplitude, fit);
  if (fit.n_tail < kMinTailPoints) {
    fit.verdict = TailVerdict::Bounded;
    return fit;
  }
  if (fit.sigma2 <= 0.0) {
    fit.verdict = TailVerdict::Heavy;
    return fit;
  }

  // Bootstrap standard error of the curvature; the resampling stream is fixed
  // so the fit is a pure function of the samples.
  SeededRng rng(0x7a11f17ULL, samples.size());
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  std::vector<double> curv;
  std::vector<double> resampled(samples.size());
  for (std::size_t rep = 0; rep < kBootstrapReps; ++rep) {
    for (auto& v : resampled) v = samples[pick(rng.engine())];
    std::sort(resampled.begin(), resampled.end());
    TailFit b;
    fit_sorted(resampled, quantile_lo, amplitude, b);
    if (b.n_tail >= kMinTailPoints && b.sigma2 > 0.0) curv.push_back(b.curvature);
  }
  if (curv.size() >= 2) {
    const double mean = std::accumulate(curv.begin(), curv.end(), 0.0) / static_cast<double>(curv.size());
    double var = 0.0;
    for (double c : curv) var += (c - mean) * (c - mean);
    fit.curvature_se = std::sqrt(var / static_cast<double>(curv.size() - 1));
  }

  if (fit.curvature > 2.0 * fit.curvature_se) fit.verdict = TailVerdict::Heavy;
  else if (fit.curvature < -2.0 * fit.curvature_se) fit.verdict = TailVerdict::Bounded;
  else if (fit.r2 < 0.95) fit.verdict = TailVerdict::Heavy;
  else fit.verdict = TailVerdict::Gaussian;
  return fit;
}

std::string to_string(TailFunctional f) {
  switch (f) {
    case TailFunctional::SupNorm: return "sup";
    case TailFunctional::RunningMax: return "running-max";
    case TailFunctional::PVarNorm: return "pvar";
    case TailFunctional::HomogLiftNorm: return "homog-lift";
  }
  return "?";
}

TailFunctional tail_functional_from_string(const std::string& name) {
  for (auto f : {TailFunctional::SupNorm, TailFunctional::RunningMax, TailFunctional::PVarNorm,
                 TailFunctional::HomogLiftNorm})
    if (to_string(f) == name) return f;
  throw ArgumentError("unknown functional '" + name + "' (sup, running-max, pvar, homog-lift)");
}

double brownian_running_max_survival(double r, double horizon) {
  if (r <= 0.0) return 1.0;
  return 2.0 * normal_survival(r / std::sqrt(horizon));
}

double brownian_sup_abs_survival(double r, double horizon) {
  if (r <= 0.0) return 1.0;
  const double a = r / std::sqrt(horizon);
  double sum = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double term = normal_survival((2.0 * k + 1.0) * a);
    sum += (k % 2 == 0) ? term : -term;
    if (term < 1e-300 || term < 1e-17 * sum) break;
  }
  return std::min(1.0, 4.0 * sum);
}

double evaluate_functional(TailFunctional f, const SampledPath& x, double p) {
  switch (f) {
    case TailFunctional::SupNorm: {
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) s = std::max(s, x.point(k).norm());
      return s;
    }
    case TailFunctional::RunningMax: {
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) s = std::max(s, x.value(k, 0));
      return s;
    }
    case TailFunctional::PVarNorm: return p_variation(x, p);
    case TailFunctional::HomogLiftNorm: return homog_pvar_norm(chen_lift(x), p);
  }
  return 0.0;
}

namespace {

template <class Fn>
std::vector<double> sample_functional(const GaussianSpec& spec, const McOptions& mc, Fn&& fn) {
  require(spec.kind != ProcessKind::FiniteDim, "path-valued process required");
  const GaussianSampler sampler(spec);
  std::vector<double> values(mc.trials);
  parallel_for(mc.trials, mc.threads, [&](std::size_t i) {
    SeededRng rng(mc.seed, i);
    values[i] = fn(sampler.sample_path(rng));
  });
  return values;
}

}  // namespace

FerniqueReport fernique_check(const GaussianSpec& spec, TailFunctional f, double p, const McOptions& mc,
                              double quantile_lo) {
  if (mc.trials < kMinTailSamples) throw RefusalError("fernique_check: need at least 10^4 trials");
  FerniqueReport rep;
  rep.values = sample_functional(spec, mc, [&](const SampledPath& x) { return evaluate_functional(f, x, p); });
  rep.fit = tail_fit(rep.values, quantile_lo);
  const bool scalar_bm = spec.kind == ProcessKind::BrownianMotion && spec.dim == 1;
  if (scalar_bm && (f == TailFunctional::SupNorm || f == TailFunctional::RunningMax)) {
    rep.has_reference = true;
    rep.reference_sigma2 = spec.horizon;
    rep.reference_amplitude = f == TailFunctional::SupNorm ? 4.0 : 2.0;
    rep.anchored_sigma2 = tail_fit(rep.values, quantile_lo, rep.reference_amplitude).sigma2;
    std::vector<double> sorted = rep.values;
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    for (double q : {0.9, 0.99}) {
      const double r = sorted[static_cast<std::size_t>(std::floor(q * n))];
      const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), r);
      const double exact = f == TailFunctional::SupNorm ? brownian_sup_abs_survival(r, spec.horizon)
                                                        : brownian_running_max_survival(r, spec.horizon);
      rep.check_radii.push_back(r);
      rep.log_error.push_back(std::abs(std::log(static_cast<double>(above) / n) - std::log(exact)));
    }
  }
  return rep;
}

N1TailReport n1_tail_experiment(const GaussianSpec& spec, double p, const McOptions& mc, double quantile_lo) {
  require(spec.kind == ProcessKind::BrownianMotion, "n1_tail_experiment: Brownian driver required");
  require(p > 2.0 && p < 3.0, "n1_tail_experiment: p must lie in (2, 3)");
  if (mc.trials < kMinTailSamples) throw RefusalError("n1_tail_experiment: need at least 10^4 trials");
  const GaussianSampler sampler(spec);
  N1TailReport rep;
  rep.counts.resize(mc.trials);
  rep.jittered.resize(mc.trials);
  parallel_for(mc.trials, mc.threads, [&](std::size_t i) {
    SeededRng rng(mc.seed, i);
    rep.counts[i] = static_cast<double>(n_alpha(chen_lift(sampler.sample_path(rng)), 1.0, p));
    rep.jittered[i] = rep.counts[i] + rng.uniform();
  });
  rep.mean = std::accumulate(rep.counts.begin(), rep.counts.end(), 0.0) / static_cast<double>(rep.counts.size());
  rep.fit = tail_fit(rep.jittered, quantile_lo);
  return rep;
}

ConcentrationReport empirical_concentration_experiment(const GaussianSpec& spec, const std::vector<std::size_t>& n_grid,
                                                       const McOptions& mc, std::size_t reference_size) {
  require(spec.kind == ProcessKind::FiniteDim, "empirical_concentration_experiment: finite-dimensional law required");
  require(spec.mean.size() <= 5, "empirical_concentration_experiment: dimension must be at most 5");
  require(!n_grid.empty(), "empirical_concentration_experiment: empty n_grid");
  require(mc.trials >= 2, "empirical_concentration_experiment: need at least two trials");
  require(reference_size >= 1 && reference_size <= kMaxAssignmentSize,
          "empirical_concentration_experiment: bad reference size");
  for (std::size_t n : n_grid) {
    require(n >= 1 && n <= 512, "empirical_concentration_experiment: n must lie in [1, 512]");
    require(reference_size % n == 0, "empirical_concentration_experiment: n = " + std::to_string(n) +
                                         " does not divide the reference size " + std::to_string(reference_size));
  }
  const GaussianSampler sampler(spec);
  SeededRng ref_rng(mc.seed, std::numeric_limits<std::uint64_t>::max());
  std::vector<Vector> reference(reference_size);
  for (auto& v : reference) v = sampler.sample_vector(ref_rng);

  ConcentrationReport rep;
  rep.sigma = std::sqrt(spec.sigma2());
  const GroundCost euclid;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::size_t n = n_grid[gi], copies = reference_size / n;
    std::vector<double> w(mc.trials);
    parallel_for(mc.trials, mc.threads, [&](std::size_t t) {
      SeededRng rng = SeededRng(mc.seed, t).split(gi);
      std::vector<Vector> draw(n);
      for (auto& v : draw) v = sampler.sample_vector(rng);
      Eigen::MatrixXd c(static_cast<Eigen::Index>(reference_size), static_cast<Eigen::Index>(reference_size));
      for (std::size_t i = 0; i < reference_size; ++i)
        for (std::size_t j = 0; j < reference_size; ++j)
          c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = euclid(draw[i / copies], reference[j]);
      w[t] = wasserstein_from_costs(c, 2.0);
    });
    ConcentrationRow row;
    row.n = n;
    row.median = median_of(w);
    row.holds = true;
    const double trials = static_cast<double>(mc.trials);
    for (int step = 0; step <= 6; ++step) {
      const double r = 0.5 + 0.25 * step;
      const double level = row.median + rep.sigma * r / std::sqrt(static_cast<double>(n));
      const auto above = std::count_if(w.begin(), w.end(), [&](double v) { return v > level; });
      const double ph = static_cast<double>(above) / trials;
      const double bound = normal_survival(r) + 3.0 * std::sqrt(ph * (1.0 - ph) / trials);
      row.radii.push_back(r);
      row.exceedance.push_back(ph);
      row.bound.push_back(bound);
      if (ph > bound) row.holds = false;
    }
    rep.rows.push_back(std::move(row));
  }
  // A point mass has W = 0 at every n; otherwise medians must strictly decrease.
  rep.monotone = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (rep.sigma == 0.0) rep.monotone = rep.monotone && rep.rows[i].median == 0.0;
    else if (i > 0 && !(rep.rows[i].median < rep.rows[i - 1].median)) rep.monotone = false;
  }
  rep.holds = rep.monotone;
  for (const auto& row : rep.rows) rep.holds = rep.holds && row.holds;
  return rep;
}

}  // namespace roughlab
