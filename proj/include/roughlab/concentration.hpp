#pragma once

#include "roughlab/gaussian.hpp"
#include "roughlab/transport.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace roughlab {

enum class TailVerdict { Gaussian, Bounded, Heavy };

std::string to_string(TailVerdict v);

/// Fit of P(X > r) = A Phibar((r - r1) / sigma) on the upper tail, so that
/// log P(X > r) = -(r - r1)^2 / (2 sigma2) - log(r - r1) + O(1). The family
/// holds N(0, s2) (A = 1), |N(0, s2)| and the Brownian running maximum (A = 2)
/// exactly, and sup |B| up to a small correction (A = 4).
struct TailFit {
  double sigma2 = 0.0;
  double r1 = 0.0;
  double amplitude = 1.0;      // A, within [kMinTailAmplitude, kMaxTailAmplitude]
  double r2 = 0.0;             // R^2 in log-survival space
  std::size_t n_tail = 0;      // distinct tail radii used
  double curvature = 0.0;      // quadratic coefficient of the residual trend in r
  double curvature_se = 0.0;
  TailVerdict verdict = TailVerdict::Bounded;
  std::vector<double> radii;
  std::vector<double> log_survival;

  /// Gaussian or lighter: the fit is good and no convex residual trend.
  bool gaussian_tailed() const { return verdict != TailVerdict::Heavy; }
  double fitted_log_survival(double r) const;
};

inline constexpr std::size_t kMinTailSamples = 10000;
inline constexpr std::size_t kMinTailPoints = 10;
/// Bounding A keeps the family away from exponential tails: with A <= 16 the
/// median sits at most Phibar^{-1}(1/32) ~ 1.86 sigma into the Gaussian tail.
inline constexpr double kMinTailAmplitude = 1.0;
inline constexpr double kMaxTailAmplitude = 4.0;

/// Tail radii are the sample quantiles at 32 survival levels spaced
/// geometrically from 1 - quantile_lo down to 30 / N; ties are merged.
/// For fixed A, Phibar^{-1}(S / A) is regressed linearly on r with
/// inverse-variance weights, so sigma2 = 1 / a^2 and r1 = -b / a; A minimises
/// the weighted log S misfit. The residual trend is the
/// weighted quadratic coefficient of log S - fit, with a bootstrap standard
/// error. Verdict:
///   Heavy    if R^2 < 0.95, the slope is not positive, or the residuals
///            log S - fit have a convex trend beyond 2 standard errors;
///   Bounded  if fewer than kMinTailPoints distinct radii carry positive
///            survival, or the residual trend is concave beyond 2 standard errors;
///   Gaussian otherwise.
/// A fixed `amplitude` skips the search over A.
TailFit tail_fit(std::vector<double> samples, double quantile_lo = 0.5, std::optional<double> amplitude = {});

enum class TailFunctional { SupNorm, RunningMax, PVarNorm, HomogLiftNorm };

std::string to_string(TailFunctional f);
TailFunctional tail_functional_from_string(const std::string& name);

struct FerniqueReport {
  TailFit fit;
  std::vector<double> values;       // functional per trial
  double reference_sigma2 = 0.0;    // horizon, for Brownian sup functionals
  double reference_amplitude = 0.0; // 2 for the running maximum, 4 for sup |B|
  double anchored_sigma2 = 0.0;     // sigma2 fitted with A fixed to reference_amplitude
  std::vector<double> check_radii;  // empirical 0.9 and 0.99 quantiles
  std::vector<double> log_error;    // |log P_hat - log P_exact| at check_radii
  bool has_reference = false;
};

/// Exact tails of Brownian motion on [0, T]:
/// P(max B > r) = 2 Phi_bar(r / sqrt T), and P(max |B| > r) from the
/// alternating series of the two-sided exit time.
double brownian_running_max_survival(double r, double horizon);
double brownian_sup_abs_survival(double r, double horizon);

double evaluate_functional(TailFunctional f, const SampledPath& x, double p);

FerniqueReport fernique_check(const GaussianSpec& spec, TailFunctional f, double p, const McOptions& mc,
                              double quantile_lo = 0.5);

struct N1TailReport {
  TailFit fit;
  std::vector<double> counts;
  std::vector<double> jittered;  // counts + U[0, 1), the fitted sample
  double mean = 0.0;
};

/// Counts are integers, so the fit runs on counts plus an independent uniform
/// [0, 1) jitter per trial; the jittered law has Gaussian tails exactly when
/// the counts do.
N1TailReport n1_tail_experiment(const GaussianSpec& spec, double p, const McOptions& mc, double quantile_lo = 0.5);

struct ConcentrationRow {
  std::size_t n = 0;
  double median = 0.0;
  std::vector<double> radii;       // r values of the exceedance curve
  std::vector<double> exceedance;  // P_hat(W > m_n + sigma r / sqrt n)
  std::vector<double> bound;       // Phi_bar(r) + 3 SE
  bool holds = false;
};

struct ConcentrationReport {
  std::vector<ConcentrationRow> rows;
  double sigma = 0.0;
  bool monotone = false;  // medians strictly decrease along n_grid
  bool holds = false;
};

/// W_2(L_n, gamma) is approximated by W_2 against a fixed reference sample of
/// gamma of size reference_size; L_n is replicated so both sides have equal
/// weight vectors, which requires n to divide reference_size.
ConcentrationReport empirical_concentration_experiment(const GaussianSpec& spec, const std::vector<std::size_t>& n_grid,
                                                       const McOptions& mc, std::size_t reference_size = 512);

double normal_survival(double r);
/// r with normal_survival(r) = s, for s in (0, 1).
double inverse_normal_survival(double s);

}  // namespace roughlab
