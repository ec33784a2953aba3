#include "helpers.hpp"
#include "roughlab/errors.hpp"
#include "roughlab/gaussian.hpp"
#include "roughlab/transport.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace roughlab;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

VectorMeasure scalars(const std::vector<double>& xs) {
  VectorMeasure m;
  for (double x : xs) m.points.push_back(Vector::Constant(1, x));
  return m;
}

GaussianSpec normal(const Vector& mean, const Eigen::MatrixXd& cov) { return GaussianSpec::finite_dim(mean, cov); }

Eigen::MatrixXd eye(Eigen::Index k) { return Eigen::MatrixXd::Identity(k, k); }

// 1-d W_p: the monotone (sorted) coupling is optimal.
double sorted_wasserstein(std::vector<double> a, std::vector<double> b, double p) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(s / static_cast<double>(a.size()), 1.0 / p);
}

}  // namespace

TEST_CASE("empirical Wasserstein small cases") {
  CHECK(empirical_wasserstein(scalars({0, 1}), scalars({1, 2}), GroundCost::euclidean(), 1.0) == 1.0);
  CHECK(wasserstein_bruteforce(scalars({0, 1}), scalars({1, 2}), GroundCost::euclidean(), 1.0) == 1.0);
  CHECK(empirical_wasserstein(scalars({0.5, -3, 2}), scalars({2, 0.5, -3}), GroundCost::euclidean(), 2.0) == 0.0);
  CHECK(empirical_wasserstein(scalars({1.5}), scalars({-1}), GroundCost::euclidean(), 3.0) ==
        doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(empirical_wasserstein(scalars({1, 2}), scalars({1}), GroundCost::euclidean(), 2.0), ArgumentError);
  CHECK_THROWS_AS(empirical_wasserstein(scalars({1}), scalars({1}), GroundCost::euclidean(), 0.5), ArgumentError);
  CHECK_THROWS_AS(wasserstein_from_costs(Eigen::MatrixXd::Ones(4097, 4097), 2.0), RefusalError);
}

TEST_CASE("one-dimensional Wasserstein equals the sorted coupling") {
  SeededRng rng(61, 0);
  for (std::size_t n : {5, 50, 300}) {
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = 2.0 * rng.uniform();
    for (double p : {1.0, 2.0, 3.0})
      CHECK(empirical_wasserstein(scalars(a), scalars(b), GroundCost::euclidean(), p) ==
            doctest::Approx(sorted_wasserstein(a, b, p)).epsilon(1e-12));
  }
}

TEST_CASE("assignment and brute force agree, including infinite costs") {
  SeededRng rng(62, 0);
  for (int t = 0; t < 200; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + t % 7);
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform() < 0.2 ? kInf : 3.0 * rng.uniform();
    const double a = wasserstein_from_costs(c, 2.0), b = wasserstein_bruteforce_from_costs(c, 2.0);
    if (std::isinf(b)) CHECK(std::isinf(a));
    else CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(4, 4);
  c.row(2).setConstant(kInf);
  CHECK(std::isinf(wasserstein_from_costs(c, 2.0)));
  CHECK(std::isinf(wasserstein_bruteforce_from_costs(c, 2.0)));
  Eigen::MatrixXd neg = Eigen::MatrixXd::Ones(2, 2);
  neg(1, 0) = -1.0;
  CHECK_THROWS_AS(wasserstein_from_costs(neg, 1.0), ArgumentError);
}

TEST_CASE("ground costs on paths") {
  SeededRng rng(63, 0);
  const GaussianSampler bm(GaussianSpec::brownian(1.0, 17, 1));
  const SampledPath x = bm.sample_path(rng), y = bm.sample_path(rng);
  CHECK(GroundCost::sup_distance()(x, y) == sup_distance(x, y));
  CHECK(GroundCost::pvar(2.5)(x, y) == p_variation(x - y, 2.5));
  CHECK(GroundCost::cameron_martin()(x, y) == cm_distance(x, y));
  CHECK(GroundCost::projection(4)(x, y) == projection_metric(x, y, 4));
  CHECK(cost_kind_from_string(to_string(CostKind::PVarDistance)) == CostKind::PVarDistance);
  CHECK_THROWS_AS(cost_kind_from_string("hamming"), ArgumentError);
  CHECK_THROWS_AS(GroundCost::sup_distance()(Vector::Zero(2), Vector::Zero(2)), ArgumentError);
}

TEST_CASE("Gaussian W2 closed form") {
  SeededRng rng(64, 0);
  const Vector m = Vector::Constant(3, 0.4);
  CHECK(gaussian_w2(normal(m, eye(3)), normal(m, eye(3))) <= 1e-12);
  CHECK(gaussian_w2(normal(m, eye(3)), normal(Vector::Zero(3), eye(3))) == doctest::Approx(m.norm()).epsilon(1e-12));
  CHECK(gaussian_w2(normal(Vector::Zero(1), 4.0 * eye(1)), normal(Vector::Zero(1), eye(1))) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Commuting covariances: W2^2 = |m|^2 + sum (sqrt a_i - sqrt b_i)^2.
  for (int t = 0; t < 20; ++t) {
    Vector a(4), b(4), mu(4);
    for (int i = 0; i < 4; ++i) a(i) = 0.1 + rng.uniform(), b(i) = 0.1 + rng.uniform(), mu(i) = rng.normal();
    const double oracle = std::sqrt(mu.squaredNorm() + (a.cwiseSqrt() - b.cwiseSqrt()).squaredNorm());
    CHECK(gaussian_w2(normal(mu, a.asDiagonal()), normal(Vector::Zero(4), b.asDiagonal())) ==
          doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("Gaussian relative entropy") {
  const Vector m = (Vector(3) << 0.5, -1.0, 0.25).finished();
  CHECK(gaussian_kl(normal(m, eye(3)), normal(m, eye(3))).value <= 1e-14);

  // Monte Carlo average of the log-density ratio.
  SeededRng rng(65, 0);
  const GaussianSampler nu(normal(m, eye(3)));
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector x = nu.sample_vector(rng);
    const double l = 0.5 * x.squaredNorm() - 0.5 * (x - m).squaredNorm();
    s += l;
    s2 += l * l;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  const double kl = gaussian_kl(normal(m, eye(3)), normal(Vector::Zero(3), eye(3))).value;
  CHECK(kl == doctest::Approx(0.5 * m.squaredNorm()).epsilon(1e-12));
  CHECK(std::abs(mean - kl) <= 3.0 * se);

  // Quadrature of p log(p / q) for 1-d normals.
  for (double var : {0.25, 2.0, 5.0}) {
    const double sd = std::sqrt(var), lo = -12.0 * sd, hi = 12.0 * sd;
    const int steps = 20000;
    const double h = (hi - lo) / steps;
    double integral = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double x = lo + i * h;
      const double logp = -0.5 * x * x / var - 0.5 * std::log(2.0 * M_PI * var);
      const double logq = -0.5 * x * x - 0.5 * std::log(2.0 * M_PI);
      const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      integral += w * std::exp(logp) * (logp - logq);
    }
    integral *= h / 3.0;
    CHECK(gaussian_kl(normal(Vector::Zero(1), var * eye(1)), normal(Vector::Zero(1), eye(1))).value ==
          doctest::Approx(integral).epsilon(1e-8));
  }
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_FALSE(gaussian_kl(normal(Vector::Zero(2), eye(2)), normal(Vector::Zero(2), singular)).finite);
}

TEST_CASE("finite-dimensional transport inequality") {
  const Vector zero = Vector::Zero(3);
  const T2Report same = t2_check_finite_dim(normal(zero, eye(3)), normal(zero, eye(3)), 2.0);
  CHECK(same.holds);
  CHECK(same.lhs <= 1e-12);

  SeededRng rng(66, 0);
  for (int k : {1, 2, 5, 20}) {
    for (int t = 0; t < 50; ++t) {
      Vector m(k);
      for (int i = 0; i < k; ++i) m(i) = rng.normal();
      const T2Report r = t2_check_finite_dim(normal(m, eye(k)), normal(Vector::Zero(k), eye(k)), 2.0);
      CHECK(r.lhs == doctest::Approx(m.norm()).epsilon(1e-12));
      CHECK(std::abs(r.lhs * r.lhs - r.rhs * r.rhs) <= 1e-9);
      CHECK(r.holds);
    }
  }
  const T2Report strict = t2_check_finite_dim(normal(zero, 2.0 * eye(3)), normal(zero, eye(3)), 2.0);
  CHECK(strict.holds);
  CHECK(strict.equality_gap > 0.1);

  // Random pairs with non-identity reference covariance.
  for (int t = 0; t < 300; ++t) {
    const int k = 1 + t % 4;
    Eigen::MatrixXd b1(k, k), b2(k, k);
    for (Eigen::Index i = 0; i < b1.size(); ++i) b1.data()[i] = rng.normal(), b2.data()[i] = rng.normal();
    const Eigen::MatrixXd s1 = b1 * b1.transpose() + 0.1 * eye(k), s2 = b2 * b2.transpose() + 0.1 * eye(k);
    Vector m(k);
    for (int i = 0; i < k; ++i) m(i) = rng.normal();
    CHECK(t2_check_finite_dim(normal(m, s1), normal(Vector::Zero(k), s2), 2.0).holds);
  }
  // A constant below 2 fails at shifts.
  CHECK_FALSE(t2_check_finite_dim(normal(Vector::Ones(2), eye(2)), normal(Vector::Zero(2), eye(2)), 1.5).holds);
}

TEST_CASE("path-space shift experiment") {
  const std::size_t n = 65;
  const GaussianSpec bm = GaussianSpec::brownian(1.0, n, 1);
  const SampledPath tent = SampledPath::from_function(uniform_grid(n, 1.0), 1, [](double t) {
    return Vector::Constant(1, t < 0.5 ? t : 1.0 - t);
  });
  const McOptions mc{3, 50, 1};
  PathFlow identity;
  const auto r0 = t2_shift_experiment_path(bm, tent.scaled(0.0), identity, 2.5, 0.1, mc);
  CHECK(r0.lhs == 0.0);
  CHECK(r0.implied_c == 0.0);
  const auto r1 = t2_shift_experiment_path(bm, tent, identity, 2.5, 0.1, mc);
  CHECK(r1.lhs == doctest::Approx(p_variation(tent, 2.5)).epsilon(1e-12));
  CHECK(r1.entropy == doctest::Approx(0.5).epsilon(1e-12));

  PathFlow contractive;
  contractive.kind = PathFlow::Kind::Additive;
  contractive.fields = VectorFieldSpec::contractive_1d(-1.0);
  contractive.xi = Vector::Zero(1);
  const ShiftSweep sweep = t2_shift_scale_sweep(bm, tent, contractive, 2.5, 0.1, {0.25, 1.0, 4.0}, mc);
  for (const auto& r : sweep.reports) CHECK(std::isfinite(r.implied_c));
  CHECK(sweep.spread <= 4.0);
  CHECK_THROWS_AS(t2_shift_experiment_path(GaussianSpec::bridge(1.0, n, 1), tent, identity, 2.5, 0.1, mc),
                  ArgumentError);
}

TEST_CASE("push-forward bound") {
  const GaussianSpec mu = normal(Vector::Zero(1), eye(1));
  PushforwardOptions opt;
  opt.samples = 400;
  opt.bootstrap = 4;
  opt.map = PushforwardMap::Scale;
  opt.scale = 2.0;
  const double m = 1.5;
  const PushforwardCase r = pushforward_check(mu, normal(Vector::Constant(1, m), eye(1)), opt, 1, 0);
  CHECK(r.rhs == doctest::Approx(2.0 * m).epsilon(1e-12));
  CHECK(r.lhs == doctest::Approx(2.0 * m).epsilon(0.1));
  CHECK(r.se > 0.0);

  opt.map = PushforwardMap::Tanh;
  const GaussianSpec mu2 = normal(Vector::Zero(2), eye(2));
  SeededRng rng(67, 0);
  for (int t = 0; t < 20; ++t) CHECK(pushforward_check(mu2, perturb_gaussian(mu2, rng), opt, 2, t).holds);
  opt.map = PushforwardMap::Identity;
  CHECK(pushforward_lipschitz(opt) == 1.0);
  CHECK(pushforward_check(mu2, perturb_gaussian(mu2, rng), opt, 3, 0).holds);
}

TEST_CASE("Wasserstein metric axioms") {
  SeededRng rng(68, 0);
  std::vector<Vector> same(30, Vector::Constant(2, 0.7));
  const auto z = metric_axioms_check(same, GroundCost::euclidean(), 2.0);
  CHECK(z.d12 == 0.0);
  CHECK(z.d13 == 0.0);
  CHECK(z.holds);
  for (int t = 0; t < 20; ++t) {
    std::vector<Vector> pts(150);
    for (auto& v : pts) v = Vector::NullaryExpr(2, [&](Eigen::Index) { return rng.normal(); });
    const auto r = metric_axioms_check(pts, GroundCost::euclidean(), 2.0);
    CHECK(r.holds);
    CHECK(r.symmetry_error == 0.0);
  }
  const GaussianSampler bm(GaussianSpec::brownian(1.0, 33, 1));
  for (const GroundCost& c : {GroundCost::pvar(2.5), GroundCost::sup_distance(), GroundCost::cameron_martin(),
                              GroundCost::projection(8)}) {
    std::vector<SampledPath> paths;
    for (int i = 0; i < 60; ++i) paths.push_back(bm.sample_path(rng));
    CHECK(metric_axioms_check(paths, c, 2.0).holds);
  }
}
