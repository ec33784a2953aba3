#include "helpers.hpp"
#include "roughlab/errors.hpp"
#include "roughlab/paths.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "roughlab/csv.hpp"

using namespace roughlab;
using testing::random_walk;
using testing::scalar_path;

namespace {

// Independent oracle: every subset of interior points via a bitmask.
double pvar_subsets(const SampledPath& x, double p) {
  const std::size_t n = x.size();
  const std::size_t inner = n - 2;
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << inner); ++mask) {
    std::size_t prev = 0;
    double sum = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      if (k < n - 1 && !(mask >> (k - 1) & 1)) continue;
      sum += std::pow((x.point(k) - x.point(prev)).norm(), p);
      prev = k;
    }
    best = std::max(best, sum);
  }
  return std::pow(best, 1.0 / p);
}

}  // namespace

TEST_CASE("p-variation of small scalar paths") {
  CHECK(p_variation(scalar_path({0, 0.5, 1.0}), 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p_variation(scalar_path({0, 1, 0}), 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(p_variation(scalar_path({0, 1, 0}), 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(p_variation_bruteforce(scalar_path({0, 1, 0}), 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(p_variation(scalar_path({0.3, -1.2}), 2.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(p_variation(scalar_path({1, 1, 1, 1}), 2.0) == 0.0);
}

TEST_CASE("p-variation dynamic program matches subset enumeration") {
  SeededRng rng(11, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 11);
    const std::size_t d = 1 + trial % 3;
    const double p = 1.0 + 0.5 * (trial % 5);
    const SampledPath x = random_walk(n, d, rng);
    const double oracle = pvar_subsets(x, p);
    CHECK(std::abs(p_variation(x, p) - oracle) <= 1e-12 * std::max(1.0, oracle));
    CHECK(std::abs(p_variation_bruteforce(x, p) - oracle) <= 1e-12 * std::max(1.0, oracle));
  }
}

TEST_CASE("p-variation properties") {
  SeededRng rng(12, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const SampledPath x = random_walk(40, 2, rng), y = random_walk(40, 2, rng);
    for (double p : {1.0, 2.0, 3.0}) {
      const double v = p_variation(x, p);
      // Dominates the endpoint increment and every single increment.
      CHECK(v + 1e-12 >= (x.point(39) - x.point(0)).norm());
      // Seminorm: scaling and the triangle inequality.
      CHECK(p_variation(x.scaled(-3.0), p) == doctest::Approx(3.0 * v).epsilon(1e-12));
      CHECK(p_variation(x + y, p) <= v + p_variation(y, p) + 1e-12);
      // Sub-intervals carry less variation.
      CHECK(p_variation(x, p, {5, 30}) <= v + 1e-12);
      // Nonincreasing in p.
      CHECK(p_variation(x, p + 0.5) <= v + 1e-12);
    }
    const Partition part = p_variation_partition(x, 2.0, full_interval(x));
    double sum = 0.0;
    for (std::size_t k = 1; k < part.indices.size(); ++k)
      sum += std::pow((x.point(part.indices[k]) - x.point(part.indices[k - 1])).norm(), 2.0);
    CHECK(std::sqrt(sum) == doctest::Approx(p_variation(x, 2.0)).epsilon(1e-12));
    CHECK(part.indices.front() == 0);
    CHECK(part.indices.back() == 39);
  }
}

TEST_CASE("p-variation rejects bad input") {
  CHECK_THROWS_AS(p_variation(scalar_path({0, 1}), 0.5), ArgumentError);
  CHECK_THROWS_AS(p_variation(scalar_path({0, 1, 2}), 2.0, {2, 1}), ArgumentError);
  SeededRng rng(1, 0);
  CHECK_THROWS_AS(p_variation_bruteforce(random_walk(17, 1, rng), 2.0), RefusalError);
  CHECK_NOTHROW(p_variation_bruteforce(random_walk(16, 1, rng), 2.0));
}

TEST_CASE("single segment has variation |dx|") {
  SeededRng rng(3, 0);
  const SampledPath x = random_walk(2, 3, rng);
  CHECK(p_variation_bruteforce(x, 2.7) == doctest::Approx((x.point(1) - x.point(0)).norm()).epsilon(1e-15));
}

TEST_CASE("sup distance") {
  SeededRng rng(4, 0);
  const SampledPath x = random_walk(30, 2, rng);
  CHECK(sup_distance(x, x) == 0.0);
  Matrix c(30, 2);
  c.col(0).setConstant(0.6);
  c.col(1).setConstant(-0.8);
  CHECK(sup_distance(x, x + SampledPath::on_uniform_grid(1.0, c)) == doctest::Approx(1.0).epsilon(1e-14));
  for (int t = 0; t < 50; ++t) {
    const SampledPath a = random_walk(30, 2, rng), b = random_walk(30, 2, rng);
    CHECK(sup_distance(a, b) <= p_variation(a - b, 2.0) + 1e-12);
  }
  CHECK_THROWS_AS(sup_distance(x, random_walk(31, 2, rng)), ArgumentError);
}

namespace {

// Gagliardo double integral for a smooth scalar h, as 2 int_0^1 u^{-1-dp} int_0^{1-u} |h(s+u)-h(s)|^p ds du
// with u = w^k chosen so the integrand is smooth at w = 0; composite Simpson in both variables.
template <class F>
double gagliardo_oracle(F h, double delta, double p) {
  const double k = 1.0 / (p - delta * p);  // u^{p - 1 - dp} du ~ w^{k(p - dp) - 1} dw = dw
  const int m = 2000;
  auto inner = [&](double u) {
    const int q = 400;
    const double len = 1.0 - u, step = len / q;
    double sum = 0.0;
    for (int i = 0; i <= q; ++i) {
      const double s = i * step, w = (i == 0 || i == q) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      sum += w * std::pow(std::abs(h(s + u) - h(s)), p);
    }
    return sum * step / 3.0;
  };
  double total = 0.0;
  const double step = 1.0 / m;
  for (int i = 1; i <= m; ++i) {
    const double w = i * step, u = std::pow(w, k);
    const double jac = k * std::pow(w, k - 1.0);
    const double f = inner(u) * std::pow(u, -1.0 - delta * p) * jac;
    total += (i == m ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f;
  }
  return 2.0 * total * step / 3.0;
}

}  // namespace

TEST_CASE("Sobolev norms") {
  const SampledPath line = SampledPath::from_function(uniform_grid(512, 1.0), 1, [](double t) {
    return Vector::Constant(1, t);
  });
  CHECK(sobolev_norm(line, {1.0, 2.0}) == doctest::Approx(std::sqrt(1.0 / 3.0) + 1.0).epsilon(1e-12));
  // h(t) = t, delta = 0.8, p = 2: int int |t - s|^{-0.6} = 2 / (0.4 * 1.4).
  const double closed = std::sqrt(2.0 / (0.4 * 1.4));
  CHECK(sobolev_seminorm(line, {0.8, 2.0}) == doctest::Approx(closed).epsilon(0.01));
  CHECK(sobolev_seminorm(line, {0.8, 2.0}) == doctest::Approx(closed).epsilon(1e-9));

  const SampledPath c = scalar_path(std::vector<double>(33, -0.7));
  CHECK(sobolev_norm(c, {0.6, 3.0}) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(sobolev_seminorm(c, {0.6, 3.0}) == 0.0);

  auto h = [](double t) { return std::sin(M_PI * t) + 0.5 * t * t; };
  const SampledPath hs = SampledPath::from_function(uniform_grid(512, 1.0), 1, [&](double t) {
    return Vector::Constant(1, h(t));
  });
  for (auto [delta, p] : {std::pair{0.8, 2.0}, std::pair{0.75, 3.0}, std::pair{0.6, 2.5}}) {
    const double oracle = std::pow(gagliardo_oracle(h, delta, p), 1.0 / p);
    CHECK(sobolev_seminorm(hs, {delta, p}) == doctest::Approx(oracle).epsilon(0.01));
  }
  CHECK_THROWS_AS(sobolev_norm(line, {0.0, 2.0}), ArgumentError);
  CHECK_THROWS_AS(sobolev_norm(line, {0.5, 1.0}), ArgumentError);
}

TEST_CASE("control and greedy counts") {
  SeededRng rng(5, 0);
  const SampledPath x = random_walk(20, 2, rng);
  CHECK(control_eval(x, 2.5, 7, 7) == 0.0);
  const SampledPath mono = scalar_path({0, 0.2, 0.5, 0.9, 1.4});
  CHECK(control_eval(mono, 2.0, 1, 4) == doctest::Approx(std::pow(1.2, 2.0)).epsilon(1e-14));
  // Superadditivity of the control.
  for (std::size_t s = 0; s < 20; s += 3)
    for (std::size_t t = s; t < 20; t += 2)
      for (std::size_t u = t; u < 20; u += 5)
        CHECK(control_eval(x, 2.5, s, t) + control_eval(x, 2.5, t, u) <= control_eval(x, 2.5, s, u) + 1e-12);

  // Linear 0 -> 2 on [0, 1], p = 2: omega(s, t) = 4 (t - s)^2, alpha = 1 gives tau_1 = 0.5, tau_2 = 1.
  const SampledPath lin = SampledPath::from_function(uniform_grid(9, 1.0), 1, [](double t) {
    return Vector::Constant(1, 2.0 * t);
  });
  auto omega = [&](std::size_t s, std::size_t t) { return control_eval(lin, 2.0, s, t); };
  CHECK(omega(0, 4) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(greedy_count(0, 8, 1.0, omega) == 1);
  CHECK(greedy_count(0, 8, 4.0 + 1e-9, omega) == 0);
  const SampledPath flat = scalar_path(std::vector<double>(9, 1.0));
  CHECK(greedy_count(0, 8, 1e-6, [&](std::size_t s, std::size_t t) { return control_eval(flat, 2.0, s, t); }) == 0);
  CHECK_THROWS_AS(greedy_count(0, 8, 0.0, omega), ArgumentError);
}

TEST_CASE("path construction and csv round trip") {
  CHECK_THROWS_AS(SampledPath({0.0, 0.0}, Matrix::Zero(2, 1)), ArgumentError);
  CHECK_THROWS_AS(SampledPath({0.0, 1.0}, Matrix::Zero(3, 1)), ArgumentError);
  Matrix bad = Matrix::Zero(2, 1);
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(SampledPath({0.0, 1.0}, bad), ArgumentError);

  SeededRng rng(6, 0);
  const SampledPath x = random_walk(17, 3, rng);
  std::stringstream ss;
  write_path_csv(x, ss);
  const SampledPath y = read_path_csv(ss);
  CHECK(y.times() == x.times());
  CHECK(y.values() == x.values());
  CHECK(x.subsampled(4).size() == 5);
  CHECK_THROWS_AS(x.subsampled(3), ArgumentError);
}
