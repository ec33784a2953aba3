#include "helpers.hpp"
#include "roughlab/errors.hpp"
#include "roughlab/gaussian.hpp"
#include "roughlab/roughlift.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace roughlab;
using testing::random_walk;
using testing::smooth_path;

namespace {

// Iterated integral of a piecewise linear path over grid interval [s, t], summed directly.
Eigen::MatrixXd iterated_integral(const SampledPath& x, std::size_t s, std::size_t t) {
  const Eigen::Index d = static_cast<Eigen::Index>(x.dim());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t k = s; k < t; ++k) {
    const Eigen::RowVectorXd before = x.point(k) - x.point(s);
    const Eigen::RowVectorXd dx = x.point(k + 1) - x.point(k);
    out += before.transpose() * dx + 0.5 * dx.transpose() * dx;
  }
  return out;
}

double max_diff(const RoughPath2& a, const RoughPath2& b) {
  double m = (a.base().values() - b.base().values()).cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i + 1 < a.size(); ++i) m = std::max(m, (a.segment(i) - b.segment(i)).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_CASE("lift of one and two segments") {
  Matrix v(2, 2);
  v << 0, 0, 1, 0;
  const RoughPath2 one = chen_lift(SampledPath::on_uniform_grid(1.0, v));
  Eigen::MatrixXd expect(2, 2);
  expect << 0.5, 0, 0, 0;
  CHECK((one.level2(0, 1) - expect).norm() == 0.0);

  Matrix w(3, 2);
  w << 0, 0, 1, 0, 1, 1;
  const RoughPath2 two = chen_lift(SampledPath::on_uniform_grid(1.0, w));
  const Eigen::MatrixXd x02 = two.level2(0, 2);
  CHECK(x02(0, 0) == 0.5);
  CHECK(x02(1, 1) == 0.5);
  CHECK(x02(0, 1) == 1.0);
  CHECK(x02(1, 0) == 0.0);
}

TEST_CASE("level two equals the direct iterated integral") {
  SeededRng rng(31, 0);
  for (int t = 0; t < 20; ++t) {
    const SampledPath x = random_walk(25, 3, rng, 0.3);
    const RoughPath2 rp = chen_lift(x);
    for (std::size_t s = 0; s < 25; s += 4)
      for (std::size_t u = s; u < 25; u += 3) {
        const Eigen::MatrixXd oracle = iterated_integral(x, s, u);
        CHECK((rp.level2(s, u) - oracle).cwiseAbs().maxCoeff() <= 1e-13);
        Eigen::MatrixXd fast(3, 3);
        rp.level2_fast(s, u, fast.data());
        // level2_fast writes row-major; Eigen default is column-major.
        CHECK((fast.transpose() - oracle).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((rp.increment(s, u).transpose() - (x.point(u) - x.point(s))).norm() <= 1e-15);
      }
  }
}

TEST_CASE("Chen and geometric residuals on lifts and translations") {
  SeededRng rng(32, 0);
  for (int t = 0; t < 50; ++t) {
    const SampledPath x = random_walk(32, 2, rng, 0.18);
    const RoughPath2 rp = chen_lift(x);
    const RoughPath2 tp = translate(rp, smooth_path(32, 2, rng, 1.0));
    for (const RoughPath2* r : {&rp, &tp})
      for (std::size_t s = 0; s < 32; s += 3)
        for (std::size_t m = s; m < 32; m += 2)
          for (std::size_t u = m; u < 32; u += 5) {
            CHECK(chen_residual(*r, s, m, u) <= 1e-13);
            CHECK(geometric_residual(*r, s, u) <= 1e-13);
          }
  }
}

TEST_CASE("translation") {
  SeededRng rng(33, 0);
  const SampledPath x = random_walk(40, 2, rng, 0.2);
  const RoughPath2 rp = chen_lift(x);
  CHECK(max_diff(translate(rp, x.scaled(0.0)), rp) == 0.0);
  for (int t = 0; t < 30; ++t) {
    const SampledPath g = smooth_path(40, 2, rng, 3.0), h = random_walk(40, 2, rng, 0.2);
    CHECK(max_diff(translate(rp, h), chen_lift(x + h)) <= 1e-12);
    CHECK(max_diff(translate(translate(rp, g), h), translate(rp, g + h)) <= 1e-12);
  }
  CHECK_THROWS_AS(translate(rp, random_walk(41, 2, rng)), ArgumentError);
}

TEST_CASE("homogeneous norm and metric") {
  const RoughPath2 flat = chen_lift(SampledPath::on_uniform_grid(1.0, Matrix::Constant(10, 2, 3.0)));
  CHECK(homog_pvar_norm(flat, 2.5) == 0.0);

  // One segment of length a: a from level one, (a^2 / 2)^{1/2} from level two.
  for (double a : {0.3, 1.0, 2.0}) {
    Matrix v(2, 2);
    v << 0, 0, 0.6 * a, 0.8 * a;
    const RoughPath2 seg = chen_lift(SampledPath::on_uniform_grid(1.0, v));
    CHECK(homog_pvar_norm(seg, 2.5) == doctest::Approx(a + a / std::sqrt(2.0)).epsilon(1e-14));
  }

  SeededRng rng(34, 0);
  for (int t = 0; t < 20; ++t) {
    const RoughPath2 a = chen_lift(random_walk(30, 2, rng, 0.2));
    const RoughPath2 b = chen_lift(random_walk(30, 2, rng, 0.2));
    CHECK(rho_pvar(a, a, 2.5) == 0.0);
    CHECK(rho_pvar(a, b, 2.5) == doctest::Approx(rho_pvar(b, a, 2.5)).epsilon(1e-14));
    CHECK(rho_pvar(a, b, 2.5) > 0.0);
    CHECK(homog_pvar_norm(a, 2.5, {3, 20}) <= homog_pvar_norm(a, 2.5) + 1e-12);
    CHECK(homog_pvar_norm(a, 2.9) <= homog_pvar_norm(a, 2.1) + 1e-12);
  }
  CHECK_THROWS_AS(homog_pvar_norm(flat, 3.0), ArgumentError);
  CHECK_THROWS_AS(homog_pvar_norm(flat, 1.9), ArgumentError);
}

TEST_CASE("greedy accumulation count") {
  const RoughPath2 flat = chen_lift(SampledPath::on_uniform_grid(1.0, Matrix::Zero(20, 1)));
  for (double alpha : {1e-6, 1.0, 10.0}) CHECK(n_alpha(flat, alpha, 2.5) == 0);

  const GaussianSampler bm(GaussianSpec::brownian(1.0, 129, 2));
  SeededRng rng(35, 0);
  for (int t = 0; t < 10; ++t) {
    const RoughPath2 rp = chen_lift(bm.sample_path(rng));
    const double total = std::pow(homog_pvar_norm(rp, 2.5), 2.5);
    CHECK(n_alpha(rp, total * (1.0 + 1e-9), 2.5) == 0);
    auto omega = [&](std::size_t s, std::size_t u) { return std::pow(homog_pvar_norm(rp, 2.5, {s, u}), 2.5); };
    for (double alpha : {0.25, 1.0, 4.0}) CHECK(n_alpha(rp, alpha, 2.5) == greedy_count(0, 128, alpha, omega));
    std::size_t prev = n_alpha(rp, 0.1, 2.5);
    for (double alpha : {0.2, 0.5, 1.0, 2.0, 5.0}) {
      const std::size_t c = n_alpha(rp, alpha, 2.5);
      CHECK(c <= prev);
      prev = c;
    }
    // Blocks are disjoint and each carries alpha of a superadditive control.
    CHECK(static_cast<double>(n_alpha(rp, 1.0, 2.5)) <= total);
  }
}

TEST_CASE("shifted count bound") {
  SeededRng rng(36, 0);
  const GaussianSampler bm(GaussianSpec::brownian(1.0, 65, 2));
  for (int t = 0; t < 50; ++t) {
    const RoughPath2 rp = chen_lift(bm.sample_path(rng));
    const SampledPath zero = rp.base().scaled(0.0);
    const ShiftCountReport r0 = n_alpha_shift_bound_check(rp, zero, 2.5, 1.0);
    CHECK(r0.lhs == n_alpha(rp, kShiftCountAlpha, 2.5));
    CHECK(r0.rhs >= 2.0 * static_cast<double>(r0.n1) + 1.0);
    CHECK(r0.holds);
    const ShiftCountReport r = n_alpha_shift_bound_check(rp, smooth_path(65, 2, rng, 2.0), 2.5, 1.0);
    CHECK(r.holds);
  }
  const RoughPath2 flat = chen_lift(SampledPath::on_uniform_grid(1.0, Matrix::Zero(65, 2)));
  for (int t = 0; t < 50; ++t) {
    const SampledPath h = smooth_path(65, 2, rng, 5.0);
    const ShiftCountReport r = n_alpha_shift_bound_check(flat, h, 2.5, 1.0);
    CHECK(static_cast<double>(r.lhs) <= r.h_q);
  }
  CHECK_THROWS_AS(n_alpha_shift_bound_check(flat, flat.base(), 2.5, 2.0), ArgumentError);
}

TEST_CASE("translation ratio is finite and zero for no shift") {
  SeededRng rng(37, 0);
  const RoughPath2 rp = chen_lift(random_walk(33, 2, rng, 0.2));
  CHECK(translation_bound_ratio(rp, rp.base().scaled(0.0), 2.5, 1.0) == 0.0);
  const double r = translation_bound_ratio(rp, smooth_path(33, 2, rng, 1.0), 2.5, 1.0);
  CHECK(std::isfinite(r));
  CHECK(r > 0.0);
  CHECK(translation_control_constant(rp, smooth_path(33, 2, rng, 1.0), 2.5, 1.0) < kShiftCountAlpha);
}

TEST_CASE("rough path csv round trip") {
  SeededRng rng(38, 0);
  const RoughPath2 rp = translate(chen_lift(random_walk(12, 2, rng)), smooth_path(12, 2, rng, 1.0));
  std::stringstream ss;
  write_roughpath_csv(rp, ss);
  const RoughPath2 back = read_roughpath_csv(ss);
  CHECK(max_diff(rp, back) == 0.0);
  CHECK(back.base().times() == rp.base().times());
}
