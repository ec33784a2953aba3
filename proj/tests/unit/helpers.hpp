#pragma once

#include "roughlab/paths.hpp"
#include "roughlab/rng.hpp"

#include <cmath>
#include <vector>

namespace testing {

using roughlab::Matrix;
using roughlab::SampledPath;
using roughlab::SeededRng;

inline SampledPath scalar_path(const std::vector<double>& v, double horizon = 1.0) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
  return SampledPath::on_uniform_grid(horizon, m);
}

inline SampledPath random_walk(std::size_t n, std::size_t d, SeededRng& rng, double step = 1.0) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  m.row(0).setZero();
  for (Eigen::Index i = 1; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = m(i - 1, k) + step * rng.normal();
  return SampledPath::on_uniform_grid(1.0, m);
}

inline SampledPath smooth_path(std::size_t n, std::size_t d, SeededRng& rng, double scale) {
  std::vector<double> a(4 * d);
  for (auto& x : a) x = rng.normal();
  return SampledPath::from_function(roughlab::uniform_grid(n, 1.0), d, [&](double t) -> roughlab::Vector {
    roughlab::Vector v(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      double s = a[4 * k] * t;
      for (int j = 1; j < 4; ++j) s += a[4 * k + j] * std::sin(j * M_PI * t) / j;
      v(static_cast<Eigen::Index>(k)) = scale * s;
    }
    return v;
  });
}

}  // namespace testing
