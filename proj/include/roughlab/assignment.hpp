#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace roughlab {

struct Assignment {
  std::vector<std::size_t> row_to_col;
  double cost = 0.0;  // sum of matched entries, added in ascending order
};

/// Minimum-cost perfect matching of a square matrix of finite costs by
/// shortest augmenting paths with dual potentials (Hungarian / Jonker-Volgenant
/// family), O(n^3).
Assignment solve_assignment(const Eigen::MatrixXd& cost);

/// Exhaustive search over all n! permutations; n <= 8.
Assignment solve_assignment_bruteforce(const Eigen::MatrixXd& cost);

/// Adds matched entries in ascending order so that the total does not depend
/// on row/column orientation.
double ordered_total(const Eigen::MatrixXd& cost, const std::vector<std::size_t>& row_to_col);

}  // namespace roughlab
