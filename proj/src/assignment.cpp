#include "roughlab/assignment.hpp"

#include "roughlab/errors.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace roughlab {

double ordered_total(const Eigen::MatrixXd& cost, const std::vector<std::size_t>& row_to_col) {
  std::vector<double> matched(row_to_col.size());
  for (std::size_t i = 0; i < row_to_col.size(); ++i)
    matched[i] = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(row_to_col[i]));
  std::sort(matched.begin(), matched.end());
  double total = 0.0;
  for (double c : matched) total += c;
  return total;
}

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  detail::require(cost.rows() == cost.cols(), "solve_assignment: cost matrix must be square");
  detail::require(cost.allFinite(), "solve_assignment: costs must be finite");
  const std::size_t n = static_cast<std::size_t>(cost.rows());
  Assignment out;
  if (n == 0) return out;

  // Rows are inserted one at a time. Each insertion is a Dijkstra search over
  // columns on reduced costs c(i,j) - u(i) - v(j) >= 0, preferring free
  // columns on ties, followed by a dual update and augmentation.
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c = cost;
  std::vector<double> u(n, 0.0), v(n, 0.0), shortest(n);
  std::vector<std::size_t> row4col(n, none), col4row(n, none), path(n), remaining(n), rows_seen, cols_seen;

  // Column reduction; each column's minimum row is matched when still free.
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < n; ++r)
      if (c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) <
          c(static_cast<Eigen::Index>(best), static_cast<Eigen::Index>(j)))
        best = r;
    v[j] = c(static_cast<Eigen::Index>(best), static_cast<Eigen::Index>(j));
    if (col4row[best] == none) {
      col4row[best] = j;
      row4col[j] = best;
    }
  }

  for (std::size_t cur = 0; cur < n; ++cur) {
    if (col4row[cur] != none) continue;
    std::fill(shortest.begin(), shortest.end(), inf);
    std::iota(remaining.begin(), remaining.end(), 0);
    std::size_t num_remaining = n;
    rows_seen.clear();
    cols_seen.clear();
    double min_val = 0.0;
    std::size_t i = cur, sink = none;
    while (sink == none) {
      rows_seen.push_back(i);
      const double* ci = c.data() + i * n;
      const double base = min_val - u[i];
      double lowest = inf;
      std::size_t index = none;
      for (std::size_t k = 0; k < num_remaining; ++k) {
        const std::size_t j = remaining[k];
        const double r = base + ci[j] - v[j];
        if (r < shortest[j]) {
          path[j] = i;
          shortest[j] = r;
        }
        if (shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == none)) {
          lowest = shortest[j];
          index = k;
        }
      }
      if (index == none) throw NumericalError("solve_assignment: no augmenting path");
      min_val = lowest;
      const std::size_t j = remaining[index];
      if (row4col[j] == none) sink = j;
      else i = row4col[j];
      cols_seen.push_back(j);
      remaining[index] = remaining[--num_remaining];
    }
    u[cur] += min_val;
    for (std::size_t r : rows_seen)
      if (r != cur) u[r] += min_val - shortest[col4row[r]];
    for (std::size_t j : cols_seen) v[j] -= min_val - shortest[j];
    for (std::size_t j = sink;;) {
      const std::size_t r = path[j];
      row4col[j] = r;
      std::swap(col4row[r], j);
      if (r == cur) break;
    }
  }
  out.row_to_col = col4row;
  out.cost = ordered_total(cost, out.row_to_col);
  return out;
}

Assignment solve_assignment_bruteforce(const Eigen::MatrixXd& cost) {
  detail::require(cost.rows() == cost.cols(), "solve_assignment_bruteforce: cost matrix must be square");
  const std::size_t n = static_cast<std::size_t>(cost.rows());
  if (n > 8)
    throw RefusalError("solve_assignment_bruteforce: n = " + std::to_string(n) + " exceeds the limit of 8");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Assignment best;
  best.cost = std::numeric_limits<double>::infinity();
  if (n == 0) {
    best.cost = 0.0;
    return best;
  }
  do {
    const double total = ordered_total(cost, perm);
    if (total < best.cost) {
      best.cost = total;
      best.row_to_col = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace roughlab
