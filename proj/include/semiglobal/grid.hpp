#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace semiglobal {

/** Chebyshev-Gauss-Lobatto collocation grid on [-1,1].
 *
 *  nodes[j] = cos(j*pi/(n_points-1)), stored descending (nodes[0] = 1,
 *  nodes[n-1] = -1). diff[k-1] is the k-th derivative matrix; diff[0] uses
 *  the c_i(-1)^{i+j} / (c_j (x_i - x_j)) off-diagonal convention with the
 *  negative-sum-trick diagonal, higher orders are matrix powers of diff[0].
 */
struct Grid {
  int n_points = 0;
  Eigen::VectorXd nodes;
  std::vector<Eigen::MatrixXd> diff;

  // order-k derivative matrix, 1-based order
  const Eigen::MatrixXd& d(int order) const {
    if (order < 1 || order > static_cast<int>(diff.size()))
      throw std::invalid_argument("Grid: derivative order " + std::to_string(order) +
                                  " not built (have 1.." + std::to_string(diff.size()) + ")");
    return diff[static_cast<size_t>(order - 1)];
  }
};

inline Grid cheb_grid(int n_points, int max_order) {
  if (n_points < 2)
    throw std::invalid_argument("cheb_grid: need n_points >= 2, got " + std::to_string(n_points));
  if (max_order < 1)
    throw std::invalid_argument("cheb_grid: need max_order >= 1, got " + std::to_string(max_order));
  if (max_order > n_points)
    throw std::invalid_argument("cheb_grid: max_order " + std::to_string(max_order) +
                                " exceeds n_points " + std::to_string(n_points));

  const int n = n_points;
  const int N = n - 1;
  Grid g;
  g.n_points = n;
  g.nodes.resize(n);
  for (int j = 0; j < n; ++j) g.nodes[j] = std::cos(j * M_PI / N);
  // endpoints exactly +-1
  g.nodes[0] = 1.0;
  g.nodes[N] = -1.0;

  Eigen::MatrixXd D(n, n);
  auto c = [N](int i) { return (i == 0 || i == N) ? 2.0 : 1.0; };
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = (c(i) / c(j)) * sign / (g.nodes[i] - g.nodes[j]);
      row_sum += D(i, j);
    }
    D(i, i) = -row_sum;  // rows annihilate constants by construction
  }

  g.diff.reserve(static_cast<size_t>(max_order));
  g.diff.push_back(D);
  for (int k = 2; k <= max_order; ++k) g.diff.push_back(g.diff.back() * D);
  return g;
}

}  // namespace semiglobal
