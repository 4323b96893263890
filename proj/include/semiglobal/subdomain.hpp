#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "semiglobal/grid.hpp"
#include "semiglobal/mapping.hpp"

namespace semiglobal {

/** One mapped subdomain: physical collocation nodes plus derivative matrices
 *  of orders 1..K in the physical coordinate.
 *
 *  Nodes are sorted ascending regardless of the mapping orientation, with the
 *  matrices permuted consistently, so assembly code never depends on the
 *  reference-grid direction. phys_diff[k-1] = (phys_diff[0])^k.
 */
struct Subdomain {
  Mapping mapping;
  Grid grid;
  Eigen::VectorXd phys_nodes;
  std::vector<Eigen::MatrixXd> phys_diff;

  int n() const { return static_cast<int>(phys_nodes.size()); }
  int max_order() const { return static_cast<int>(phys_diff.size()); }

  const Eigen::MatrixXd& d(int order) const {
    if (order < 1 || order > max_order())
      throw std::invalid_argument("Subdomain: derivative order " + std::to_string(order) +
                                  " not built");
    return phys_diff[static_cast<size_t>(order - 1)];
  }

  double lo() const { return phys_nodes[0]; }
  double hi() const { return phys_nodes[phys_nodes.size() - 1]; }
};

inline Subdomain make_subdomain(const Mapping& m, int n_points, int max_order) {
  Subdomain s;
  s.mapping = m;
  s.grid = cheb_grid(n_points, max_order);

  const int n = n_points;
  Eigen::VectorXd phys(n), met(n);
  for (int i = 0; i < n; ++i) {
    phys[i] = m.forward(s.grid.nodes[i]);
    met[i] = m.metric(s.grid.nodes[i]);
  }
  const double span = std::abs(phys[n - 1] - phys[0]);
  for (int i = 0; i < n; ++i)
    if (std::abs(met[i]) < 1e-14 * std::max(1.0, span))
      throw std::invalid_argument("make_subdomain: mapping metric vanishes on a collocation node");

  // chain rule: d/dy = (dx/dy) d/dx, applied row-wise
  Eigen::MatrixXd d1 = met.cwiseInverse().asDiagonal() * s.grid.d(1);

  // permute to ascending physical order
  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&phys](int p, int q) { return phys[p] < phys[q]; });

  s.phys_nodes.resize(n);
  Eigen::MatrixXd d1s(n, n);
  for (int i = 0; i < n; ++i) {
    s.phys_nodes[i] = phys[idx[static_cast<size_t>(i)]];
    for (int j = 0; j < n; ++j)
      d1s(i, j) = d1(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  for (int i = 1; i < n; ++i)
    if (!(s.phys_nodes[i] > s.phys_nodes[i - 1]))
      throw std::invalid_argument("make_subdomain: physical nodes not strictly monotone");

  s.phys_diff.reserve(static_cast<size_t>(max_order));
  s.phys_diff.push_back(d1s);
  for (int k = 2; k <= max_order; ++k) s.phys_diff.push_back(s.phys_diff.back() * d1s);
  return s;
}

}  // namespace semiglobal
