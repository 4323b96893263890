#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "semiglobal/assemble.hpp"
#include "semiglobal/subdomain.hpp"

namespace semiglobal {

/** Semi-infinite interface geometry truncated at l_max: an algebraically
 *  mapped subdomain on [0, l1] meeting a linear one on [l1, l_max] at a single
 *  shared node. Both sides cluster nodes at the junction, which is where the
 *  layer sits.
 */
inline std::pair<Subdomain, Subdomain> interface_pair(double l1, double l_max, int n_a, int n_b,
                                                      int max_order, double r_c = -1.0) {
  if (!(l_max > l1)) throw std::invalid_argument("interface_pair: need l_max > l1");
  if (r_c <= 0) r_c = l1;
  Subdomain a = make_subdomain(algebraic_map(r_c, l1), n_a, max_order);
  Subdomain b = make_subdomain(linear_map(l1, l_max), n_b, max_order);
  return {std::move(a), std::move(b)};
}

/** Equal-width linear pair over [a, b] shifted so B's first two nodes land
 *  exactly on A's last two: the only geometry with two coincident pairs under
 *  Chebyshev spacing. n_per >= 3 nodes per subdomain.
 */
inline std::pair<Subdomain, Subdomain> double_node_pair(double a, double b, int n_per,
                                                        int max_order) {
  if (n_per < 3) throw std::invalid_argument("double_node_pair: need n_per >= 3");
  if (!(b > a)) throw std::invalid_argument("double_node_pair: need b > a");
  const double pi = 3.14159265358979323846;
  const double c = std::cos(pi / (n_per - 1));
  const double w = 2.0 * (b - a) / (3.0 + c);  // widths equal, shift w(1+c)/2
  const double shift = 0.5 * w * (1.0 + c);
  Subdomain sa = make_subdomain(linear_map(a, a + w), n_per, max_order);
  Subdomain sb = make_subdomain(linear_map(a + shift, b), n_per, max_order);
  return {std::move(sa), std::move(sb)};
}

/** Linear subdomain on [a, a_hi] against a linear one starting exactly on A's
 *  node index n_a-1-shift and running to b. shift >= 1 gives a positive-width
 *  overlap whose left end is a shared node; the overlap then holds shift+1
 *  nodes of A.
 */
inline std::pair<Subdomain, Subdomain> node_anchored_pair(double a, double a_hi, double b, int n_a,
                                                          int n_b, int shift, int max_order) {
  if (!(a < a_hi && a_hi < b)) throw std::invalid_argument("node_anchored_pair: need a < a_hi < b");
  if (shift < 1 || shift > n_a - 2)
    throw std::invalid_argument("node_anchored_pair: shift must be in [1, n_a-2]");
  Subdomain sa = make_subdomain(linear_map(a, a_hi), n_a, max_order);
  const double lo_b = sa.phys_nodes[n_a - 1 - shift];
  Subdomain sb = make_subdomain(linear_map(lo_b, b), n_b, max_order);
  return {std::move(sa), std::move(sb)};
}

/** Linear subdomain plus a rationally mapped one whose first node is pinned to
 *  A's node index n_a-1-shift; the rational map concentrates B's nodes near
 *  that junction and reaches off + 2l/(bp-1) at its far end.
 */
inline std::pair<Subdomain, Subdomain> rational_tail_pair(double a, double a_hi, int n_a, int n_b,
                                                          int shift, double l, double bp,
                                                          int max_order) {
  if (shift < 1 || shift > n_a - 2)
    throw std::invalid_argument("rational_tail_pair: shift must be in [1, n_a-2]");
  Subdomain sa = make_subdomain(linear_map(a, a_hi), n_a, max_order);
  const double off = sa.phys_nodes[n_a - 1 - shift];
  Subdomain sb = make_subdomain(rational_map(l, bp, off), n_b, max_order);
  return {std::move(sa), std::move(sb)};
}

/** Radial grid for the pipe problem: [0, split+half] and [split-half, 1] with
 *  the overlap band centered on the interface radius. half = width*scale.
 */
inline std::pair<Subdomain, Subdomain> radial_pair(double split, double width, double scale,
                                                   int n_a, int n_b, int max_order) {
  const double half = width * scale;
  if (!(split - half > 0.0 && split + half < 1.0))
    throw std::invalid_argument("radial_pair: overlap band must lie strictly inside (0,1)");
  Subdomain sa = make_subdomain(linear_map(0.0, split + half), n_a, max_order);
  Subdomain sb = make_subdomain(linear_map(split - half, 1.0), n_b, max_order);
  return {std::move(sa), std::move(sb)};
}

}  // namespace semiglobal
