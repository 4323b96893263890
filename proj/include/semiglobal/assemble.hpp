#pragma once

#include <Eigen/Dense>

#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "semiglobal/interpolate.hpp"
#include "semiglobal/subdomain.hpp"

namespace semiglobal {

namespace detail {

// Overlap membership must tolerate endpoints reconstructed through a mapping,
// which can land a few ulp outside the nominal interval.
inline double overlap_slack(double ov_lo, double ov_hi) {
  return 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(ov_lo), std::abs(ov_hi));
}

}  // namespace detail

enum class AssemblyMethod { single, one_point, two_point, pseudo_multi, taylor_multi, multi_interval };

enum class RowSource { domain_a, domain_b, blended };

/** Knobs shared by the assembly algorithms.
 *  coincidence_tol < 0 means "1e-12 times the merged domain length".
 *  taylor_terms is the number of Taylor terms n in a donor row
 *  sum_{k=0}^{n-1} (dy^k/k!) D^(k+1)[anchor row]; donors must expose
 *  derivative orders up to taylor_terms + 1.
 */
struct OverlapSpec {
  double weight_a = 0.5;
  double coincidence_tol = -1.0;
  int taylor_terms = 5;
};

/** Interpolation bookkeeping for one contributing subdomain: its own nodes and
 *  derivative matrices plus the global column owned by each node. Retained so a
 *  solution on the merged grid can be re-read through either subdomain's
 *  polynomial representation (derivative_jump, pointwise evaluation).
 */
struct SourceTrace {
  Eigen::VectorXd nodes;
  std::vector<Eigen::MatrixXd> diff;
  std::vector<int> cols;
};

/** Assembled square derivative operator over the union of subdomains. */
class GlobalOperator {
 public:
  Eigen::VectorXd nodes;  // ascending, coincident points fused
  Eigen::MatrixXd d1;
  std::vector<RowSource> row_provenance;
  AssemblyMethod method = AssemblyMethod::single;
  std::vector<SourceTrace> sources;

  GlobalOperator() : cache_mutex_(std::make_unique<std::mutex>()) {}
  GlobalOperator(GlobalOperator&&) = default;
  GlobalOperator& operator=(GlobalOperator&&) = default;

  int size() const { return static_cast<int>(nodes.size()); }

  /** d1^k, cached. Thread-safe: sweeps may share one operator. */
  const Eigen::MatrixXd& derivative(int k) const {
    if (k < 1) throw std::invalid_argument("GlobalOperator: derivative order must be >= 1");
    if (k == 1) return d1;
    std::lock_guard<std::mutex> lock(*cache_mutex_);
    auto it = order_cache_.find(k);
    if (it != order_cache_.end()) return it->second;
    Eigen::MatrixXd acc = d1;
    int have = 1;
    for (const auto& [ord, mat] : order_cache_)
      if (ord > have && ord < k) {
        have = ord;
        acc = mat;
      }
    while (have < k) {
      acc = acc * d1;
      ++have;
    }
    return order_cache_.emplace(k, std::move(acc)).first->second;
  }

 private:
  mutable std::map<int, Eigen::MatrixXd> order_cache_;
  mutable std::unique_ptr<std::mutex> cache_mutex_;
};

inline const Eigen::MatrixXd& derivative_of_order(const GlobalOperator& op, int k) {
  return op.derivative(k);
}

inline std::vector<std::pair<int, int>> sparsity_pattern(const Eigen::MatrixXd& m, double threshold) {
  if (threshold < 0) throw std::invalid_argument("sparsity_pattern: threshold must be >= 0");
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > threshold) out.emplace_back(i, j);
  return out;
}

inline std::vector<std::pair<int, int>> sparsity_pattern(const GlobalOperator& op, double threshold) {
  return sparsity_pattern(op.d1, threshold);
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/** A participant in pairwise assembly: either a fresh Subdomain or an already
 *  accumulated GlobalOperator (multi-interval chaining).
 */
struct Piece {
  Eigen::VectorXd nodes;
  std::vector<Eigen::MatrixXd> diff;  // orders 1..K
  std::vector<RowSource> prov;        // provenance carried per node
  std::vector<SourceTrace> traces;    // cols in this piece's own index space

  int n() const { return static_cast<int>(nodes.size()); }
};

inline Piece piece_from(const Subdomain& s, RowSource tag) {
  Piece p;
  p.nodes = s.phys_nodes;
  p.diff = s.phys_diff;
  p.prov.assign(static_cast<size_t>(s.n()), tag);
  SourceTrace t;
  t.nodes = s.phys_nodes;
  t.diff = s.phys_diff;
  t.cols.resize(static_cast<size_t>(s.n()));
  for (int i = 0; i < s.n(); ++i) t.cols[static_cast<size_t>(i)] = i;
  p.traces.push_back(std::move(t));
  return p;
}

inline Piece piece_from(const GlobalOperator& op, int max_order) {
  Piece p;
  p.nodes = op.nodes;
  p.diff.reserve(static_cast<size_t>(max_order));
  for (int k = 1; k <= max_order; ++k) p.diff.push_back(op.derivative(k));
  p.prov = op.row_provenance;
  p.traces = op.sources;
  return p;
}

struct MergePlan {
  Eigen::VectorXd merged;
  std::vector<int> col_a, col_b;              // global column per source node
  std::vector<std::pair<int, int>> pairs;     // coincident (index in A, index in B)
  std::vector<int> a_src, b_src;              // per merged index, -1 if absent
  double tol = 0;
};

inline double effective_tol(const Piece& a, const Piece& b, const OverlapSpec& spec) {
  if (spec.coincidence_tol >= 0) return spec.coincidence_tol;
  const double lo = std::min(a.nodes[0], b.nodes[0]);
  const double hi = std::max(a.nodes[a.n() - 1], b.nodes[b.n() - 1]);
  return 1e-12 * (hi - lo);
}

inline MergePlan merge_nodes(const Piece& a, const Piece& b, double tol) {
  const int na = a.n(), nb = b.n();
  MergePlan plan;
  plan.tol = tol;
  plan.col_a.assign(static_cast<size_t>(na), -1);
  plan.col_b.assign(static_cast<size_t>(nb), -1);
  std::vector<double> merged;
  merged.reserve(static_cast<size_t>(na + nb));
  int i = 0, j = 0;
  while (i < na || j < nb) {
    const int m = static_cast<int>(merged.size());
    if (i < na && j < nb && std::abs(a.nodes[i] - b.nodes[j]) <= tol) {
      merged.push_back(0.5 * (a.nodes[i] + b.nodes[j]));  // fuse to the pair mean
      plan.col_a[static_cast<size_t>(i)] = m;
      plan.col_b[static_cast<size_t>(j)] = m;
      plan.pairs.emplace_back(i, j);
      plan.a_src.push_back(i);
      plan.b_src.push_back(j);
      ++i;
      ++j;
    } else if (j >= nb || (i < na && a.nodes[i] < b.nodes[j])) {
      merged.push_back(a.nodes[i]);
      plan.col_a[static_cast<size_t>(i)] = m;
      plan.a_src.push_back(i);
      plan.b_src.push_back(-1);
      ++i;
    } else {
      merged.push_back(b.nodes[j]);
      plan.col_b[static_cast<size_t>(j)] = m;
      plan.a_src.push_back(-1);
      plan.b_src.push_back(j);
      ++j;
    }
  }
  for (size_t k = 1; k < merged.size(); ++k)
    if (!(merged[k] - merged[k - 1] > tol))
      throw std::invalid_argument("assemble: merged nodes not separable at the coincidence tolerance (" +
                                  fmt(merged[k - 1]) + " vs " + fmt(merged[k]) + ")");
  plan.merged = Eigen::Map<Eigen::VectorXd>(merged.data(), static_cast<Eigen::Index>(merged.size()));
  return plan;
}

/** Donor-side Taylor row: derivative estimate at y0 extrapolated from the
 *  nearest donor node on the left (or right, with negative offset, if y0
 *  precedes every donor node).
 */
inline Eigen::RowVectorXd taylor_donor_row(const Piece& donor, double y0, int terms) {
  int anchor = -1;
  for (int i = 0; i < donor.n(); ++i) {
    if (donor.nodes[i] < y0)
      anchor = i;
    else
      break;
  }
  if (anchor < 0) anchor = 0;
  const double dy = y0 - donor.nodes[anchor];
  Eigen::RowVectorXd row = donor.diff[0].row(anchor);
  double dpow = 1.0, fact = 1.0;
  for (int k = 1; k < terms; ++k) {
    dpow *= dy;
    fact *= k;
    row += (dpow / fact) * donor.diff[static_cast<size_t>(k)].row(anchor);
  }
  return row;
}

/** Shared row builder. Every row is its source row scattered into merged
 *  columns; fused rows are convex blends of both source rows; with
 *  use_taylor, non-fused rows inside the closed overlap blend the owner's row
 *  with a Taylor donor row from the other subdomain.
 */
inline GlobalOperator assemble_from_plan(const Piece& a, const Piece& b, const MergePlan& plan,
                                         const OverlapSpec& spec, bool use_taylor) {
  const double wa = spec.weight_a, wb = 1.0 - spec.weight_a;
  if (!(spec.weight_a > 0.0 && spec.weight_a < 1.0))
    throw std::invalid_argument("OverlapSpec: weight_a must lie in (0,1)");
  const int M = static_cast<int>(plan.merged.size());
  const double ov_lo = b.nodes[0];             // overlap = [first B node, last A node]
  const double ov_hi = a.nodes[a.n() - 1];

  GlobalOperator op;
  op.nodes = plan.merged;
  op.d1 = Eigen::MatrixXd::Zero(M, M);
  op.row_provenance.resize(static_cast<size_t>(M));

  auto scatter = [&op](int dst_row, const Eigen::RowVectorXd& src, const std::vector<int>& cols,
                       double w) {
    for (int k = 0; k < src.size(); ++k) op.d1(dst_row, cols[static_cast<size_t>(k)]) += w * src[k];
  };

  for (int m = 0; m < M; ++m) {
    const int ia = plan.a_src[static_cast<size_t>(m)];
    const int jb = plan.b_src[static_cast<size_t>(m)];
    if (ia >= 0 && jb >= 0) {  // fused pair: plain convex blend
      if (m == 0 || m == M - 1)
        throw std::invalid_argument("assemble: a blended row coincides with a boundary row (node " +
                                    fmt(plan.merged[m]) + "); unsupported geometry");
      scatter(m, a.diff[0].row(ia), plan.col_a, wa);
      scatter(m, b.diff[0].row(jb), plan.col_b, wb);
      op.row_provenance[static_cast<size_t>(m)] = RowSource::blended;
      continue;
    }
    const double y0 = plan.merged[m];
    const double slack = overlap_slack(ov_lo, ov_hi);
    const bool in_overlap = (y0 >= ov_lo - slack && y0 <= ov_hi + slack);
    if (use_taylor && in_overlap) {
      if (m == 0 || m == M - 1)
        throw std::invalid_argument("assemble: a blended row coincides with a boundary row (node " +
                                    fmt(y0) + "); unsupported geometry");
      if (ia >= 0) {
        scatter(m, a.diff[0].row(ia), plan.col_a, wa);
        scatter(m, taylor_donor_row(b, y0, spec.taylor_terms), plan.col_b, wb);
      } else {
        scatter(m, taylor_donor_row(a, y0, spec.taylor_terms), plan.col_a, wa);
        scatter(m, b.diff[0].row(jb), plan.col_b, wb);
      }
      op.row_provenance[static_cast<size_t>(m)] = RowSource::blended;
      continue;
    }
    if (ia >= 0) {
      scatter(m, a.diff[0].row(ia), plan.col_a, 1.0);
      op.row_provenance[static_cast<size_t>(m)] = a.prov[static_cast<size_t>(ia)];
    } else {
      scatter(m, b.diff[0].row(jb), plan.col_b, 1.0);
      op.row_provenance[static_cast<size_t>(m)] = b.prov[static_cast<size_t>(jb)];
    }
  }

  // carry interpolation traces through the column renumbering
  for (const auto& t : a.traces) {
    SourceTrace nt = t;
    for (auto& c : nt.cols) c = plan.col_a[static_cast<size_t>(c)];
    op.sources.push_back(std::move(nt));
  }
  for (const auto& t : b.traces) {
    SourceTrace nt = t;
    for (auto& c : nt.cols) c = plan.col_b[static_cast<size_t>(c)];
    op.sources.push_back(std::move(nt));
  }
  return op;
}

inline void require_proper_overlap(const Piece& a, const Piece& b) {
  if (!(a.nodes[0] < b.nodes[0] && a.nodes[a.n() - 1] < b.nodes[b.n() - 1]))
    throw std::invalid_argument("assemble: subdomain A must start left of B and end left of B's end");
}

inline void require_span(const GlobalOperator& op, double lo, double hi, const char* what) {
  const double span = hi - lo;
  if (std::abs(op.nodes[0] - lo) > 1e-9 * span || std::abs(op.nodes[op.size() - 1] - hi) > 1e-9 * span)
    throw std::invalid_argument(std::string(what) + ": operator nodes must span [" + fmt(lo) + ", " +
                                fmt(hi) + "], got [" + fmt(op.nodes[0]) + ", " +
                                fmt(op.nodes[op.size() - 1]) + "]");
}

}  // namespace detail

/** Promote a single mapped subdomain to a (trivial) global operator so the
 *  same solver entry points cover the no-decomposition baseline.
 */
inline GlobalOperator promote(const Subdomain& s) {
  GlobalOperator op;
  op.nodes = s.phys_nodes;
  op.d1 = s.phys_diff[0];
  op.row_provenance.assign(static_cast<size_t>(s.n()), RowSource::domain_a);
  op.method = AssemblyMethod::single;
  SourceTrace t;
  t.nodes = s.phys_nodes;
  t.diff = s.phys_diff;
  t.cols.resize(static_cast<size_t>(s.n()));
  for (int i = 0; i < s.n(); ++i) t.cols[static_cast<size_t>(i)] = i;
  op.sources.push_back(std::move(t));
  return op;
}

/** Algorithm with a single shared interface node: the interface row is the
 *  convex blend of A's last row and B's first row, all others copied with
 *  zero extension. M = N_a + N_b - 1.
 */
inline GlobalOperator assemble_one_point(const Subdomain& sub_a, const Subdomain& sub_b,
                                         const OverlapSpec& spec = {}) {
  auto a = detail::piece_from(sub_a, RowSource::domain_a);
  auto b = detail::piece_from(sub_b, RowSource::domain_b);
  detail::require_proper_overlap(a, b);
  const double tol = detail::effective_tol(a, b, spec);
  if (std::abs(sub_a.hi() - sub_b.lo()) > tol)
    throw std::invalid_argument("assemble_one_point: interface mismatch, A ends at " +
                                detail::fmt(sub_a.hi()) + " but B starts at " + detail::fmt(sub_b.lo()));
  auto plan = detail::merge_nodes(a, b, tol);
  if (plan.pairs.size() != 1 || plan.pairs[0] != std::make_pair(a.n() - 1, 0))
    throw std::invalid_argument("assemble_one_point: expected exactly one coincident pair at the interface");
  auto op = detail::assemble_from_plan(a, b, plan, spec, false);
  op.method = AssemblyMethod::one_point;
  return op;
}

/** Algorithm with two coincident node pairs: the last two nodes of A fuse with
 *  the first two of B and both shared rows are convex blends. M = N_a + N_b - 2.
 */
inline GlobalOperator assemble_two_point(const Subdomain& sub_a, const Subdomain& sub_b,
                                         const OverlapSpec& spec = {}) {
  auto a = detail::piece_from(sub_a, RowSource::domain_a);
  auto b = detail::piece_from(sub_b, RowSource::domain_b);
  detail::require_proper_overlap(a, b);
  const double tol = detail::effective_tol(a, b, spec);
  auto plan = detail::merge_nodes(a, b, tol);
  if (plan.pairs.size() < 2)
    throw std::invalid_argument("assemble_two_point: fewer than two coincident pairs (found " +
                                std::to_string(plan.pairs.size()) + ")");
  const std::vector<std::pair<int, int>> want = {{a.n() - 2, 0}, {a.n() - 1, 1}};
  if (plan.pairs.size() != 2 || plan.pairs[0] != want[0] || plan.pairs[1] != want[1])
    throw std::invalid_argument(
        "assemble_two_point: coincident pairs must be A's last two nodes against B's first two");
  auto op = detail::assemble_from_plan(a, b, plan, spec, false);
  op.method = AssemblyMethod::two_point;
  return op;
}

/** Positive-width overlap with exactly one engineered coincident node; rows
 *  keep their source entries in merged column order (interleaved zero
 *  pattern), the fused row is blended.
 */
inline GlobalOperator assemble_pseudo_multipoint(const Subdomain& sub_a, const Subdomain& sub_b,
                                                 const OverlapSpec& spec = {}) {
  auto a = detail::piece_from(sub_a, RowSource::domain_a);
  auto b = detail::piece_from(sub_b, RowSource::domain_b);
  detail::require_proper_overlap(a, b);
  const double tol = detail::effective_tol(a, b, spec);
  if (!(sub_a.hi() - sub_b.lo() > tol))
    throw std::invalid_argument("assemble_pseudo_multipoint: overlap region must have positive width");
  auto plan = detail::merge_nodes(a, b, tol);
  if (plan.pairs.size() != 1)
    throw std::invalid_argument("assemble_pseudo_multipoint: need exactly one coincident pair, found " +
                                std::to_string(plan.pairs.size()) +
                                " (zero or several make the global matrix singular)");
  auto op = detail::assemble_from_plan(a, b, plan, spec, false);
  op.method = AssemblyMethod::pseudo_multi;
  return op;
}

namespace detail {

inline void require_taylor_pre(const Piece& a, const Piece& b, const OverlapSpec& spec, double tol) {
  require_proper_overlap(a, b);
  const double ov_lo = b.nodes[0], ov_hi = a.nodes[a.n() - 1];
  if (!(ov_hi - ov_lo > tol))
    throw std::invalid_argument("assemble_taylor_multipoint: overlap region must have positive width");
  const double slack = overlap_slack(ov_lo, ov_hi);
  int in_a = 0, in_b = 0;
  for (int i = 0; i < a.n(); ++i)
    if (a.nodes[i] >= ov_lo - slack && a.nodes[i] <= ov_hi + slack) ++in_a;
  for (int j = 0; j < b.n(); ++j)
    if (b.nodes[j] >= ov_lo - slack && b.nodes[j] <= ov_hi + slack) ++in_b;
  if (in_a < 2 || in_b < 2)
    throw std::invalid_argument("assemble_taylor_multipoint: overlap must contain >= 2 nodes from each "
                                "subdomain (has " + std::to_string(in_a) + " from A, " +
                                std::to_string(in_b) + " from B)");
  if (spec.taylor_terms < 1)
    throw std::invalid_argument("OverlapSpec: taylor_terms must be >= 1");
  const int need = spec.taylor_terms + 1;
  if (static_cast<int>(a.diff.size()) < need || static_cast<int>(b.diff.size()) < need)
    throw std::invalid_argument("assemble_taylor_multipoint: taylor_terms=" +
                                std::to_string(spec.taylor_terms) +
                                " needs derivative orders up to " + std::to_string(need) +
                                " on both subdomains");
}

inline GlobalOperator taylor_pair(const Piece& a, const Piece& b, const OverlapSpec& spec) {
  const double tol = effective_tol(a, b, spec);
  require_taylor_pre(a, b, spec, tol);
  auto plan = merge_nodes(a, b, tol);
  auto op = assemble_from_plan(a, b, plan, spec, true);
  op.method = AssemblyMethod::taylor_multi;
  return op;
}

}  // namespace detail

/** Positive-width overlap with no required coincidence: every overlap row
 *  blends the owner's Chebyshev row with a truncated-Taylor donor row from the
 *  other subdomain.
 */
inline GlobalOperator assemble_taylor_multipoint(const Subdomain& sub_a, const Subdomain& sub_b,
                                                 const OverlapSpec& spec = {}) {
  auto a = detail::piece_from(sub_a, RowSource::domain_a);
  auto b = detail::piece_from(sub_b, RowSource::domain_b);
  return detail::taylor_pair(a, b, spec);
}

/** Split [a,b] into n_sub linear subintervals, first/last extended one-sidedly
 *  and interior ones two-sidedly by delta, then chain Taylor-blended pairwise
 *  assemblies left to right (the accumulated operator acts as domain A of each
 *  fusion).
 */
inline GlobalOperator assemble_multi_interval(double a, double b, int n_sub, int nodes_per,
                                              double delta, const OverlapSpec& spec = {}) {
  if (!(b > a)) throw std::invalid_argument("assemble_multi_interval: need b > a");
  if (n_sub < 2) throw std::invalid_argument("assemble_multi_interval: need n_sub >= 2");
  if (nodes_per < 4) throw std::invalid_argument("assemble_multi_interval: need nodes_per >= 4");
  const double width = (b - a) / n_sub;
  if (!(delta > 0)) throw std::invalid_argument("assemble_multi_interval: need delta > 0");
  if (delta >= width)
    throw std::invalid_argument("assemble_multi_interval: delta must be smaller than the subinterval width " +
                                detail::fmt(width));
  if (n_sub >= 3 && 2.0 * delta >= width)
    throw std::invalid_argument("assemble_multi_interval: overlap bands may only couple adjacent intervals "
                                "(need 2*delta < subinterval width)");

  const int max_order = spec.taylor_terms + 1;
  std::vector<Subdomain> subs;
  subs.reserve(static_cast<size_t>(n_sub));
  for (int i = 0; i < n_sub; ++i) {
    const double lo = (i == 0) ? a : a + i * width - delta;
    const double hi = (i == n_sub - 1) ? b : a + (i + 1) * width + delta;
    subs.push_back(make_subdomain(linear_map(lo, hi), nodes_per, max_order));
  }

  GlobalOperator acc = promote(subs[0]);
  for (int i = 1; i < n_sub; ++i) {
    auto pa = detail::piece_from(acc, max_order);
    auto pb = detail::piece_from(subs[static_cast<size_t>(i)], RowSource::domain_b);
    acc = detail::taylor_pair(pa, pb, spec);
  }
  acc.method = AssemblyMethod::multi_interval;
  return acc;
}

/** Interpolate grid data u at an arbitrary point through one subdomain's own
 *  polynomial representation. source picks which trace; data are read from u
 *  at that trace's global columns.
 */
inline double evaluate_through_source(const GlobalOperator& op, const Eigen::VectorXd& u,
                                      size_t source, double y) {
  if (source >= op.sources.size())
    throw std::invalid_argument("evaluate_through_source: no such source");
  const SourceTrace& t = op.sources[source];
  Eigen::VectorXd local(t.nodes.size());
  for (Eigen::Index i = 0; i < t.nodes.size(); ++i) local[i] = u[t.cols[static_cast<size_t>(i)]];
  const Eigen::VectorXd w = barycentric_weights(t.nodes);
  return barycentric_eval(t.nodes, w, local, y);
}

/** Interpolate grid data u at y through whichever source covers y (first
 *  match; ties broken by declaration order).
 */
inline double evaluate(const GlobalOperator& op, const Eigen::VectorXd& u, double y) {
  for (size_t s = 0; s < op.sources.size(); ++s) {
    const auto& t = op.sources[s];
    if (y >= t.nodes[0] && y <= t.nodes[t.nodes.size() - 1]) return evaluate_through_source(op, u, s, y);
  }
  throw std::invalid_argument("evaluate: point " + detail::fmt(y) + " lies outside every source subdomain");
}

}  // namespace semiglobal
