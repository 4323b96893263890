#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "semiglobal/assemble.hpp"
#include "semiglobal/newton.hpp"

namespace semiglobal {

/** Interface-layer problem U'' = (1/theta^2) (U - U^2)(1 - 2U) on [0, L],
 *  layer of width ~theta centered at interface_loc = 1.
 */
struct TanhProblem {
  double theta = 0.02;
  double domain_truncation = 10.0;
  double interface_loc = 1.0;
};

/** Stationary viscous Burgers nu u'' - u u' = 0 on [0,1] with Robin ends
 *  nu u'(0) - kappa (u(0) - alpha) = 0 and nu u'(1) + kappa (u(1) + alpha) = 0.
 */
struct BurgersProblem {
  double nu = 5e-3;
  double alpha_bc = 1.0;
  double kappa = 2.0;
};

inline double tanh_exact(double y, double theta) {
  if (!(theta > 0)) throw std::invalid_argument("tanh_exact: theta must be > 0");
  return 0.5 * (1.0 + std::tanh((y - 1.0) / (2.0 * theta)));
}

inline double burgers_exact(double x, double nu, double beta) {
  if (!(nu > 0)) throw std::invalid_argument("burgers_exact: nu must be > 0");
  return -beta * std::tanh(0.5 * beta / nu * (x - 0.5));
}

/** Root of -beta^2/2 sech^2(beta/4nu) + kappa (alpha - beta tanh(beta/4nu)) = 0
 *  on [0, 2 alpha]: the amplitude the Robin conditions select. Safeguarded
 *  bisection with Newton acceleration; returns once |f| <= tol or the bracket
 *  cannot shrink further.
 */
inline double burgers_beta(double nu, double alpha_bc, double kappa, double tol) {
  if (!(nu > 0) || !(kappa > 0))
    throw std::invalid_argument("burgers_beta: need nu > 0 and kappa > 0");
  auto f = [&](double b) {
    const double t = b / (4.0 * nu);
    const double s = 1.0 / std::cosh(t);  // underflows cleanly for large t
    return -0.5 * b * b * s * s + kappa * (alpha_bc - b * std::tanh(t));
  };
  auto df = [&](double b) {
    const double t = b / (4.0 * nu);
    const double s = 1.0 / std::cosh(t);
    const double th = std::tanh(t);
    const double s2 = s * s;
    return -b * s2 + 0.25 * b * b * s2 * th / nu - kappa * th - 0.25 * kappa * b * s2 / nu;
  };
  double lo = 0.0, hi = 2.0 * alpha_bc;
  if (hi < lo) std::swap(lo, hi);
  double flo = f(lo), fhi = f(hi);
  if (std::abs(flo) <= tol) return lo;
  if (std::abs(fhi) <= tol) return hi;
  if ((flo > 0) == (fhi > 0))
    throw std::invalid_argument("burgers_beta: no sign change on bracket [" + detail::fmt(lo) + ", " +
                                detail::fmt(hi) + "]");
  double x = 0.5 * (lo + hi), fx = f(x);
  for (int it = 0; it < 200 && std::abs(fx) > tol; ++it) {
    if ((fx > 0) == (flo > 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    double cand = x - fx / df(x);  // Newton when it stays bracketed, bisection otherwise
    if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
    const double fc = f(cand);
    if (std::abs(fc) >= std::abs(fx)) {
      x = 0.5 * (lo + hi);
      fx = f(x);
    } else {
      x = cand;
      fx = fc;
    }
  }
  return x;
}

inline NewtonReport solve_tanh(const GlobalOperator& op, const TanhProblem& p,
                               const Eigen::VectorXd& guess, double tol = 1e-12, int max_iter = 50) {
  if (!(p.theta > 0)) throw std::invalid_argument("TanhProblem: theta must be > 0");
  if (!(p.domain_truncation > p.interface_loc))
    throw std::invalid_argument("TanhProblem: domain truncation must exceed the interface location");
  detail::require_span(op, 0.0, p.domain_truncation, "solve_tanh");
  if (guess.size() != op.size()) throw std::invalid_argument("solve_tanh: guess length mismatch");
  const Eigen::MatrixXd& d2 = op.derivative(2);
  const int m = op.size();
  const double is2 = 1.0 / (p.theta * p.theta);
  const double u_lo = tanh_exact(0.0, p.theta);
  const double u_hi = tanh_exact(p.domain_truncation, p.theta);
  auto residual = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd f = d2 * u;
    const auto ua = u.array();
    f.array() -= is2 * (ua - ua.square()) * (1.0 - 2.0 * ua);
    f[0] = u[0] - u_lo;
    f[m - 1] = u[m - 1] - u_hi;
    return f;
  };
  auto jacobian = [&](const Eigen::VectorXd& u) {
    Eigen::MatrixXd j = d2;
    const auto ua = u.array();
    j.diagonal().array() -= is2 * (6.0 * ua.square() - 6.0 * ua + 1.0);
    j.row(0).setZero();
    j(0, 0) = 1.0;
    j.row(m - 1).setZero();
    j(m - 1, m - 1) = 1.0;
    return j;
  };
  return newton_solve(residual, jacobian, guess, tol, max_iter);
}

inline NewtonReport solve_burgers(const GlobalOperator& op, const BurgersProblem& p,
                                  const Eigen::VectorXd& guess, double tol = 1e-12,
                                  int max_iter = 50) {
  if (!(p.nu > 0)) throw std::invalid_argument("BurgersProblem: nu must be > 0");
  if (!(p.kappa > 0)) throw std::invalid_argument("BurgersProblem: kappa must be > 0");
  detail::require_span(op, 0.0, 1.0, "solve_burgers");
  if (guess.size() != op.size()) throw std::invalid_argument("solve_burgers: guess length mismatch");
  const Eigen::MatrixXd& d1 = op.derivative(1);
  const Eigen::MatrixXd& d2 = op.derivative(2);
  const int m = op.size();
  auto residual = [&](const Eigen::VectorXd& u) {
    const Eigen::VectorXd du = d1 * u;
    Eigen::VectorXd f = p.nu * (d2 * u) - u.cwiseProduct(du);
    f[0] = p.nu * du[0] - p.kappa * (u[0] - p.alpha_bc);
    f[m - 1] = p.nu * du[m - 1] + p.kappa * (u[m - 1] + p.alpha_bc);
    return f;
  };
  auto jacobian = [&](const Eigen::VectorXd& u) {
    const Eigen::VectorXd du = d1 * u;
    Eigen::MatrixXd j = p.nu * d2 - u.asDiagonal() * d1;
    j.diagonal() -= du;
    j.row(0) = p.nu * d1.row(0);
    j(0, 0) -= p.kappa;
    j.row(m - 1) = p.nu * d1.row(m - 1);
    j(m - 1, m - 1) += p.kappa;
    return j;
  };
  return newton_solve(residual, jacobian, guess, tol, max_iter);
}

struct ErrorNorms {
  double max_abs = 0;
  double l2 = 0;  // root mean square
};

inline ErrorNorms error_norms(const Eigen::VectorXd& num, const Eigen::VectorXd& exact) {
  if (num.size() != exact.size()) throw std::invalid_argument("error_norms: length mismatch");
  ErrorNorms e;
  const Eigen::VectorXd d = num - exact;
  e.max_abs = d.lpNorm<Eigen::Infinity>();
  e.l2 = std::sqrt(d.squaredNorm() / static_cast<double>(d.size()));
  return e;
}

/** Relative disagreement between the subdomains' own order-th derivative
 *  interpolants at a point inside their shared overlap. Smooth global data
 *  give ~0; data with a kink at the interface give O(1).
 */
inline double derivative_jump(const GlobalOperator& op, const Eigen::VectorXd& u, int order,
                              double interface) {
  if (order < 1) throw std::invalid_argument("derivative_jump: order must be >= 1");
  if (u.size() != op.size()) throw std::invalid_argument("derivative_jump: data length mismatch");
  std::vector<double> vals;
  for (const auto& t : op.sources) {
    const Eigen::Index n = t.nodes.size();
    // span-relative slack: endpoints reconstructed through a mapping can land
    // an ulp outside the nominal interval
    const double slack = 1e-12 * (t.nodes[n - 1] - t.nodes[0]);
    if (!(interface >= t.nodes[0] - slack && interface <= t.nodes[n - 1] + slack)) continue;
    if (static_cast<int>(t.diff.size()) < order)
      throw std::invalid_argument("derivative_jump: order " + std::to_string(order) +
                                  " exceeds the cached derivative orders");
    Eigen::VectorXd local(n);
    for (Eigen::Index i = 0; i < n; ++i) local[i] = u[t.cols[static_cast<size_t>(i)]];
    const Eigen::VectorXd dv = t.diff[static_cast<size_t>(order - 1)] * local;
    const Eigen::VectorXd w = barycentric_weights(t.nodes);
    vals.push_back(barycentric_eval(t.nodes, w, dv, interface));
  }
  if (vals.size() < 2)
    throw std::invalid_argument("derivative_jump: point " + detail::fmt(interface) +
                                " is not covered by two subdomain representations");
  double worst = 0.0;
  for (size_t i = 0; i < vals.size(); ++i)
    for (size_t j = i + 1; j < vals.size(); ++j) {
      const double den = std::max(std::abs(vals[i]), std::abs(vals[j]));
      if (den > 0) worst = std::max(worst, std::abs(vals[i] - vals[j]) / den);
    }
  return worst;
}

}  // namespace semiglobal
