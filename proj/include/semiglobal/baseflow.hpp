#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "semiglobal/assemble.hpp"

namespace semiglobal {

/** Parameters of the miscible core-annular pipe flow. visc_log_ratio is
 *  M = ln(mu_core/mu_annulus); schmidt ties peclet = schmidt * reynolds.
 */
struct FlowParams {
  double reynolds = 100.0;
  double peclet = 1000.0;
  double visc_log_ratio = 0.0;
  double schmidt = 10.0;
  double interface_loc = 0.5;
  double interface_width = 0.02;
  std::complex<double> k_ax{1.0, 0.0};
  int m_az = 0;
};

inline void validate(const FlowParams& p) {
  if (!(p.reynolds > 0)) throw std::invalid_argument("FlowParams: reynolds must be > 0");
  if (!(p.peclet > 0)) throw std::invalid_argument("FlowParams: peclet must be > 0");
  if (!(p.schmidt > 0)) throw std::invalid_argument("FlowParams: schmidt must be > 0");
  if (std::abs(p.schmidt * p.reynolds - p.peclet) > 1e-12 * std::max(1.0, p.peclet))
    throw std::invalid_argument("FlowParams: peclet must equal schmidt * reynolds");
  if (!(p.interface_loc - 3.0 * p.interface_width > 0.0 &&
        p.interface_loc + 3.0 * p.interface_width < 1.0))
    throw std::invalid_argument(
        "FlowParams: interface_loc +/- 3*interface_width must lie inside (0,1)");
  if (p.m_az < 0) throw std::invalid_argument("FlowParams: m_az must be a non-negative integer");
}

struct BaseState {
  Eigen::VectorXd c_bar;
  Eigen::VectorXd v_bar;
  Eigen::VectorXd dv_bar;
  Eigen::VectorXd d2v_bar;
  Eigen::VectorXd mu_bar;
};

inline double base_concentration(double r, double a, double delta) {
  if (!(delta > 0)) throw std::invalid_argument("base_concentration: delta must be > 0");
  return 0.5 + 0.5 * std::erf((r - a) / delta);
}

inline double viscosity(double c, double m) { return std::exp(m * c); }

/** Base axial velocity from the axial momentum balance
 *  e^{M c}(v'' + v'/r + M c' v') = const, v'(0) = 0, v(1) = 0, normalized to
 *  v(0) = 1 by scaling the constant pressure gradient. The axis row is
 *  entirely replaced by the regularity condition, so the 1/r factor is never
 *  evaluated at r = 0.
 */
inline BaseState solve_base_flow(const GlobalOperator& op, const FlowParams& p) {
  validate(p);
  detail::require_span(op, 0.0, 1.0, "solve_base_flow");
  const int m = op.size();
  const Eigen::VectorXd& r = op.nodes;
  const double mm = p.visc_log_ratio;
  const double a = p.interface_loc, delta = p.interface_width;
  const double inv_sqrt_pi = 1.0 / std::sqrt(3.14159265358979323846);

  BaseState st;
  st.c_bar.resize(m);
  st.mu_bar.resize(m);
  Eigen::VectorXd dc(m), inv_r(m);
  inv_r[0] = 0.0;  // axis row replaced below
  for (int i = 0; i < m; ++i) {
    st.c_bar[i] = base_concentration(r[i], a, delta);
    const double s = (r[i] - a) / delta;
    dc[i] = inv_sqrt_pi / delta * std::exp(-s * s);
    st.mu_bar[i] = viscosity(st.c_bar[i], mm);
    if (i > 0) inv_r[i] = 1.0 / r[i];
  }

  const Eigen::MatrixXd& d1 = op.derivative(1);
  const Eigen::MatrixXd& d2 = op.derivative(2);
  Eigen::MatrixXd lhs =
      st.mu_bar.asDiagonal() * (d2 + inv_r.asDiagonal() * d1 + mm * dc.asDiagonal() * d1);
  lhs.row(0) = d1.row(0);  // v'(0) = 0
  lhs.row(m - 1).setZero();
  lhs(m - 1, m - 1) = 1.0;  // v(1) = 0
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(m);
  rhs[0] = 0.0;
  rhs[m - 1] = 0.0;

  // FullPivLU's invertibility threshold misfires on these operators (row scales
  // span many orders), so solve unconditionally and judge by the residual.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
  Eigen::VectorXd v = lu.solve(rhs);
  const double scale = lhs.cwiseAbs().maxCoeff() * v.cwiseAbs().maxCoeff() + 1.0;
  if (!v.allFinite() || (lhs * v - rhs).lpNorm<Eigen::Infinity>() > 1e-10 * scale)
    throw std::runtime_error("solve_base_flow: singular momentum operator");
  if (std::abs(v[0]) < 1e-300)
    throw std::runtime_error("solve_base_flow: cannot normalize, centerline velocity is zero");
  st.v_bar = v / v[0];
  st.dv_bar = d1 * st.v_bar;
  st.d2v_bar = d2 * st.v_bar;
  return st;
}

}  // namespace semiglobal
