#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#ifndef HAVE_LAPACK_CONFIG_H
#define HAVE_LAPACK_CONFIG_H
#endif
#ifndef LAPACK_COMPLEX_CPP
#define LAPACK_COMPLEX_CPP
#endif
#include <lapacke.h>

#include "semiglobal/baseflow.hpp"
#include "semiglobal/interpolate.hpp"

namespace semiglobal {

/** Generalized eigenproblem mat_a q = omega mat_b q for perturbations
 *  q = [v_r, v_theta, v_z, p, c] stacked per field on the radial nodes.
 *  mat_b is singular by construction: continuity and boundary rows carry no
 *  omega.
 */
struct EigenSystem {
  Eigen::MatrixXcd mat_a;
  Eigen::MatrixXcd mat_b;
  std::vector<int> bc_rows;
};

struct EigenMode {
  std::complex<double> omega;
  Eigen::VectorXcd q;
};

/** Five coupled perturbation equations of the viscosity-stratified pipe flow,
 *  discretized on the operator nodes. Equation row blocks: radial momentum,
 *  azimuthal momentum, axial momentum, continuity, concentration. The
 *  azimuthal wavenumber is taken from params.m_az with its sign; centerline
 *  conditions switch on |m_az|.
 */
inline EigenSystem assemble_eigensystem(const GlobalOperator& op, const BaseState& base,
                                        const FlowParams& params) {
  const int m = op.size();
  if (base.v_bar.size() != m || base.c_bar.size() != m)
    throw std::invalid_argument("assemble_eigensystem: base state and operator node counts differ");
  detail::require_span(op, 0.0, 1.0, "assemble_eigensystem");

  using C = std::complex<double>;
  const C iu(0.0, 1.0);
  const C alpha = params.k_ax;
  const double beta = static_cast<double>(params.m_az);
  const double re = params.reynolds, pe = params.peclet, mm = params.visc_log_ratio;
  const double a_loc = params.interface_loc, delta = params.interface_width;

  const Eigen::MatrixXcd d1 = op.derivative(1).cast<C>();
  const Eigen::MatrixXcd d2 = op.derivative(2).cast<C>();
  const Eigen::VectorXd& r = op.nodes;

  Eigen::VectorXd inv_r(m), dc(m);
  inv_r[0] = 0.0;  // axis rows replaced below
  const double inv_sqrt_pi = 1.0 / std::sqrt(3.14159265358979323846);
  for (int i = 0; i < m; ++i) {
    if (i > 0) inv_r[i] = 1.0 / r[i];
    const double s = (r[i] - a_loc) / delta;
    dc[i] = inv_sqrt_pi / delta * std::exp(-s * s);
  }
  const Eigen::VectorXd inv_r2 = inv_r.cwiseProduct(inv_r);
  const Eigen::VectorXcd e_mc = base.mu_bar.cast<C>();  // e^{M c_bar}

  const int n = 5 * m;
  EigenSystem sys;
  sys.mat_a = Eigen::MatrixXcd::Zero(n, n);
  sys.mat_b = Eigen::MatrixXcd::Zero(n, n);

  enum { vr = 0, vth = 1, vz = 2, pr = 3, cc = 4 };
  auto blk_a = [&](int row_f, int col_f) {
    return sys.mat_a.block(row_f * m, col_f * m, m, m);
  };
  auto blk_b = [&](int row_f, int col_f) {
    return sys.mat_b.block(row_f * m, col_f * m, m, m);
  };

  const Eigen::VectorXcd vb = base.v_bar.cast<C>();
  const Eigen::VectorXcd dvb = base.dv_bar.cast<C>();
  const Eigen::VectorXcd d2vb = base.d2v_bar.cast<C>();
  const Eigen::VectorXcd dcc = dc.cast<C>();
  const Eigen::VectorXcd irc = inv_r.cast<C>();
  const Eigen::VectorXcd ir2c = inv_r2.cast<C>();
  const Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(m, m);

  auto dmat = [](const Eigen::VectorXcd& v) {
    Eigen::MatrixXcd d = v.asDiagonal();
    return d;
  };

  // shared viscous core: D2 + (1/r) D1 - diag(k^2/r^2 + alpha^2)
  auto viscous = [&](double ksq) {
    Eigen::MatrixXcd v = d2 + dmat(irc) * d1;
    v.diagonal() -= (ksq * ir2c.array() + alpha * alpha).matrix();
    return v;
  };

  const Eigen::MatrixXcd ie = dmat(iu * e_mc);  // i e^{M c_bar}

  // radial momentum
  blk_a(vr, vr) =
      re * alpha * dmat(vb) + ie * (viscous(beta * beta + 1.0) + 2.0 * mm * dmat(dcc) * d1);
  blk_a(vr, vth) = ie * dmat(-2.0 * beta * ir2c);
  blk_a(vr, pr) = -d1;
  blk_a(vr, cc) = ie * dmat(mm * alpha * dvb);
  blk_b(vr, vr) = re * ident;

  // azimuthal momentum
  {
    Eigen::MatrixXcd couple = d1;
    couple.diagonal() -= irc;
    blk_a(vth, vth) =
        re * alpha * dmat(vb) + ie * (viscous(beta * beta + 1.0) + mm * dmat(dcc) * couple);
    const Eigen::VectorXcd cross =
        (-2.0 * beta * ir2c.array() - mm * beta * dcc.array() * irc.array()).matrix();
    blk_a(vth, vr) = ie * dmat(cross);
    blk_a(vth, pr) = dmat(beta * irc);
    blk_b(vth, vth) = re * ident;
  }

  // axial momentum
  {
    blk_a(vz, vz) = re * alpha * dmat(vb) + ie * (viscous(beta * beta) + mm * dmat(dcc) * d1);
    blk_a(vz, vr) = re * dmat(dvb) + ie * dmat(-mm * alpha * dcc);
    blk_a(vz, pr) = alpha * ident;
    const Eigen::VectorXcd src =
        (d2vb.array() + dvb.array() * irc.array() + mm * dcc.array() * dvb.array()).matrix();
    blk_a(vz, cc) = ie * (mm * dmat(dvb) * d1 + mm * dmat(src));
    blk_b(vz, vz) = re * ident;
  }

  // continuity, housed in the pressure row block
  blk_a(pr, vr) = d1 + dmat(irc);
  blk_a(pr, vth) = dmat(beta * irc);
  blk_a(pr, vz) = alpha * ident;

  // concentration
  blk_a(cc, cc) = pe * alpha * dmat(vb) + iu * viscous(beta * beta);
  blk_a(cc, vr) = pe * dmat(dcc);
  blk_b(cc, cc) = pe * ident;

  // boundary rows
  auto clear_row = [&](int row) {
    sys.mat_a.row(row).setZero();
    sys.mat_b.row(row).setZero();
    sys.bc_rows.push_back(row);
  };
  auto value_row = [&](int row_f, int node, int col_f) {
    const int row = row_f * m + node;
    clear_row(row);
    sys.mat_a(row, col_f * m + node) = 1.0;
  };
  auto deriv_row = [&](int row_f, int node, int col_f) {
    const int row = row_f * m + node;
    clear_row(row);
    sys.mat_a.block(row, col_f * m, 1, m) = d1.row(node);
  };

  const int wall = m - 1;
  value_row(vr, wall, vr);
  value_row(vth, wall, vth);
  value_row(vz, wall, vz);
  value_row(cc, wall, cc);
  // continuity row kept at the wall: closes the pressure block

  const int ab = std::abs(params.m_az);
  if (ab == 0) {
    value_row(vr, 0, vr);
    value_row(vth, 0, vth);
    deriv_row(vz, 0, vz);
    deriv_row(pr, 0, pr);
    deriv_row(cc, 0, cc);
  } else if (ab == 1) {
    {  // v_r + v_theta = 0
      const int row = vr * m;
      clear_row(row);
      sys.mat_a(row, vr * m) = 1.0;
      sys.mat_a(row, vth * m) = 1.0;
    }
    {  // 2 dv_r/dr + dv_theta/dr = 0
      const int row = vth * m;
      clear_row(row);
      sys.mat_a.block(row, vr * m, 1, m) = 2.0 * d1.row(0);
      sys.mat_a.block(row, vth * m, 1, m) += d1.row(0);
    }
    value_row(vz, 0, vz);
    value_row(pr, 0, pr);
    value_row(cc, 0, cc);
  } else {
    value_row(vr, 0, vr);
    value_row(vth, 0, vth);
    value_row(vz, 0, vz);
    value_row(pr, 0, pr);
    value_row(cc, 0, cc);
  }
  std::sort(sys.bc_rows.begin(), sys.bc_rows.end());
  return sys;
}

/** All finite generalized eigenpairs, sorted by descending imaginary part
 *  (most unstable first). Dense QZ; infinite eigenvalues from the singular
 *  mass matrix are dropped.
 */
inline std::vector<EigenMode> solve_spectrum(const EigenSystem& sys) {
  const lapack_int n = static_cast<lapack_int>(sys.mat_a.rows());
  if (sys.mat_b.rows() != n || sys.mat_a.cols() != n || sys.mat_b.cols() != n)
    throw std::invalid_argument("solve_spectrum: matrices must be square and equally sized");
  Eigen::MatrixXcd a = sys.mat_a;
  Eigen::MatrixXcd b = sys.mat_b;
  Eigen::VectorXcd alpha(n), beta(n);
  Eigen::MatrixXcd vrm(n, n);
  const lapack_int info =
      LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, b.data(), n, alpha.data(),
                    beta.data(), nullptr, 1, vrm.data(), n);
  if (info != 0)
    throw std::runtime_error("solve_spectrum: QZ iteration failed (info=" + std::to_string(info) +
                             ")");
  std::vector<EigenMode> modes;
  modes.reserve(static_cast<size_t>(n));
  for (lapack_int j = 0; j < n; ++j) {
    if (std::abs(beta[j]) == 0.0) continue;
    const std::complex<double> w = alpha[j] / beta[j];
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) continue;
    modes.push_back(EigenMode{w, vrm.col(j)});
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const EigenMode& x, const EigenMode& y) { return x.omega.imag() > y.omega.imag(); });
  return modes;
}

/** Drops modes with |omega| beyond threshold and modes whose eigenvector
 *  energy sits almost entirely (> 99%) on the two nodes adjacent to the
 *  boundaries, the signature of discrete spurious modes.
 */
inline std::vector<EigenMode> filter_spurious(const std::vector<EigenMode>& modes,
                                              double threshold) {
  std::vector<EigenMode> kept;
  kept.reserve(modes.size());
  for (const auto& mode : modes) {
    if (std::abs(mode.omega) > threshold) continue;
    const int n = static_cast<int>(mode.q.size());
    const int m = n / 5;
    if (m >= 4) {
      double edge = 0.0;
      for (int f = 0; f < 5; ++f)
        edge += std::norm(mode.q[f * m + 1]) + std::norm(mode.q[f * m + m - 2]);
      const double total = mode.q.squaredNorm();
      if (total > 0 && edge > 0.99 * total) continue;
    }
    kept.push_back(mode);
  }
  return kept;
}

/** Volume flux 2 pi int_0^1 v r dr up to the 2 pi factor, via Clenshaw-Curtis
 *  on a fresh fine grid read through the operator's interpolants.
 */
inline double flow_rate(const GlobalOperator& op, const Eigen::VectorXd& v, int n_quad = 200) {
  const Eigen::VectorXd w = clenshaw_curtis_weights(n_quad);
  const double pi = 3.14159265358979323846;
  double acc = 0.0;
  for (int j = 0; j < n_quad; ++j) {
    const double x = std::cos(j * pi / (n_quad - 1));
    const double r = 0.5 * (1.0 - x);
    acc += w[j] * evaluate(op, v, r) * r;
  }
  return 0.5 * acc;  // d r = dx / 2
}

}  // namespace semiglobal
