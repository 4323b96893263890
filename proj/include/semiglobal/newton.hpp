#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace semiglobal {

struct NewtonReport {
  Eigen::VectorXd solution;
  std::vector<double> residual_history;  // max norms, including the initial guess
  int iterations = 0;
  bool converged = false;
};

/** Damped Newton on F(u) = 0. Each step solves J du = -F by full-pivot LU and
 *  halves the step (up to 20 times) until the residual max norm decreases; if
 *  no halving helps, gives up with converged = false. A rank-deficient LU is
 *  still solved in its rank subspace (interface problems have exponentially
 *  small tail pivots); "singular Jacobian" is thrown only when the very first
 *  step is already hopeless (deficient and no improvement) or a step comes
 *  back non-finite. Stalling later just ends the iteration.
 */
template <typename Residual, typename Jacobian>
NewtonReport newton_solve(Residual&& residual, Jacobian&& jacobian, Eigen::VectorXd guess,
                          double tol = 1e-12, int max_iter = 50) {
  NewtonReport rep;
  Eigen::VectorXd u = std::move(guess);
  Eigen::VectorXd f = residual(u);
  double fnorm = f.lpNorm<Eigen::Infinity>();
  rep.residual_history.push_back(fnorm);
  while (fnorm > tol && rep.iterations < max_iter) {
    const Eigen::MatrixXd jac = jacobian(u);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    const bool deficient = !lu.isInvertible();
    const Eigen::VectorXd du = lu.solve(-f);
    if (!du.allFinite())
      throw std::runtime_error("newton_solve: singular Jacobian at iteration " +
                               std::to_string(rep.iterations));
    bool improved = false;
    Eigen::VectorXd u_try, f_try;
    double fn_try = 0;
    if (du.allFinite()) {
      double step = 1.0;
      for (int h = 0; h <= 20; ++h) {
        u_try = u + step * du;
        f_try = residual(u_try);
        fn_try = f_try.lpNorm<Eigen::Infinity>();
        if (fn_try < fnorm) {
          improved = true;
          break;
        }
        step *= 0.5;
      }
    }
    ++rep.iterations;
    if (!improved) {
      if (deficient && rep.iterations == 1)
        throw std::runtime_error("newton_solve: singular Jacobian at iteration 0");
      break;
    }
    u = std::move(u_try);
    f = std::move(f_try);
    fnorm = fn_try;
    rep.residual_history.push_back(fnorm);
  }
  rep.converged = (fnorm <= tol);
  rep.solution = std::move(u);
  return rep;
}

}  // namespace semiglobal
