#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace semiglobal {

/** Barycentric weights for distinct nodes, scaled by the interval capacity
 *  (b-a)/4 so products stay representable for large node counts.
 */
inline Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::invalid_argument("barycentric_weights: need at least 2 nodes");
  const double cap = 0.25 * std::abs(x[n - 1] - x[0]);
  if (!(cap > 0)) throw std::invalid_argument("barycentric_weights: nodes must span an interval");
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i) p *= (x[i] - x[j]) / cap;
    w[i] = 1.0 / p;
  }
  return w;
}

inline double barycentric_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                               const Eigen::VectorXd& f, double y) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double d = y - x[i];
    if (d == 0.0) return f[i];
    const double q = w[i] / d;
    num += q * f[i];
    den += q;
  }
  return num / den;
}

/** Clenshaw-Curtis quadrature weights on [-1,1] for the n Chebyshev
 *  Gauss-Lobatto nodes cos(j*pi/(n-1)). Cosine-sum form, O(n^2).
 */
inline Eigen::VectorXd clenshaw_curtis_weights(int n) {
  if (n < 2) throw std::invalid_argument("clenshaw_curtis_weights: need at least 2 nodes");
  const int N = n - 1;
  const double pi = 3.14159265358979323846;
  Eigen::VectorXd w(n);
  const double wend = (N % 2 == 0) ? 1.0 / (N * N - 1.0) : 1.0 / (N * N);
  w[0] = wend;
  w[N] = wend;
  for (int j = 1; j < N; ++j) {
    const double theta = j * pi / N;
    double v = 1.0;
    if (N % 2 == 0) {
      for (int k = 1; k <= N / 2 - 1; ++k) v -= 2.0 * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
      v -= std::cos(N * theta) / (N * N - 1.0);
    } else {
      for (int k = 1; k <= (N - 1) / 2; ++k) v -= 2.0 * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
    }
    w[j] = 2.0 * v / N;
  }
  return w;
}

}  // namespace semiglobal
