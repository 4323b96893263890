#include <catch2/catch_amalgamated.hpp>

#include <semiglobal/grid.hpp>
#include <semiglobal/interpolate.hpp>
#include <semiglobal/mapping.hpp>
#include <semiglobal/subdomain.hpp>

#include <cmath>
#include <vector>

using namespace semiglobal;

namespace {

// Hand-derived 4-node Gauss-Lobatto first-derivative matrix for nodes
// [1, 1/2, -1/2, -1]: corner (2N^2+1)/6, interior diagonal -x_j/(2(1-x_j^2)),
// off-diagonal (c_i/c_j)(-1)^{i+j}/(x_i-x_j). Kept as exact rationals.
const double kD4[4][4] = {
    {19.0 / 6.0, -4.0, 4.0 / 3.0, -0.5},
    {1.0, -1.0 / 3.0, -1.0, 1.0 / 3.0},
    {-1.0 / 3.0, 1.0, 1.0 / 3.0, -1.0},
    {0.5, -4.0 / 3.0, 4.0, -19.0 / 6.0},
};

double poly_val(const std::vector<double>& c, double y) {
  double p = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) p = p * y + *it;
  return p;
}

double poly_dval(const std::vector<double>& c, double y) {
  double p = 0.0;
  for (size_t k = c.size(); k-- > 1;) p = p * y + static_cast<double>(k) * c[k];
  return p;
}

}  // namespace

TEST_CASE("reference grid nodes are descending cosines with exact endpoints") {
  const Grid g = cheb_grid(3, 1);
  REQUIRE(g.n_points == 3);
  REQUIRE(g.nodes[0] == 1.0);
  REQUIRE(g.nodes[2] == -1.0);
  // middle node is cos(pi/2), not an exact zero
  REQUIRE(std::abs(g.nodes[1]) <= 1e-15);

  const Grid g9 = cheb_grid(9, 1);
  for (int j = 0; j < 9; ++j) {
    REQUIRE(std::abs(g9.nodes[j] - std::cos(j * M_PI / 8.0)) <= 1e-15);
    if (j > 0) REQUIRE(g9.nodes[j] < g9.nodes[j - 1]);
  }
}

TEST_CASE("4-node derivative matrix matches the hand-derived oracle") {
  const Grid g = cheb_grid(4, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      REQUIRE(std::abs(g.d(1)(i, j) - kD4[i][j]) <= 1e-13);

  // higher orders are matrix powers
  const Eigen::MatrixXd sq = g.d(1) * g.d(1);
  REQUIRE((g.d(2) - sq).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("derivative rows annihilate constants at any size") {
  for (int n : {5, 17, 64}) {
    const Grid g = cheb_grid(n, 3);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    for (int k = 1; k <= 3; ++k)
      REQUIRE((g.d(k) * ones).cwiseAbs().maxCoeff() <= 1e-9 * n);
  }
}

TEST_CASE("grid differentiates polynomials of degree n-2 to roundoff") {
  const std::vector<double> coef = {0.7, -1.3, 0.45, 2.1, -0.6, 0.11, -0.03, 0.55};
  for (int n : {10, 24, 48}) {
    const Grid g = cheb_grid(n, 1);
    std::vector<double> c(coef);
    c.resize(static_cast<size_t>(n - 1), 0.0);  // degree n-2
    if (n - 2 >= static_cast<int>(coef.size())) c[static_cast<size_t>(n - 2)] = 0.9;
    Eigen::VectorXd u(n), du(n);
    for (int i = 0; i < n; ++i) {
      u[i] = poly_val(c, g.nodes[i]);
      du[i] = poly_dval(c, g.nodes[i]);
    }
    REQUIRE(((g.d(1) * u) - du).cwiseAbs().maxCoeff() <= 1e-9 * n * n);
  }
}

TEST_CASE("grid constructor rejects bad arguments") {
  REQUIRE_THROWS_AS(cheb_grid(1, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(cheb_grid(8, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(cheb_grid(4, 5), std::invalid_argument);
  REQUIRE_THROWS_AS(cheb_grid(6, 2).d(3), std::invalid_argument);
  REQUIRE_THROWS_AS(cheb_grid(6, 2).d(0), std::invalid_argument);
}

TEST_CASE("mappings hit their stated endpoints") {
  const Mapping lin = linear_map(0.3, 1.7);
  REQUIRE(std::abs(lin.forward(1.0) - 0.3) <= 1e-15);
  REQUIRE(std::abs(lin.forward(-1.0) - 1.7) <= 1e-15);
  REQUIRE(lin.metric(0.0) == Catch::Approx(-0.7).margin(1e-16));

  const Mapping alg = algebraic_map(1.5, 2.0);
  REQUIRE(alg.forward(1.0) == 0.0);
  REQUIRE(alg.forward(-1.0) == 2.0);  // 1-x^2 vanishes exactly at x=-1

  const Mapping rat = rational_map(2.0, 1.25, 0.5);
  REQUIRE(rat.forward(1.0) == 0.5);
  // x=-1 end: off + 2l/(bp-1)
  REQUIRE(std::abs(rat.forward(-1.0) - (0.5 + 4.0 / 0.25)) <= 1e-12);
}

TEST_CASE("mapping constructors reject degenerate parameters") {
  REQUIRE_THROWS_AS(linear_map(2.0, 2.0), std::invalid_argument);
  REQUIRE_THROWS_AS(algebraic_map(0.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(algebraic_map(1.0, -2.0), std::invalid_argument);
  REQUIRE_THROWS_AS(rational_map(2.0, 1.0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(rational_map(-1.0, 1.5, 0.0), std::invalid_argument);
}

TEST_CASE("subdomain nodes ascend and matrices honor the chain rule") {
  const int n = 48;
  const auto check = [n](const Mapping& m, auto f, auto df, auto d2f, double tol) {
    const Subdomain s = make_subdomain(m, n, 2);
    for (int i = 1; i < n; ++i) REQUIRE(s.phys_nodes[i] > s.phys_nodes[i - 1]);
    Eigen::VectorXd u(n), du(n), d2u(n);
    for (int i = 0; i < n; ++i) {
      u[i] = f(s.phys_nodes[i]);
      du[i] = df(s.phys_nodes[i]);
      d2u[i] = d2f(s.phys_nodes[i]);
    }
    REQUIRE(((s.d(1) * u) - du).cwiseAbs().maxCoeff() <= tol);
    REQUIRE(((s.d(2) * u) - d2u).cwiseAbs().maxCoeff() <= tol);
    // second derivative is the square of the first
    REQUIRE((s.d(2) - s.d(1) * s.d(1)).cwiseAbs().maxCoeff() == 0.0);
  };

  const auto sinf = [](double y) { return std::sin(y); };
  const auto cosf = [](double y) { return std::cos(y); };
  const auto msin = [](double y) { return -std::sin(y); };
  const auto expm = [](double y) { return std::exp(-y); };
  const auto dexpm = [](double y) { return -std::exp(-y); };

  check(linear_map(0.0, 3.0), sinf, cosf, msin, 1e-8);
  check(linear_map(3.0, 0.0), sinf, cosf, msin, 1e-8);  // reversed orientation
  check(algebraic_map(1.0, 1.0), sinf, cosf, msin, 1e-8);
  check(rational_map(2.0, 1.25, 0.0), expm, dexpm, expm, 1e-8);
}

TEST_CASE("subdomain differentiates a cubic exactly through every mapping") {
  const std::vector<double> c = {0.2, -1.1, 0.8, 0.4};
  for (const Mapping& m :
       {linear_map(-2.0, 5.0), algebraic_map(2.0, 3.0), rational_map(1.5, 2.0, -1.0)}) {
    const Subdomain s = make_subdomain(m, 30, 1);
    Eigen::VectorXd u(30), du(30);
    for (int i = 0; i < 30; ++i) {
      u[i] = poly_val(c, s.phys_nodes[i]);
      du[i] = poly_dval(c, s.phys_nodes[i]);
    }
    const double scale = du.cwiseAbs().maxCoeff();
    REQUIRE(((s.d(1) * u) - du).cwiseAbs().maxCoeff() <= 1e-11 * std::max(1.0, scale));
  }
}

TEST_CASE("barycentric interpolation reproduces nodal and polynomial data") {
  const Subdomain s = make_subdomain(linear_map(0.0, 2.0), 16, 1);
  const Eigen::VectorXd w = barycentric_weights(s.phys_nodes);
  const std::vector<double> c = {1.0, -0.5, 2.0, 0.25};
  Eigen::VectorXd f(16);
  for (int i = 0; i < 16; ++i) f[i] = poly_val(c, s.phys_nodes[i]);

  for (int i = 0; i < 16; ++i)
    REQUIRE(barycentric_eval(s.phys_nodes, w, f, s.phys_nodes[i]) == f[i]);
  for (double y : {0.13, 0.5, 1.111, 1.97})
    REQUIRE(std::abs(barycentric_eval(s.phys_nodes, w, f, y) - poly_val(c, y)) <= 1e-12);
}

TEST_CASE("interpolation helpers reject degenerate inputs") {
  REQUIRE_THROWS_AS(barycentric_weights(Eigen::VectorXd::Ones(1)), std::invalid_argument);
  REQUIRE_THROWS_AS(barycentric_weights(Eigen::VectorXd::Zero(5)), std::invalid_argument);
  REQUIRE_THROWS_AS(clenshaw_curtis_weights(1), std::invalid_argument);
}

TEST_CASE("clenshaw-curtis weights integrate smooth functions on [-1,1]") {
  for (int n : {20, 21}) {
    const Grid g = cheb_grid(n, 1);
    const Eigen::VectorXd w = clenshaw_curtis_weights(n);
    REQUIRE(std::abs(w.sum() - 2.0) <= 1e-14);

    double ix2 = 0.0, isin = 0.0, iexp = 0.0;
    for (int j = 0; j < n; ++j) {
      ix2 += w[j] * g.nodes[j] * g.nodes[j];
      isin += w[j] * std::sin(g.nodes[j]);
      iexp += w[j] * std::exp(g.nodes[j]);
    }
    REQUIRE(std::abs(ix2 - 2.0 / 3.0) <= 1e-13);
    REQUIRE(std::abs(isin) <= 1e-14);
    REQUIRE(std::abs(iexp - (std::exp(1.0) - std::exp(-1.0))) <= 1e-13);
  }
}

TEST_CASE("subdomain construction rejects non-invertible configurations") {
  // a==b rejected before the metric is ever evaluated
  REQUIRE_THROWS_AS(make_subdomain(linear_map(1.0, 1.0), 8, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(make_subdomain(linear_map(0.0, 1.0), 1, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(make_subdomain(linear_map(0.0, 1.0), 8, 9), std::invalid_argument);
}
