#include <catch2/catch_amalgamated.hpp>

#include <semiglobal/assemble.hpp>
#include <semiglobal/geometry.hpp>

#include <cmath>
#include <vector>

using namespace semiglobal;

namespace {

Eigen::VectorXd apply_f(const Eigen::VectorXd& nodes, double (*f)(double)) {
  Eigen::VectorXd u(nodes.size());
  for (Eigen::Index i = 0; i < nodes.size(); ++i) u[i] = f(nodes[i]);
  return u;
}

double max_d1_error(const GlobalOperator& op, double (*f)(double), double (*df)(double)) {
  const Eigen::VectorXd u = apply_f(op.nodes, f);
  const Eigen::VectorXd du = apply_f(op.nodes, df);
  return ((op.d1 * u) - du).cwiseAbs().maxCoeff();
}

// scatter a source-local row into global column positions
Eigen::RowVectorXd scatter(const SourceTrace& t, int local_row, int m) {
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(m);
  const Eigen::MatrixXd& d = t.diff[0];
  for (Eigen::Index j = 0; j < t.nodes.size(); ++j)
    out[t.cols[static_cast<size_t>(j)]] += d(local_row, j);
  return out;
}

}  // namespace

TEST_CASE("one-point assembly fuses the shared interface node") {
  auto [a, b] = interface_pair(1.0, 2.0, 4, 4, 1);
  const GlobalOperator op = assemble_one_point(a, b);

  REQUIRE(op.method == AssemblyMethod::one_point);
  REQUIRE(op.size() == 7);
  for (int i = 1; i < 7; ++i) REQUIRE(op.nodes[i] > op.nodes[i - 1]);
  REQUIRE(std::abs(op.nodes[3] - 1.0) <= 1e-12);

  const std::vector<RowSource> want = {RowSource::domain_a, RowSource::domain_a,
                                       RowSource::domain_a, RowSource::blended,
                                       RowSource::domain_b, RowSource::domain_b,
                                       RowSource::domain_b};
  REQUIRE(op.row_provenance == want);

  // pure rows carry no cross-subdomain coupling
  for (int i = 0; i < 3; ++i)
    for (int j = 4; j < 7; ++j) {
      REQUIRE(op.d1(i, j) == 0.0);
      REQUIRE(op.d1(6 - i, 6 - j) == 0.0);
    }
  // blended interface row couples to every unknown
  for (int j = 0; j < 7; ++j) REQUIRE(op.d1(3, j) != 0.0);
}

TEST_CASE("two-point assembly matches a hand-worked 6x6 operator") {
  // equal-width linear pair on [0,2]: w = 8/7, nodes 0, 2/7, 6/7, 8/7, 12/7, 2;
  // last two nodes of A coincide with the first two of B. Expected matrix
  // derived offline from the 4-node reference derivative and the chain rule.
  auto [a, b] = double_node_pair(0.0, 2.0, 4, 1);
  const GlobalOperator op = assemble_two_point(a, b);

  REQUIRE(op.method == AssemblyMethod::two_point);
  REQUIRE(op.size() == 6);
  const double expected_nodes[6] = {0.0, 2.0 / 7.0, 6.0 / 7.0, 8.0 / 7.0, 12.0 / 7.0, 2.0};
  for (int i = 0; i < 6; ++i) REQUIRE(std::abs(op.nodes[i] - expected_nodes[i]) <= 1e-14);

  const double e[6][6] = {
      {133.0 / 24.0, -7.0, 7.0 / 3.0, -7.0 / 8.0, 0.0, 0.0},
      {7.0 / 4.0, -7.0 / 12.0, -7.0 / 4.0, 7.0 / 12.0, 0.0, 0.0},
      {-7.0 / 24.0, 7.0 / 8.0, 49.0 / 16.0, -35.0 / 8.0, 7.0 / 6.0, -7.0 / 16.0},
      {7.0 / 16.0, -7.0 / 6.0, 35.0 / 8.0, -49.0 / 16.0, -7.0 / 8.0, 7.0 / 24.0},
      {0.0, 0.0, -7.0 / 12.0, 7.0 / 4.0, 7.0 / 12.0, -7.0 / 4.0},
      {0.0, 0.0, 7.0 / 8.0, -7.0 / 3.0, 7.0, -133.0 / 24.0},
  };
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      REQUIRE(std::abs(op.d1(i, j) - e[i][j]) <= 1e-12);

  REQUIRE(op.row_provenance[2] == RowSource::blended);
  REQUIRE(op.row_provenance[3] == RowSource::blended);
}

TEST_CASE("blended rows are the declared convex combination of source rows") {
  const Subdomain a = make_subdomain(linear_map(0.0, 1.0), 6, 1);
  const Subdomain b = make_subdomain(linear_map(1.0, 2.4), 7, 1);
  OverlapSpec spec;
  spec.weight_a = 0.3;
  const GlobalOperator op = assemble_one_point(a, b, spec);
  REQUIRE(op.size() == 12);
  REQUIRE(op.row_provenance[5] == RowSource::blended);

  const Eigen::RowVectorXd recon =
      0.3 * scatter(op.sources[0], 5, 12) + 0.7 * scatter(op.sources[1], 0, 12);
  const double scale = op.d1.cwiseAbs().maxCoeff();
  REQUIRE((op.d1.row(5) - recon).cwiseAbs().maxCoeff() <= 1e-13 * scale);

  // non-blended rows are verbatim copies of their source rows
  REQUIRE((op.d1.row(0) - scatter(op.sources[0], 0, 12)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((op.d1.row(11) - scatter(op.sources[1], 6, 12)).cwiseAbs().maxCoeff() == 0.0);

  // every row annihilates constants
  REQUIRE((op.d1 * Eigen::VectorXd::Ones(12)).cwiseAbs().maxCoeff() <= 1e-9 * 12);
}

TEST_CASE("one-point operator differentiates a sharp interface profile") {
  auto [a, b] = interface_pair(1.0, 4.0, 150, 150, 1);
  const GlobalOperator op = assemble_one_point(a, b);
  const double theta = 0.02;
  Eigen::VectorXd u(op.size()), du(op.size());
  for (int i = 0; i < op.size(); ++i) {
    const double s = (op.nodes[i] - 1.0) / (2.0 * theta);
    u[i] = 0.5 * (1.0 + std::tanh(s));
    const double c = std::cosh(s);
    du[i] = 1.0 / (4.0 * theta * c * c);
  }
  REQUIRE(((op.d1 * u) - du).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("pseudo-multipoint keeps source rows interleaved with one fused node") {
  auto [a, b] = node_anchored_pair(0.0, 0.62, 1.3, 16, 20, 3, 1);
  const GlobalOperator op = assemble_pseudo_multipoint(a, b);

  REQUIRE(op.method == AssemblyMethod::pseudo_multi);
  REQUIRE(op.size() == 35);
  int blended = 0;
  for (const auto s : op.row_provenance) blended += (s == RowSource::blended) ? 1 : 0;
  REQUIRE(blended == 1);

  // rows owned by one subdomain are exactly zero on the other's private columns
  std::vector<bool> has_a(35, false), has_b(35, false);
  for (int c : op.sources[0].cols) has_a[static_cast<size_t>(c)] = true;
  for (int c : op.sources[1].cols) has_b[static_cast<size_t>(c)] = true;
  for (int i = 0; i < 35; ++i) {
    if (op.row_provenance[i] == RowSource::blended) continue;
    const bool is_a = op.row_provenance[i] == RowSource::domain_a;
    for (int j = 0; j < 35; ++j) {
      const bool owned = is_a ? has_a[static_cast<size_t>(j)] : has_b[static_cast<size_t>(j)];
      if (!owned) REQUIRE(op.d1(i, j) == 0.0);
    }
  }
  // the two column sets tile the unknowns with a single shared column
  int shared = 0;
  for (int j = 0; j < 35; ++j) {
    REQUIRE((has_a[static_cast<size_t>(j)] || has_b[static_cast<size_t>(j)]));
    shared += (has_a[static_cast<size_t>(j)] && has_b[static_cast<size_t>(j)]) ? 1 : 0;
  }
  REQUIRE(shared == 1);
}

TEST_CASE("pseudo-multipoint with a clustered tail meets the reference accuracy") {
  // linear [0,1] against a rational tail pinned to an interior node; sine data
  auto [a, b] = rational_tail_pair(0.0, 1.0, 60, 60, 5, 2.0, 1.25, 1);
  const GlobalOperator op = assemble_pseudo_multipoint(a, b);
  const Eigen::VectorXd u = apply_f(op.nodes, [](double y) { return std::sin(y); });
  const Eigen::VectorXd du = apply_f(op.nodes, [](double y) { return std::cos(y); });
  const Eigen::VectorXd err = (op.d1 * u) - du;
  const double rms = std::sqrt(err.squaredNorm() / err.size());
  REQUIRE(rms <= 1e-7);
  REQUIRE(err.cwiseAbs().maxCoeff() <= 1.5e-7);
}

TEST_CASE("assembled operators converge spectrally on a wide oscillatory span") {
  // [0,160] holds ~25 periods of sin: per-side N of 32 is pre-asymptotic,
  // doublings to 64 and 128 must each gain at least a factor 10.
  const auto sinf = [](double y) { return std::sin(y); };
  const auto cosf = [](double y) { return std::cos(y); };

  const auto check_decay = [&](auto build) {
    double prev = -1.0;
    for (int n : {32, 64, 128}) {
      const GlobalOperator op = build(n);
      const double err = max_d1_error(op, sinf, cosf);
      if (prev > 0.0) REQUIRE(err <= prev / 10.0);
      prev = err;
    }
  };

  check_decay([](int n) {
    const Subdomain a = make_subdomain(linear_map(0.0, 80.0), n, 1);
    const Subdomain b = make_subdomain(linear_map(80.0, 160.0), n, 1);
    return assemble_one_point(a, b);
  });
  check_decay([](int n) {
    auto [a, b] = double_node_pair(0.0, 160.0, n, 1);
    return assemble_two_point(a, b);
  });
  check_decay([](int n) {
    auto [a, b] = node_anchored_pair(0.0, 80.3, 160.0, n, n, 4, 1);
    return assemble_pseudo_multipoint(a, b);
  });
}

TEST_CASE("mirroring the geometry mirrors the operator") {
  // reflect about the origin with swapped roles and complementary weight:
  // nodes negate and reverse, the matrix negates and reverse-permutes
  const auto check_mirror = [](const GlobalOperator& op, const GlobalOperator& opm) {
    const int m = op.size();
    REQUIRE(opm.size() == m);
    const double nscale = op.nodes.cwiseAbs().maxCoeff();
    const double dscale = op.d1.cwiseAbs().maxCoeff();
    for (int i = 0; i < m; ++i) {
      REQUIRE(std::abs(opm.nodes[i] + op.nodes[m - 1 - i]) <= 1e-10 * nscale);
      for (int j = 0; j < m; ++j)
        REQUIRE(std::abs(opm.d1(i, j) + op.d1(m - 1 - i, m - 1 - j)) <= 1e-10 * dscale);
    }
  };

  {
    OverlapSpec spec;
    spec.weight_a = 0.3;
    const GlobalOperator op = assemble_one_point(make_subdomain(linear_map(0.0, 1.0), 12, 1),
                                                 make_subdomain(linear_map(1.0, 2.3), 14, 1), spec);
    OverlapSpec mspec;
    mspec.weight_a = 0.7;
    const GlobalOperator opm =
        assemble_one_point(make_subdomain(linear_map(-2.3, -1.0), 14, 1),
                           make_subdomain(linear_map(-1.0, 0.0), 12, 1), mspec);
    check_mirror(op, opm);
  }
  {
    auto [a, b] = node_anchored_pair(0.0, 0.62, 1.3, 16, 20, 3, 1);
    OverlapSpec spec;
    spec.weight_a = 0.3;
    const GlobalOperator op = assemble_pseudo_multipoint(a, b, spec);
    OverlapSpec mspec;
    mspec.weight_a = 0.7;
    const GlobalOperator opm =
        assemble_pseudo_multipoint(make_subdomain(linear_map(-1.3, -b.lo()), 20, 1),
                                   make_subdomain(linear_map(-0.62, 0.0), 16, 1), mspec);
    check_mirror(op, opm);
  }
}

TEST_CASE("assembly preconditions reject ill-posed layouts") {
  const Subdomain a01 = make_subdomain(linear_map(0.0, 1.0), 8, 1);
  const Subdomain gap = make_subdomain(linear_map(1.5, 2.0), 8, 1);
  REQUIRE_THROWS_AS(assemble_one_point(a01, gap), std::invalid_argument);

  // B contained in A violates the layout precondition
  const Subdomain inner = make_subdomain(linear_map(0.2, 0.8), 8, 1);
  REQUIRE_THROWS_AS(assemble_one_point(a01, inner), std::invalid_argument);

  // a genuine two-pair layout is not a one-point layout and vice versa
  auto [da, db] = double_node_pair(0.0, 2.0, 8, 1);
  REQUIRE_THROWS_AS(assemble_one_point(da, db), std::invalid_argument);
  auto [ia, ib] = interface_pair(1.0, 2.0, 8, 8, 1);
  REQUIRE_THROWS_AS(assemble_two_point(ia, ib), std::invalid_argument);

  // pseudo-multipoint needs positive width and exactly one coincident node
  REQUIRE_THROWS_AS(assemble_pseudo_multipoint(ia, ib), std::invalid_argument);
  const Subdomain generic = make_subdomain(linear_map(0.95, 2.0), 13, 1);
  const Subdomain a12 = make_subdomain(linear_map(0.0, 1.0), 12, 1);
  REQUIRE_THROWS_AS(assemble_pseudo_multipoint(a12, generic), std::invalid_argument);
}

TEST_CASE("operator evaluation interpolates through the owning subdomain") {
  auto [a, b] = interface_pair(1.0, 3.0, 24, 24, 1);
  const GlobalOperator op = assemble_one_point(a, b);
  const auto poly = [](double y) { return 0.3 * y * y * y - 1.2 * y + 0.7; };
  const Eigen::VectorXd u = apply_f(op.nodes, [](double y) { return 0.3 * y * y * y - 1.2 * y + 0.7; });

  for (double y : {0.05, 0.5, 0.93, 1.0, 1.7, 2.9})
    REQUIRE(std::abs(evaluate(op, u, y) - poly(y)) <= 1e-10);
  // nodal evaluation is exact
  REQUIRE(evaluate(op, u, op.nodes[5]) == u[5]);

  REQUIRE_THROWS_AS(evaluate(op, u, 3.5), std::invalid_argument);
  REQUIRE_THROWS_AS(evaluate(op, u, -0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(evaluate_through_source(op, u, 5, 0.5), std::invalid_argument);

  REQUIRE_THROWS_AS(op.derivative(0), std::invalid_argument);
  // cached powers are plain matrix powers
  const GlobalOperator op2 = assemble_one_point(a, b);
  REQUIRE((op2.derivative(2) - op2.d1 * op2.d1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sparsity_pattern lists entries above threshold in row-major order") {
  Eigen::MatrixXd m(2, 3);
  m << 1.0, 0.0, 2.0, 5e-13, 0.0, -3.0;
  const auto pat = sparsity_pattern(m, 1e-12);
  const std::vector<std::pair<int, int>> want = {{0, 0}, {0, 2}, {1, 2}};
  REQUIRE(pat == want);
  REQUIRE_THROWS_AS(sparsity_pattern(m, -1.0), std::invalid_argument);
}
