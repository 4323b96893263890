// Experiment driver: builds assembled operators from a JSON config and runs
// solves, convergence sweeps, sparsity dumps, and pipe-flow spectra. See
// README.md for the config schema (schema_version 1).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "semiglobal/assemble.hpp"
#include "semiglobal/baseflow.hpp"
#include "semiglobal/bvp.hpp"
#include "semiglobal/geometry.hpp"
#include "semiglobal/stability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace semiglobal;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNotConverged = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw ConfigError("config root must be an object");
  if (cfg.value("schema_version", 0) != 1)
    throw ConfigError("config must declare schema_version 1");
  return cfg;
}

template <typename T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing config key: " + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key has wrong type: " + key);
  }
}

template <typename T>
T value_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key has wrong type: " + key);
  }
}

OverlapSpec overlap_from(const json& cfg) {
  OverlapSpec spec;
  if (cfg.contains("overlap")) {
    const json& o = cfg.at("overlap");
    spec.weight_a = value_or(o, "weight_a", spec.weight_a);
    spec.coincidence_tol = value_or(o, "coincidence_tol", spec.coincidence_tol);
    spec.taylor_terms = value_or(o, "taylor_terms", spec.taylor_terms);
  }
  return spec;
}

std::vector<int> resolution_list(const json& cfg) {
  if (!cfg.contains("resolution")) throw ConfigError("missing config key: resolution");
  const json& r = cfg.at("resolution");
  std::vector<int> out;
  if (r.is_number_integer()) {
    out.push_back(r.get<int>());
  } else if (r.is_array() && !r.empty()) {
    for (const auto& v : r) {
      if (!v.is_number_integer()) throw ConfigError("resolution entries must be integers");
      out.push_back(v.get<int>());
    }
  } else {
    throw ConfigError("resolution must be an integer or a non-empty integer list");
  }
  for (size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) throw ConfigError("resolution sweep must be strictly increasing");
  return out;
}

/** Build the assembled operator for one (resolution, taylor_terms) point.
 *  Node counts in the geometry block scale with `n`; structural parameters do
 *  not. max_order is forced up to terms+1 where a Taylor assembly needs it.
 */
GlobalOperator build_operator(const json& cfg, int n, const OverlapSpec& spec) {
  const std::string method = require<std::string>(cfg, "method");
  const json& g = cfg.contains("geometry") ? cfg.at("geometry") : throw ConfigError("missing config key: geometry");
  const std::string kind = require<std::string>(g, "kind");
  int max_order = value_or(g, "max_order", 2);
  if (method == "taylor_multi" && max_order < spec.taylor_terms + 1)
    max_order = spec.taylor_terms + 1;

  auto finish = [&](std::pair<Subdomain, Subdomain> pair) {
    if (method == "one_point") return assemble_one_point(pair.first, pair.second, spec);
    if (method == "two_point") return assemble_two_point(pair.first, pair.second, spec);
    if (method == "pseudo_multi") return assemble_pseudo_multipoint(pair.first, pair.second, spec);
    if (method == "taylor_multi") return assemble_taylor_multipoint(pair.first, pair.second, spec);
    throw ConfigError("method " + method + " cannot be used with geometry kind " + kind);
  };

  if (kind == "single") {
    if (method != "single") throw ConfigError("geometry kind single requires method single");
    const std::string map = value_or<std::string>(g, "map", "linear");
    Mapping m;
    if (map == "linear")
      m = linear_map(require<double>(g, "a"), require<double>(g, "b"));
    else if (map == "algebraic")
      m = algebraic_map(require<double>(g, "r_c"), require<double>(g, "l1"));
    else if (map == "rational")
      m = rational_map(require<double>(g, "l"), require<double>(g, "bp"), require<double>(g, "off"));
    else
      throw ConfigError("unknown map kind: " + map);
    return promote(make_subdomain(m, n, max_order));
  }
  if (kind == "interface_pair")
    return finish(interface_pair(require<double>(g, "l1"), require<double>(g, "l_max"), n, n,
                                 max_order, value_or(g, "r_c", -1.0)));
  if (kind == "double_node_pair")
    return finish(double_node_pair(require<double>(g, "a"), require<double>(g, "b"), n, max_order));
  if (kind == "node_anchored_pair")
    return finish(node_anchored_pair(require<double>(g, "a"), require<double>(g, "a_hi"),
                                     require<double>(g, "b"), n, n, require<int>(g, "shift"),
                                     max_order));
  if (kind == "rational_tail_pair")
    return finish(rational_tail_pair(require<double>(g, "a"), require<double>(g, "a_hi"), n, n,
                                     require<int>(g, "shift"), require<double>(g, "l"),
                                     require<double>(g, "bp"), max_order));
  if (kind == "multi_interval") {
    if (method != "multi_interval")
      throw ConfigError("geometry kind multi_interval requires method multi_interval");
    return assemble_multi_interval(require<double>(g, "a"), require<double>(g, "b"),
                                   require<int>(g, "n_sub"), n, require<double>(g, "delta"), spec);
  }
  throw ConfigError("unknown geometry kind: " + kind);
}

// ---------------------------------------------------------------------------
// CSV output: rows are rendered to a full in-memory string first, written to a
// temp file in the target directory, then renamed into place.

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CsvFile {
  std::string name;
  std::string content;
};

void write_outputs(const fs::path& dir, const std::vector<CsvFile>& files) {
  fs::create_directories(dir);
  for (const auto& f : files) {
    const fs::path target = dir / f.name;
    const fs::path tmp = dir / (f.name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
      out << f.content;
      if (!out.flush()) throw std::runtime_error("short write on " + tmp.string());
    }
    fs::rename(tmp, target);
  }
}

fs::path output_dir(const json& cfg, const std::string& out_flag) {
  if (!out_flag.empty()) return out_flag;
  return value_or<std::string>(cfg, "output_dir", ".");
}

// ---------------------------------------------------------------------------
// Problems

struct SolveOutcome {
  NewtonReport report;
  Eigen::VectorXd exact;
  ErrorNorms norms;
  std::optional<double> beta;
};

Eigen::VectorXd tanh_guess(const GlobalOperator& op, const TanhProblem& prob, const json& pp) {
  const std::string kind = value_or<std::string>(pp, "guess", "smeared");
  Eigen::VectorXd g(op.size());
  if (kind == "smeared") {
    const double factor = value_or(pp, "guess_width_factor", 2.0);
    for (int i = 0; i < op.size(); ++i)
      g[i] = 0.5 * (1.0 + std::tanh((op.nodes[i] - prob.interface_loc) /
                                    (2.0 * factor * prob.theta)));
  } else if (kind == "exact_form") {
    for (int i = 0; i < op.size(); ++i) g[i] = tanh_exact(op.nodes[i], prob.theta);
  } else {
    throw ConfigError("unknown tanh guess kind: " + kind);
  }
  return g;
}

Eigen::VectorXd burgers_guess(const GlobalOperator& op, const BurgersProblem& prob,
                              const json& pp) {
  const std::string kind = value_or<std::string>(pp, "guess", "tanh_alpha");
  if (kind != "tanh_alpha") throw ConfigError("unknown burgers guess kind: " + kind);
  // shock profile at the boundary amplitude; Newton sharpens amplitude to beta
  Eigen::VectorXd g(op.size());
  const double amp = prob.alpha_bc;
  for (int i = 0; i < op.size(); ++i)
    g[i] = -amp * std::tanh(0.5 * amp / prob.nu * (op.nodes[i] - 0.5));
  return g;
}

SolveOutcome run_problem(const GlobalOperator& op, const json& cfg) {
  const std::string problem = require<std::string>(cfg, "problem");
  const json pp = cfg.value("problem_params", json::object());
  const double tol = value_or(pp, "tol", 1e-8);
  const int max_iter = value_or(pp, "max_iter", 40);
  SolveOutcome out;
  if (problem == "tanh") {
    TanhProblem prob;
    prob.theta = value_or(pp, "theta", prob.theta);
    prob.interface_loc = value_or(pp, "interface_loc", prob.interface_loc);
    prob.domain_truncation = value_or(pp, "domain_truncation", op.nodes[op.size() - 1]);
    out.report = solve_tanh(op, prob, tanh_guess(op, prob, pp), tol, max_iter);
    out.exact.resize(op.size());
    for (int i = 0; i < op.size(); ++i) out.exact[i] = tanh_exact(op.nodes[i], prob.theta);
  } else if (problem == "burgers") {
    BurgersProblem prob;
    prob.nu = value_or(pp, "nu", prob.nu);
    prob.alpha_bc = value_or(pp, "alpha_bc", prob.alpha_bc);
    prob.kappa = value_or(pp, "kappa", prob.kappa);
    out.report = solve_burgers(op, prob, burgers_guess(op, prob, pp), tol, max_iter);
    out.beta = burgers_beta(prob.nu, prob.alpha_bc, prob.kappa, 1e-14);
    out.exact.resize(op.size());
    for (int i = 0; i < op.size(); ++i) out.exact[i] = burgers_exact(op.nodes[i], prob.nu, *out.beta);
  } else {
    throw ConfigError("solve supports problems tanh and burgers, got: " + problem);
  }
  out.norms = error_norms(out.report.solution, out.exact);
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_solve(const json& cfg, const fs::path& dir) {
  const OverlapSpec spec = overlap_from(cfg);
  const auto res = resolution_list(cfg);
  if (res.size() != 1) throw ConfigError("solve expects a single resolution");
  const GlobalOperator op = build_operator(cfg, res[0], spec);
  const SolveOutcome out = run_problem(op, cfg);

  std::ostringstream sol;
  sol << "node,numeric,exact,abs_error\n";
  for (int i = 0; i < op.size(); ++i)
    sol << fmt_full(op.nodes[i]) << ',' << fmt_full(out.report.solution[i]) << ','
        << fmt_full(out.exact[i]) << ','
        << fmt_full(std::abs(out.report.solution[i] - out.exact[i])) << '\n';

  std::ostringstream rep;
  rep << "record,index,value\n";
  for (size_t k = 0; k < out.report.residual_history.size(); ++k)
    rep << "residual," << k << ',' << fmt_full(out.report.residual_history[k]) << '\n';
  rep << "iterations,0," << out.report.iterations << '\n';
  rep << "converged,0," << (out.report.converged ? 1 : 0) << '\n';
  rep << "max_abs_error,0," << fmt_full(out.norms.max_abs) << '\n';
  rep << "l2_error,0," << fmt_full(out.norms.l2) << '\n';
  if (out.beta) rep << "beta,0," << fmt_full(*out.beta) << '\n';

  write_outputs(dir, {{"solution.csv", sol.str()}, {"report.csv", rep.str()}});
  return out.report.converged ? 0 : kExitNotConverged;
}

struct SweepRow {
  int n = 0;
  int terms = 0;
  double max_abs = 0.0;
  double l2 = 0.0;
};

int cmd_convergence(const json& cfg, const fs::path& dir, int threads) {
  const std::string problem = require<std::string>(cfg, "problem");
  const auto res = resolution_list(cfg);
  std::vector<int> terms_list;
  if (cfg.contains("taylor_terms_sweep")) {
    for (const auto& v : cfg.at("taylor_terms_sweep")) {
      if (!v.is_number_integer()) throw ConfigError("taylor_terms_sweep entries must be integers");
      terms_list.push_back(v.get<int>());
    }
    if (terms_list.empty()) throw ConfigError("taylor_terms_sweep must be non-empty");
    for (size_t i = 1; i < terms_list.size(); ++i)
      if (terms_list[i] <= terms_list[i - 1])
        throw ConfigError("taylor_terms_sweep must be strictly increasing");
  } else {
    terms_list.push_back(overlap_from(cfg).taylor_terms);
  }

  std::vector<SweepRow> rows(res.size() * terms_list.size());
  const std::string method = require<std::string>(cfg, "method");
  const bool taylor_based = (method == "taylor_multi" || method == "multi_interval");

  auto run_one = [&](size_t flat) {
    const int n = res[flat / terms_list.size()];
    const int terms = terms_list[flat % terms_list.size()];
    OverlapSpec spec = overlap_from(cfg);
    spec.taylor_terms = terms;
    const GlobalOperator op = build_operator(cfg, n, spec);
    SweepRow row;
    row.n = n;
    row.terms = taylor_based ? terms : 0;
    if (problem == "differentiate") {
      const std::string fn = value_or<std::string>(cfg.value("problem_params", json::object()),
                                                   "function", "sin");
      if (fn != "sin") throw ConfigError("differentiate supports function sin, got: " + fn);
      Eigen::VectorXd u(op.size()), exact(op.size());
      for (int i = 0; i < op.size(); ++i) {
        u[i] = std::sin(op.nodes[i]);
        exact[i] = std::cos(op.nodes[i]);
      }
      const Eigen::VectorXd du = op.d1 * u;
      const auto norms = error_norms(du, exact);
      row.max_abs = norms.max_abs;
      row.l2 = norms.l2;
    } else {
      const SolveOutcome out = run_problem(op, cfg);
      row.max_abs = out.norms.max_abs;
      row.l2 = out.norms.l2;
    }
    rows[flat] = row;
  };

  const size_t total = rows.size();
  if (threads <= 1) {
    for (size_t i = 0; i < total; ++i) run_one(i);
  } else {
    std::vector<std::future<void>> pool;
    for (int t = 0; t < threads; ++t)
      pool.push_back(std::async(std::launch::async, [&, t]() {
        for (size_t i = static_cast<size_t>(t); i < total; i += static_cast<size_t>(threads))
          run_one(i);
      }));
    for (auto& f : pool) f.get();
  }

  std::ostringstream csv;
  csv << "N,taylor_terms,max_abs_error,l2_error\n";
  for (const auto& row : rows)
    csv << row.n << ',' << row.terms << ',' << fmt_full(row.max_abs) << ',' << fmt_full(row.l2)
        << '\n';
  write_outputs(dir, {{"convergence.csv", csv.str()}});
  return 0;
}

int cmd_pattern(const json& cfg, const fs::path& dir) {
  const json& g = cfg.contains("geometry") ? cfg.at("geometry") : throw ConfigError("missing config key: geometry");
  const double threshold = value_or(cfg, "threshold", 1e-12);
  std::vector<std::pair<int, int>> pat;
  if (value_or<std::string>(g, "kind", "") == "identity") {
    const int size = require<int>(g, "size");
    if (size < 1) throw ConfigError("identity size must be >= 1");
    pat = sparsity_pattern(Eigen::MatrixXd::Identity(size, size), threshold);
  } else {
    const auto res = resolution_list(cfg);
    if (res.size() != 1) throw ConfigError("pattern expects a single resolution");
    const GlobalOperator op = build_operator(cfg, res[0], overlap_from(cfg));
    const int order = value_or(cfg, "derivative_order", 1);
    pat = sparsity_pattern(op.derivative(order), threshold);
  }
  std::ostringstream csv;
  csv << "row,col\n";
  for (const auto& [r, c] : pat) csv << r << ',' << c << '\n';
  write_outputs(dir, {{"pattern.csv", csv.str()}});
  return 0;
}

int cmd_stability(const json& cfg, const fs::path& dir) {
  const json pp = cfg.value("problem_params", json::object());
  FlowParams params;
  params.reynolds = value_or(pp, "reynolds", params.reynolds);
  params.peclet = value_or(pp, "peclet", params.peclet);
  params.visc_log_ratio = value_or(pp, "visc_log_ratio", params.visc_log_ratio);
  params.schmidt = value_or(pp, "schmidt", params.schmidt);
  params.interface_loc = value_or(pp, "interface_loc", params.interface_loc);
  params.interface_width = value_or(pp, "interface_width", params.interface_width);
  params.k_ax = {value_or(pp, "k_ax_re", 1.0), value_or(pp, "k_ax_im", 0.0)};
  params.m_az = value_or(pp, "m_az", 0);
  validate(params);

  const auto res = resolution_list(cfg);
  if (res.size() != 1) throw ConfigError("stability expects a single resolution");
  const GlobalOperator op = build_operator(cfg, res[0], overlap_from(cfg));
  const BaseState base = solve_base_flow(op, params);
  const auto sys = assemble_eigensystem(op, base, params);
  const double cutoff = value_or(pp, "filter_threshold", 50.0);
  const auto modes = filter_spurious(solve_spectrum(sys), cutoff);

  const Eigen::VectorXd dv = op.d1 * base.v_bar;
  std::ostringstream bf;
  bf << "r,c_bar,mu,v_z,dv_z\n";
  for (int i = 0; i < op.size(); ++i)
    bf << fmt_full(op.nodes[i]) << ',' << fmt_full(base.c_bar[i]) << ','
       << fmt_full(base.mu_bar[i]) << ',' << fmt_full(base.v_bar[i]) << ',' << fmt_full(dv[i])
       << '\n';

  std::ostringstream sp;
  sp << "re_omega,im_omega\n";
  for (const auto& mode : modes)
    sp << fmt_full(mode.omega.real()) << ',' << fmt_full(mode.omega.imag()) << '\n';

  write_outputs(dir, {{"baseflow.csv", bf.str()}, {"spectrum.csv", sp.str()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral collocation on overlapping mapped subdomains"};
  app.require_subcommand(1);

  std::string config_path, out_flag;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_flag, "output directory (overrides config output_dir)");
    sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  };
  CLI::App* solve = app.add_subcommand("solve", "run one boundary-value solve");
  CLI::App* conv = app.add_subcommand("convergence", "run a resolution/terms sweep");
  CLI::App* pattern = app.add_subcommand("pattern", "dump operator sparsity");
  CLI::App* stability = app.add_subcommand("stability", "pipe-flow base state and spectrum");
  for (CLI::App* sub : {solve, conv, pattern, stability}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    const json cfg = load_config(config_path);
    const fs::path dir = output_dir(cfg, out_flag);
    if (app.got_subcommand(solve)) return cmd_solve(cfg, dir);
    if (app.got_subcommand(conv)) return cmd_convergence(cfg, dir, threads);
    if (app.got_subcommand(pattern)) return cmd_pattern(cfg, dir);
    return cmd_stability(cfg, dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
}
