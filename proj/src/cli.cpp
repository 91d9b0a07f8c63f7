#include "mhtest/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "mhtest/asymptotics.hpp"
#include "mhtest/distribution_io.hpp"
#include "mhtest/errors.hpp"
#include "mhtest/exact_eval.hpp"

namespace mhtest {

namespace {

// A CSV cell: number, text, or empty (non-finite numbers are written empty).
using Cell = std::variant<std::monostate, double, std::string>;

struct Output {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::json extra = nlohmann::json::object();
};

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Cell num(double v) { return std::isfinite(v) ? Cell{v} : Cell{}; }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_csv(const Output& o) {
  std::ostringstream os;
  for (std::size_t i = 0; i < o.columns.size(); ++i) os << (i ? "," : "") << o.columns[i];
  os << '\n';
  for (const auto& row : o.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (const auto* d = std::get_if<double>(&row[i])) os << format_number(*d);
      if (const auto* s = std::get_if<std::string>(&row[i])) os << csv_escape(*s);
    }
    os << '\n';
  }
  return os.str();
}

std::string render_json(const Output& o, const RunConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["metadata"] = {{"tool", kToolName}, {"version", kToolVersion}, {"command", cfg.command},
                     {"config", cfg.to_json()}};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : o.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (const auto* d = std::get_if<double>(&row[i])) {
        r[o.columns[i]] = *d;
      } else if (const auto* s = std::get_if<std::string>(&row[i])) {
        r[o.columns[i]] = *s;
      } else {
        r[o.columns[i]] = nullptr;
      }
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  for (const auto& [k, v] : o.extra.items()) doc[k] = v;
  // Doubles are written with round-trip precision by the serializer.
  return doc.dump(2) + "\n";
}

void emit(const Output& o, const RunConfig& cfg, std::ostream& out) {
  const std::string text = cfg.format == "json" ? render_json(o, cfg) : render_csv(o);
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open output file " + cfg.out);
  f << text;
  if (!f) throw InvalidArgument("failed writing output file " + cfg.out);
}

// Maps the library's exception types onto exit codes.
int guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ResourceCapExceeded& e) {
    err << "error: " << e.what()
        << "\nhint: use --monte-carlo for estimates at this blocklength, or raise --max-types\n";
    return kExitResource;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

struct Inputs {
  JointDistribution p;
  JointDistribution q;
};

Inputs load_inputs(const RunConfig& cfg) {
  cfg.validate();
  Inputs in{load_distribution(cfg.p_path), load_distribution(cfg.q_path)};
  if (in.p.x_size() != in.q.x_size() || in.p.y_size() != in.q.y_size()) {
    throw InvalidArgument("P and Q have different alphabet sizes");
  }
  return in;
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions s;
  s.projection.tol = std::min(s.projection.tol, cfg.tol);
  return s;
}

ProjectionOptions projection_options(const RunConfig& cfg) {
  ProjectionOptions o;
  o.tol = cfg.tol;
  return o;
}

std::vector<double> lambda_points(const RunConfig& cfg, const LambdaPath& path) {
  if (cfg.lambda_grid) return cfg.lambda_grid->points();
  return Grid{-path.e_qp(), path.e_pq(), 21}.points();
}

std::vector<double> r_points(const RunConfig& cfg, const LambdaPath& path) {
  if (cfg.r_grid) return cfg.r_grid->points();
  return Grid{path.e_qp() / 20.0, path.e_qp(), 20}.points();
}

std::string cell_name(const char* prefix, int x, int y) {
  return std::string(prefix) + "[" + std::to_string(x) + "][" + std::to_string(y) + "]";
}

void push_table(Output& o, const std::string& name, const Table& t) {
  for (Eigen::Index x = 0; x < t.rows(); ++x) {
    for (Eigen::Index y = 0; y < t.cols(); ++y) {
      o.rows.push_back({cell_name(name.c_str(), static_cast<int>(x), static_cast<int>(y)), num(t(x, y))});
    }
  }
}

void append_table_columns(std::vector<std::string>& cols, const char* prefix, int xs, int ys) {
  for (int x = 0; x < xs; ++x) {
    for (int y = 0; y < ys; ++y) cols.push_back(cell_name(prefix, x, y));
  }
}

void append_table_cells(std::vector<Cell>& row, const Table& t) {
  for (Eigen::Index x = 0; x < t.rows(); ++x) {
    for (Eigen::Index y = 0; y < t.cols(); ++y) row.push_back(num(t(x, y)));
  }
}

const std::vector<std::string> kTradeoffColumns = {
    "scheme", "n", "lambda", "tau_or_r", "alpha", "beta", "log_alpha", "log_beta",
    "alpha_half_width", "beta_half_width"};

std::vector<Cell> tradeoff_row(const ErrorPoint& pt) {
  return {to_string(pt.scheme), static_cast<double>(pt.n), num(pt.lambda), num(pt.parameter),
          num(pt.alpha),        num(pt.beta),             num(pt.log_alpha), num(pt.log_beta),
          0.0,                  0.0};
}

std::vector<Cell> mc_row(const McEstimate& e) {
  return {to_string(e.scheme),
          static_cast<double>(e.n),
          num(e.lambda),
          num(e.parameter),
          num(e.alpha_hat),
          num(e.beta_hat),
          num(std::log(e.alpha_hat)),
          num(std::log(e.beta_hat)),
          num(e.half_width_alpha),
          num(e.half_width_beta)};
}

}  // namespace

Grid Grid::parse(const std::string& text) {
  Grid g;
  std::istringstream is(text);
  std::string a, b, s;
  if (!std::getline(is, a, ':') || !std::getline(is, b, ':') || !std::getline(is, s) || a.empty() ||
      b.empty() || s.empty()) {
    throw InvalidArgument("grid '" + text + "' must have the form a:b:steps");
  }
  try {
    std::size_t pa = 0, pb = 0, ps = 0;
    g.a = std::stod(a, &pa);
    g.b = std::stod(b, &pb);
    g.steps = std::stoi(s, &ps);
    if (pa != a.size() || pb != b.size() || ps != s.size()) throw std::invalid_argument(text);
  } catch (const std::logic_error&) {
    throw InvalidArgument("grid '" + text + "' must have the form a:b:steps with numeric fields");
  }
  if (g.steps < 1) throw InvalidArgument("grid '" + text + "' needs at least one step");
  if (!std::isfinite(g.a) || !std::isfinite(g.b)) throw InvalidArgument("grid '" + text + "' has a non-finite bound");
  return g;
}

std::vector<double> Grid::points() const {
  if (steps == 1) return {a};
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (steps - 1);
  out.back() = b;
  return out;
}

std::string Grid::str() const { return format_number(a) + ":" + format_number(b) + ":" + std::to_string(steps); }

void RunConfig::validate() const {
  if (p_path.empty() || q_path.empty()) throw InvalidArgument("both --p and --q are required");
  if (n < 1) throw InvalidArgument("--n must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("--eps must lie in (0, 1)");
  if (trials < 1) throw InvalidArgument("--trials must be at least 1");
  if (format != "csv" && format != "json") throw InvalidArgument("--format must be csv or json");
  if (!(tol > 0.0)) throw InvalidArgument("--tol must be positive");
  if (max_types < 1) throw InvalidArgument("--max-types must be positive");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {{"p", p_path},     {"q", q_path},           {"n", n},
                      {"eps", eps},      {"trials", trials},      {"seed", seed},
                      {"oracle", oracle}, {"monte_carlo", monte_carlo}, {"format", format},
                      {"max_types", max_types}, {"tol", tol}};
  j["lambda_grid"] = lambda_grid ? nlohmann::json(lambda_grid->str()) : nlohmann::json(nullptr);
  j["r_grid"] = r_grid ? nlohmann::json(r_grid->str()) : nlohmann::json(nullptr);
  return j;
}

int cmd_project(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Inputs in = load_inputs(cfg);
    const ProjectionOptions popts = projection_options(cfg);
    const ProjectionResult ps = project_onto_marginals(in.q, in.p.marginal_x(), in.p.marginal_y(), popts);
    const ProjectionResult qs = project_onto_marginals(in.p, in.q.marginal_x(), in.q.marginal_y(), popts);
    const SecondOrderStats st = second_order_stats(in.p, in.q, popts);
    Output o;
    o.columns = {"field", "value"};
    // Closed form on 2x2 alphabets, scaling otherwise.
    o.rows.push_back({std::string("e_pq"), num(projected_relative_entropy(in.p.table(), in.q, popts))});
    o.rows.push_back({std::string("e_qp"), num(projected_relative_entropy(in.q.table(), in.p, popts))});
    o.rows.push_back({std::string("d_pq"), num(kl_divergence(in.p, in.q))});
    o.rows.push_back({std::string("d_qp"), num(kl_divergence(in.q, in.p))});
    o.rows.push_back({std::string("v"), num(st.v)});
    o.rows.push_back({std::string("t3"), num(st.t3)});
    o.rows.push_back({std::string("projection_iterations_pq"), static_cast<double>(ps.iterations)});
    o.rows.push_back({std::string("projection_residual_pq"), num(ps.residual)});
    push_table(o, "p_star", ps.projection.table());
    push_table(o, "q_star", qs.projection.table());
    push_table(o, "j", st.density);
    emit(o, cfg, out);
  });
}

int cmd_tradeoff(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Inputs in = load_inputs(cfg);
    LambdaPath path(in.p, in.q, solver_options(cfg));
    const std::vector<double> lambdas = lambda_points(cfg, path);
    const std::vector<double> rs = r_points(cfg, path);
    Output o;
    o.columns = kTradeoffColumns;

    if (cfg.monte_carlo) {
      for (double lambda : lambdas) {
        McEstimate row = monte_carlo_tradeoff(make_rule(SchemeSpec::np_like(lambda), path), in.p, in.q,
                                              cfg.n, cfg.trials, cfg.seed);
        row.scheme = SchemeKind::np_like;
        row.lambda = lambda;
        row.parameter = lambda;
        o.rows.push_back(mc_row(row));
      }
      for (double r : rs) {
        McEstimate row = monte_carlo_tradeoff(make_rule(SchemeSpec::hk(r), path), in.p, in.q, cfg.n,
                                              cfg.trials, cfg.seed);
        row.scheme = SchemeKind::hk;
        row.lambda = std::numeric_limits<double>::quiet_NaN();
        row.parameter = r;
        o.rows.push_back(mc_row(row));
      }
      if (cfg.oracle) {
        err << "note: --oracle is ignored with --monte-carlo\n";
      }
    } else {
      const ExactEvaluator ev(in.p, in.q, cfg.n, cfg.max_types);
      for (double lambda : lambdas) {
        validate_scheme(SchemeSpec::np_like(lambda), path.e_pq(), path.e_qp());
        o.rows.push_back(tradeoff_row(ev.np_like(path.solve(lambda).llr, lambda, lambda)));
      }
      for (double r : rs) {
        validate_scheme(SchemeSpec::hk(r), path.e_pq(), path.e_qp());
        o.rows.push_back(tradeoff_row(ev.hk(r)));
      }
      if (cfg.oracle) {
        if (cfg.n > kOracleMaxBlocklength) {
          throw ResourceCapExceeded("--oracle is limited to n <= " + std::to_string(kOracleMaxBlocklength));
        }
        for (const ErrorPoint& pt : ev.oracle_envelope()) o.rows.push_back(tradeoff_row(pt));
      }
    }
    emit(o, cfg, out);
  });
}

int cmd_exponents(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Inputs in = load_inputs(cfg);
    LambdaPath path(in.p, in.q, solver_options(cfg));
    const std::vector<double> lambdas = lambda_points(cfg, path);
    Output o;
    o.columns = {"curve", "lambda", "tau", "exponent1", "exponent2"};
    for (const ExponentPoint& e : optimal_exponent_curve(path, lambdas)) {
      o.rows.push_back({std::string("optimal"), num(e.lambda), num(e.tau), num(e.type1_exponent),
                        num(e.type2_exponent)});
    }
    const int steps = static_cast<int>(lambdas.size());
    for (Endpoint which : {Endpoint::upper, Endpoint::lower}) {
      const auto [lo, hi] = fixed_lambda_tau_range(path, which);
      const std::string name = which == Endpoint::upper ? "fixed_upper" : "fixed_lower";
      for (const ExponentPoint& e : fixed_lambda_curve(path, which, Grid{lo, hi, steps}.points())) {
        o.rows.push_back({name, num(e.lambda), num(e.tau), num(e.type1_exponent), num(e.type2_exponent)});
      }
    }
    if (!cfg.trajectory.empty()) {
      const int xs = in.p.x_size(), ys = in.p.y_size();
      Output t;
      t.columns = {"lambda", "side"};
      for (int i = 1; i < xs; ++i) t.columns.push_back("theta_x[" + std::to_string(i) + "]");
      for (int j = 1; j < ys; ++j) t.columns.push_back("theta_y[" + std::to_string(j) + "]");
      for (int i = 1; i < xs; ++i) {
        for (int j = 1; j < ys; ++j) t.columns.push_back(cell_name("theta_xy", i, j));
      }
      t.columns.push_back("parallel_residual");
      for (const TrajectoryPoint& pt : lambda_trajectory(path, lambdas)) {
        for (const auto& [side, c] : {std::pair<std::string, const NaturalCoords*>{"P", &pt.p_theta},
                                      {"Q", &pt.q_theta}}) {
          std::vector<Cell> row{num(pt.lambda), side};
          for (Eigen::Index i = 0; i < c->theta_x.size(); ++i) row.push_back(num(c->theta_x[i]));
          for (Eigen::Index j = 0; j < c->theta_y.size(); ++j) row.push_back(num(c->theta_y[j]));
          append_table_cells(row, c->theta_xy);
          row.push_back(num(pt.parallel_residual));
          t.rows.push_back(std::move(row));
        }
      }
      RunConfig tc = cfg;
      tc.out = cfg.trajectory;
      emit(t, tc, out);
    }
    emit(o, cfg, out);
  });
}

int cmd_solve_lambda(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Inputs in = load_inputs(cfg);
    LambdaPath path(in.p, in.q, solver_options(cfg));
    const int xs = in.p.x_size(), ys = in.p.y_size();
    Output o;
    o.columns = {"lambda", "a", "b", "tilt", "type1_exponent", "type2_exponent", "residual"};
    append_table_columns(o.columns, "p_lambda", xs, ys);
    append_table_columns(o.columns, "q_lambda", xs, ys);
    append_table_columns(o.columns, "llr", xs, ys);
    for (double lambda : lambda_points(cfg, path)) {
      const LambdaSolution s = path.solve(lambda);
      std::vector<Cell> row{num(s.lambda),         num(s.a),
                            num(s.b),              num(s.tilt),
                            num(s.type1_exponent), num(s.type2_exponent),
                            num(s.residual)};
      append_table_cells(row, s.p_lambda.table());
      append_table_cells(row, s.q_lambda.table());
      append_table_cells(row, s.llr.table);
      o.rows.push_back(std::move(row));
    }
    emit(o, cfg, out);
  });
}

int cmd_second_order(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Inputs in = load_inputs(cfg);
    const SecondOrderStats st = second_order_stats(in.p, in.q, projection_options(cfg));
    Output o;
    o.columns = {"field", "value"};
    o.rows.push_back({std::string("e"), num(st.e)});
    o.rows.push_back({std::string("v"), num(st.v)});
    o.rows.push_back({std::string("t3"), num(st.t3)});
    o.rows.push_back({std::string("n"), static_cast<double>(cfg.n)});
    o.rows.push_back({std::string("eps"), num(cfg.eps)});
    o.rows.push_back({std::string("beta_exponent_approx"), num(second_order_beta_approx(st, cfg.n, cfg.eps))});
    Cell threshold;
    try {
      threshold = num(np_threshold_for_eps(st, cfg.n, cfg.eps));
    } catch (const RangeError& e) {
      err << "warning: threshold undefined: " << e.what() << '\n';
    }
    o.rows.push_back({std::string("threshold"), threshold});
    if (st.v > 0.0) {
      o.rows.push_back({std::string("min_n_for_threshold"),
                        static_cast<double>(min_blocklength_for_eps(st, cfg.eps))});
    }
    push_table(o, "j", st.density);
    emit(o, cfg, out);
  });
}

namespace {

void add_common_options(CLI::App& sub, RunConfig& cfg, std::string& lambda_grid, std::string& r_grid,
                        std::string& config_path) {
  sub.add_option("--p", cfg.p_path, "JSON file with the null-hypothesis distribution");
  sub.add_option("--q", cfg.q_path, "JSON file with the alternative distribution");
  sub.add_option("--n", cfg.n, "blocklength")->capture_default_str();
  sub.add_option("--lambda-grid", lambda_grid,
                 "lambda (= tau) grid a:b:steps; default spans [-E(Q||P), E(P||Q)] with 21 points");
  sub.add_option("--r-grid", r_grid, "HK threshold grid a:b:steps; default 20 points up to E(Q||P)");
  sub.add_option("--eps", cfg.eps, "type-I error target for second-order output")->capture_default_str();
  sub.add_option("--trials", cfg.trials, "Monte-Carlo trials per hypothesis")->capture_default_str();
  sub.add_option("--seed", cfg.seed, "Monte-Carlo seed")->capture_default_str();
  sub.add_flag("--oracle", cfg.oracle, "also emit the most powerful symmetric envelope (n <= 60)");
  sub.add_flag("--monte-carlo", cfg.monte_carlo, "estimate errors by simulation instead of enumeration");
  sub.add_option("--out", cfg.out, "output file (default stdout)");
  sub.add_option("--format", cfg.format, "csv or json")->capture_default_str();
  sub.add_option("--max-types", cfg.max_types, "cap on enumerated joint types")->capture_default_str();
  sub.add_option("--tol", cfg.tol, "projection tolerance (total variation)")->capture_default_str();
  sub.add_option("--config", config_path,
                 "JSON run config; keys match the long option names (with _ for -), flags override it");
}

// Copies keys from a JSON config for options not given on the command line.
void apply_config_file(const std::string& path, CLI::App& sub, RunConfig& cfg, std::string& lambda_grid,
                       std::string& r_grid) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument(path + ": config must be a JSON object");
  const auto given = [&](const char* opt) { return sub.count(opt) > 0; };
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "p" && !given("--p")) cfg.p_path = value.get<std::string>();
      else if (key == "q" && !given("--q")) cfg.q_path = value.get<std::string>();
      else if (key == "n" && !given("--n")) cfg.n = value.get<int>();
      else if (key == "lambda_grid" && !given("--lambda-grid")) lambda_grid = value.get<std::string>();
      else if (key == "r_grid" && !given("--r-grid")) r_grid = value.get<std::string>();
      else if (key == "eps" && !given("--eps")) cfg.eps = value.get<double>();
      else if (key == "trials" && !given("--trials")) cfg.trials = value.get<std::uint64_t>();
      else if (key == "seed" && !given("--seed")) cfg.seed = value.get<std::uint64_t>();
      else if (key == "oracle" && !given("--oracle")) cfg.oracle = value.get<bool>();
      else if (key == "monte_carlo" && !given("--monte-carlo")) cfg.monte_carlo = value.get<bool>();
      else if (key == "out" && !given("--out")) cfg.out = value.get<std::string>();
      else if (key == "format" && !given("--format")) cfg.format = value.get<std::string>();
      else if (key == "max_types" && !given("--max-types")) cfg.max_types = value.get<std::uint64_t>();
      else if (key == "tol" && !given("--tol")) cfg.tol = value.get<double>();
      else if (key == "trajectory" && !given("--trajectory")) cfg.trajectory = value.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

const char* kCsvHelp =
    "Output (CSV by default; --format json mirrors the rows under \"rows\" with a\n"
    "\"metadata\" block holding the tool version and the effective config):\n"
    "  project       field,value: e_pq, e_qp, d_pq, d_qp, v, t3, then p_star[x][y], q_star[x][y], j[x][y]\n"
    "  tradeoff      scheme,n,lambda,tau_or_r,alpha,beta,log_alpha,log_beta,alpha_half_width,beta_half_width\n"
    "                (half widths are 0 for exact rows; empty cells mark undefined values)\n"
    "  exponents     curve,lambda,tau,exponent1,exponent2 for curves optimal, fixed_upper, fixed_lower;\n"
    "                --trajectory FILE writes lambda,side,theta_x[i],theta_y[j],theta_xy[i][j],parallel_residual\n"
    "  solve-lambda  lambda,a,b,tilt,type1_exponent,type2_exponent,residual,p_lambda[x][y],q_lambda[x][y],llr[x][y]\n"
    "  second-order  field,value: e, v, t3, n, eps, beta_exponent_approx, threshold, min_n_for_threshold, j[x][y]\n"
    "Exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 resource cap exceeded.";

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-rate multiterminal hypothesis testing: projections, the proxy likelihood-ratio test, "
               "exact error trade-offs and exponent curves."};
  app.footer(kCsvHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

  RunConfig cfg;
  std::string lambda_grid, r_grid, config_path;
  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&, std::ostream&);
  };
  const Command commands[] = {
      {"project", "projected relative entropies, optimizers, density and moments", cmd_project},
      {"tradeoff", "exact (or simulated) error pairs of the NP-like and HK schemes", cmd_tradeoff},
      {"exponents", "optimal and fixed-endpoint exponent curves", cmd_exponents},
      {"solve-lambda", "solve the defining pair along a lambda grid", cmd_solve_lambda},
      {"second-order", "density moments, threshold for a target eps, second-order approximation",
       cmd_second_order},
  };
  std::vector<CLI::App*> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common_options(*sub, cfg, lambda_grid, r_grid, config_path);
    if (std::string(c.name) == "exponents") {
      sub->add_option("--trajectory", cfg.trajectory, "write natural-coordinate trajectories to FILE");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream help_out;
    const int code = app.exit(e, help_out, err);
    out << help_out.str();
    return code == 0 ? kExitOk : kExitInput;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    cfg.command = commands[i].name;
    const int prep = guarded(err, [&] {
      if (!config_path.empty()) apply_config_file(config_path, *subs[i], cfg, lambda_grid, r_grid);
      if (!lambda_grid.empty()) cfg.lambda_grid = Grid::parse(lambda_grid);
      if (!r_grid.empty()) cfg.r_grid = Grid::parse(r_grid);
      cfg.validate();
    });
    if (prep != kExitOk) return prep;
    return commands[i].fn(cfg, out, err);
  }
  return kExitInput;
}

}  // namespace mhtest
