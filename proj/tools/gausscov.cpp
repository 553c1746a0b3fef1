// gausscov command-line interface.
//
// Exit codes: 0 success (an empty selection included), 2 bad input,
// 3 numerical failure.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gausscov/data_io.hpp"
#include "gausscov/fp_sim.hpp"
#include "gausscov/fp_table.hpp"
#include "gausscov/graph.hpp"
#include "gausscov/huber.hpp"
#include "gausscov/nonlinear.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/regions.hpp"
#include "gausscov/report.hpp"
#include "gausscov/scenarios.hpp"
#include "gausscov/selection.hpp"
#include "gausscov/subsets.hpp"

#ifndef GAUSSCOV_DEFAULT_FP_TABLE
#define GAUSSCOV_DEFAULT_FP_TABLE "data/fp_table.txt"
#endif

using namespace gausscov;

namespace {

struct Common {
  std::string format = "table";
  int threads = default_threads();
  bool no_timing = false;
};

struct DataOptions {
  std::string file;
  std::string y = "1";
  bool strict = false;
  bool no_intercept = false;
  bool standardize = false;
  long lags = 0;
  std::string y_series;
  std::vector<std::string> series;
};

void add_data_options(CLI::App* app, DataOptions& d, bool with_y = true) {
  app->add_option("file", d.file, "CSV file with a header row")->required();
  if (with_y) app->add_option("--y", d.y, "response column: name or 1-based index");
  app->add_flag("--strict", d.strict, "missing values are an error instead of dropping the row");
  app->add_flag("--standardize", d.standardize, "scale covariates to mean 0, variance 1");
  if (with_y) {
    app->add_flag("--no-intercept", d.no_intercept, "do not center y and X");
    app->add_option("--lags", d.lags, "treat columns as series and regress on lags 1..L");
    app->add_option("--y-series", d.y_series, "target series for --lags");
    app->add_option("--series", d.series, "lagged series in column order (default: target first, then the rest)")
        ->delimiter(',');
  }
}

struct Loaded {
  Dataset data;
  std::vector<std::string> warnings;
};

Loaded load(const DataOptions& d, bool center) {
  const auto table = read_csv_file(d.file, CsvOptions{d.strict});
  Loaded out;
  out.warnings = table.warnings;
  if (d.lags > 0) {
    LagSpec spec;
    spec.max_lag = d.lags;
    spec.series = d.series;
    spec.target = d.y_series.empty() ? table.header[static_cast<std::size_t>(table.column(d.y))] : d.y_series;
    out.data = make_lags(table.values, table.header, spec);
  } else {
    out.data = dataset_from_table(table, d.y).data;
  }
  if (d.standardize) out.data = standardize(out.data).data;
  if (center && !d.no_intercept) out.data = out.data.centered_copy();
  return out;
}

std::vector<long> to_zero_based(const std::vector<long>& v, long q, const char* what) {
  std::vector<long> out;
  for (long j : v) {
    if (j < 1 || j > q) throw input_error(std::string(what) + " index " + std::to_string(j) + " is outside 1.." + std::to_string(q));
    out.push_back(j - 1);
  }
  return out;
}

Json selection_config_json(const SelectionConfig& c) {
  Json j{{"alpha", c.alpha}, {"nu", c.nu}, {"kmn", c.kmn}, {"final_pass", c.final_pass}, {"m", c.m},
         {"outer", c.outer == OuterShape::pool ? "pool" : "literal"}};
  if (c.kmx) j["kmx"] = *c.kmx;
  return j;
}

struct Output {
  Json report;
  std::string text;
};

using Clock = std::chrono::steady_clock;

std::optional<double> elapsed(const Common& c, Clock::time_point t0) {
  if (c.no_timing) return std::nullopt;
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string fp_table_path(const std::string& opt) {
  if (!opt.empty()) return opt;
  if (const char* env = std::getenv("GAUSSCOV_FP_TABLE")) return env;
  return GAUSSCOV_DEFAULT_FP_TABLE;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariate selection with Gaussian covariate P-values"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--format", common.format, "output format")->check(CLI::IsMember({"json", "table", "dot", "edges"}));
  app.add_option("--threads", common.threads, "worker threads (default: GAUSSCOV_THREADS or 1)")->check(CLI::PositiveNumber);
  app.add_flag("--no-timing", common.no_timing, "omit wall-clock timings so reports are reproducible byte for byte");

  // select
  auto* sel = app.add_subcommand("select", "stepwise selection (f1st, f2st, f3st)");
  DataOptions sel_data;
  add_data_options(sel, sel_data);
  std::string method = "f1st", loss = "gaussian", outer = "pool", exponent = "cdf";
  SelectionConfig sel_cfg;
  sel_cfg.kmn = 10;
  std::optional<long> sel_kmx;
  bool no_final = false;
  double huber_c = 1.0;
  sel->add_option("--method", method)->check(CLI::IsMember({"f1st", "f2st", "f3st"}));
  sel->add_option("--alpha", sel_cfg.alpha, "cut-off P-value");
  sel->add_option("--nu", sel_cfg.nu, "order-statistic rank");
  sel->add_option("--kmn", sel_cfg.kmn, "covariates included before testing starts");
  sel->add_option("--kmx", sel_kmx, "largest subset size");
  sel->add_option("--m", sel_cfg.m, "f3st exclusion depth");
  sel->add_flag("--no-final-pass", no_final, "skip the all-subsets refinement");
  sel->add_option("--outer", outer, "outer Beta shape reading")->check(CLI::IsMember({"pool", "literal"}));
  sel->add_option("--loss", loss)->check(CLI::IsMember({"gaussian", "huber", "logistic"}));
  sel->add_option("--huber-c", huber_c, "Huber tuning constant");
  sel->add_option("--exponent", exponent, "asymptotic P-value exponent reading")->check(CLI::IsMember({"cdf", "survival"}));

  // subsets
  auto* sub = app.add_subcommand("subsets", "all-subsets procedure");
  DataOptions sub_data;
  add_data_options(sub, sub_data);
  SelectionConfig sub_cfg;
  std::vector<long> universe;
  std::optional<long> q_pool;
  sub->add_option("--alpha", sub_cfg.alpha);
  sub->add_option("--nu", sub_cfg.nu);
  sub->add_option("--universe", universe, "covariates to enumerate (1-based; at most 25)")->delimiter(',');
  sub->add_option("--q-pool", q_pool, "pool size entering the P-values (default: all covariates)");

  // region
  auto* reg = app.add_subcommand("region", "approximation region and intervals for a subset");
  DataOptions reg_data;
  add_data_options(reg, reg_data);
  std::vector<long> reg_subset;
  double reg_alpha = 0.01;
  reg->add_option("--subset", reg_subset, "covariates (1-based)")->delimiter(',')->required();
  reg->add_option("--alpha", reg_alpha);

  // fnfp
  auto* fn = app.add_subcommand("fnfp", "false-positive counts under the null");
  FpSimConfig fp_cfg;
  std::vector<long> fp_nus{1};
  bool lookup = false, dense = false;
  std::optional<std::uint64_t> fp_seed;
  std::string table_opt;
  fn->add_option("--n", fp_cfg.n)->required();
  fn->add_option("--q", fp_cfg.q)->required();
  fn->add_option("--alpha", fp_cfg.alpha);
  fn->add_option("--nu", fp_nus, "ranks, comma separated")->delimiter(',');
  fn->add_option("--reps", fp_cfg.nsim, "null replications");
  fn->add_option("--seed", fp_seed);
  fn->add_flag("--lookup", lookup, "interpolate the shipped table instead of simulating");
  fn->add_option("--table", table_opt, "table file (default: GAUSSCOV_FP_TABLE or the shipped table)");
  fn->add_flag("--per-covariate", fp_cfg.per_covariate, "graph mode: q - 1 candidates at alpha / q");
  fn->add_flag("--dense", dense, "simulate with explicit Gaussian covariates");

  // graph
  auto* gr = app.add_subcommand("graph", "dependency graph from per-node regressions");
  DataOptions gr_data;
  add_data_options(gr, gr_data, false);
  GraphConfig gcfg;
  std::string gmethod = "f1st";
  bool undirected = false, no_divide = false;
  gr->add_option("--alpha", gcfg.alpha);
  gr->add_option("--method", gmethod)->check(CLI::IsMember({"f1st", "f2st", "f3st"}));
  gr->add_option("--nu", gcfg.selection.nu);
  gr->add_option("--kmn", gcfg.selection.kmn);
  gr->add_option("--m", gcfg.selection.m);
  gr->add_flag("--center", gcfg.center, "center columns (intercept in every regression)");
  gr->add_flag("--no-divide-alpha", no_divide, "use alpha itself rather than alpha / q per node");
  gr->add_flag("--undirected", undirected, "emit the symmetrized graph");

  // simulate
  auto* sim = app.add_subcommand("simulate", "replicated simulations scored against the truth");
  std::string scenario;
  std::optional<long> s_n, s_q, s_reps;
  long s_p = 60, s_kstar = 5;
  double s_amp = 4.5, s_rho = 0.25, s_tau = 3.0, s_alpha = 0.01;
  std::vector<long> s_nus;
  long s_kmn = 0;
  std::optional<std::uint64_t> s_seed;
  bool s_orth = false, s_full = false;
  sim->add_option("scenario", scenario)->required()->check(CLI::IsMember({"tutorial1", "null", "randomgraph", "consistency"}));
  sim->add_option("--n", s_n);
  sim->add_option("--q", s_q);
  sim->add_option("--p", s_p, "active covariates (tutorial1)");
  sim->add_option("--amplitude", s_amp);
  sim->add_option("--rho", s_rho);
  sim->add_option("--nu", s_nus, "ranks, comma separated")->delimiter(',');
  sim->add_option("--alpha", s_alpha);
  sim->add_option("--kmn", s_kmn);
  sim->add_option("--reps", s_reps);
  sim->add_option("--seed", s_seed);
  sim->add_option("--kstar", s_kstar);
  sim->add_option("--tau", s_tau);
  sim->add_flag("--orthonormal", s_orth, "orthonormal covariates (null, consistency)");
  sim->add_flag("--full-design", s_full, "materialize the n x q orthonormal design");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::vector<std::string> command(argv + 1, argv + argc);
  const auto t0 = Clock::now();
  try {
    Output out;
    if (common.format == "dot" && !gr->parsed()) throw input_error("--format dot applies to graph only");
    if (common.format == "edges" && !gr->parsed()) throw input_error("--format edges applies to graph only");

    if (sel->parsed()) {
      sel_cfg.kmx = sel_kmx;
      sel_cfg.final_pass = !no_final;
      sel_cfg.outer = outer == "pool" ? OuterShape::pool : OuterShape::literal;
      sel_cfg.threads = common.threads;
      const ExponentReading reading = exponent == "cdf" ? ExponentReading::cdf : ExponentReading::survival;
      if (loss != "gaussian" && method != "f1st") throw input_error("--loss " + loss + " supports --method f1st only");
      const auto in = load(sel_data, loss != "logistic");
      const auto& names = in.data.names();
      Json results;
      results["method"] = method;
      results["loss"] = loss;
      results["n"] = in.data.n();
      results["q"] = in.data.q();
      results["input_warnings"] = in.warnings;
      if (loss == "huber") {
        results["trace"] = trace_json(m_stepwise(in.data, sel_cfg, HuberLoss{huber_c}, {}, reading), names);
        out.text = trace_table(results["trace"]);
      } else if (loss == "logistic") {
        results["trace"] = trace_json(logistic_stepwise(in.data, sel_cfg, {}, reading), names, true);
        out.text = trace_table(results["trace"]);
      } else if (method == "f1st") {
        results["trace"] = trace_json(f1st(in.data, sel_cfg), names);
        out.text = trace_table(results["trace"]);
      } else if (method == "f2st") {
        Json rounds = Json::array();
        long r = 0;
        for (const auto& t : f2st(in.data, sel_cfg)) {
          rounds.push_back(trace_json(t, names));
          out.text += "round " + std::to_string(++r) + "\n" + trace_table(rounds.back());
        }
        if (rounds.empty()) out.text = "no covariates selected\n";
        results["rounds"] = rounds;
      } else {
        results["approximations"] = approximations_json(f3st(in.data, sel_cfg), names);
        out.text = approximations_table(results["approximations"]);
      }
      for (const auto& w : in.warnings) out.text += "warning: " + w + "\n";
      Json cfg = selection_config_json(sel_cfg);
      cfg["file"] = sel_data.file;
      cfg["intercept"] = !sel_data.no_intercept;
      if (loss == "huber") cfg["huber_c"] = huber_c;
      if (loss != "gaussian") cfg["exponent"] = exponent;
      out.report = make_report(command, cfg, results, std::nullopt, elapsed(common, t0));
    } else if (sub->parsed()) {
      sub_cfg.threads = common.threads;
      const auto in = load(sub_data, true);
      std::optional<std::vector<long>> uni;
      if (!universe.empty()) uni = to_zero_based(universe, in.data.q(), "universe");
      const auto approx = fasb(in.data, sub_cfg, uni, q_pool);
      Json results{{"approximations", approximations_json(approx, in.data.names())}, {"input_warnings", in.warnings}};
      out.text = approximations_table(results["approximations"]);
      Json cfg = selection_config_json(sub_cfg);
      cfg["file"] = sub_data.file;
      out.report = make_report(command, cfg, results, std::nullopt, elapsed(common, t0));
    } else if (reg->parsed()) {
      const auto in = load(reg_data, true);
      const auto subset = to_zero_based(reg_subset, in.data.q(), "subset");
      const auto r = region(in.data, subset, reg_alpha);
      const auto iv = intervals(in.data, subset, reg_alpha);
      Json results = region_json(r, iv, in.data.names());
      out.text = region_table(results);
      out.report = make_report(command, Json{{"file", reg_data.file}, {"alpha", reg_alpha}}, results, std::nullopt,
                               elapsed(common, t0));
    } else if (fn->parsed()) {
      Json list = Json::array();
      Json cfg{{"n", fp_cfg.n}, {"q", fp_cfg.q}, {"alpha", fp_cfg.alpha}, {"nu", fp_nus}};
      std::optional<std::uint64_t> seed;
      if (lookup) {
        const auto path = fp_table_path(table_opt);
        const auto table = FpTable::load(path);
        cfg["table"] = path;
        for (long nu : fp_nus) {
          list.push_back(Json{{"n", fp_cfg.n}, {"q", fp_cfg.q}, {"alpha", fp_cfg.alpha}, {"nu", nu},
                              {"mean", table.lookup(static_cast<double>(fp_cfg.n), static_cast<double>(fp_cfg.q),
                                                    fp_cfg.alpha, static_cast<double>(nu))}});
        }
      } else {
        if (!fp_seed) {
          fp_seed = fresh_seed();
          command.push_back("--seed");
          command.push_back(std::to_string(*fp_seed));
        }
        seed = fp_seed;
        fp_cfg.seed = *fp_seed;
        fp_cfg.threads = common.threads;
        fp_cfg.engine = dense ? FpEngine::dense : FpEngine::rotational;
        std::vector<double> alphas{fp_cfg.alpha};
        for (const auto& h : simulate_fp_grid(fp_cfg, alphas, fp_nus)) list.push_back(histogram_json(h));
        cfg["reps"] = fp_cfg.nsim;
        cfg["engine"] = dense ? "dense" : "rotational";
        cfg["per_covariate"] = fp_cfg.per_covariate;
      }
      out.text = histogram_table(list);
      out.report = make_report(command, cfg, Json{{"fnfp", list}}, seed, elapsed(common, t0));
    } else if (gr->parsed()) {
      const auto in = load(gr_data, false);
      const Dataset& d = in.data;
      Eigen::MatrixXd X(d.n(), d.q() + 1);
      X << d.y(), d.X();
      std::vector<std::string> names;
      const auto table = read_csv_file(gr_data.file, CsvOptions{gr_data.strict});
      names = table.header;
      gcfg.method = parse_graph_method(gmethod);
      gcfg.divide_alpha = !no_divide;
      gcfg.threads = common.threads;
      const auto g = build_graph(gr_data.standardize ? standardize(Dataset(X, X.col(0), names)).data.X() : X, gcfg, names);
      Json results = graph_json(g);
      results["input_warnings"] = in.warnings;
      if (common.format == "dot") {
        std::cout << export_dot(g, !undirected);
        return 0;
      }
      if (common.format == "edges") {
        std::cout << export_edge_list(g, !undirected);
        return 0;
      }
      out.text = graph_table(results);
      Json cfg{{"file", gr_data.file}, {"alpha", gcfg.alpha},   {"method", gmethod}, {"nu", gcfg.selection.nu},
               {"kmn", gcfg.selection.kmn}, {"center", gcfg.center}, {"divide_alpha", gcfg.divide_alpha}};
      out.report = make_report(command, cfg, results, std::nullopt, elapsed(common, t0));
    } else if (sim->parsed()) {
      if (!s_seed) {
        s_seed = fresh_seed();
        command.push_back("--seed");
        command.push_back(std::to_string(*s_seed));
      }
      const bool timing = !common.no_timing;
      SelectionConfig sc;
      sc.alpha = s_alpha;
      sc.kmn = s_kmn;
      sc.nu = s_nus.empty() ? 1 : s_nus.front();
      Json results;
      Json cfg{{"scenario", scenario}, {"alpha", s_alpha}, {"kmn", s_kmn}};
      if (scenario == "tutorial1") {
        Tutorial1Config c;
        c.n = s_n.value_or(1000);
        c.q = s_q.value_or(1000);
        c.p = s_p;
        c.amplitude = s_amp;
        c.rho = s_rho;
        c.selection = sc;
        if (!s_nus.empty()) c.nus = s_nus;
        c.reps = s_reps.value_or(10);
        c.seed = *s_seed;
        c.threads = common.threads;
        cfg.update(Json{{"p", c.p}, {"amplitude", c.amplitude}, {"rho", c.rho}, {"nu", c.nus}});
        results = scenario_json(run_tutorial1(c), timing);
        out.text = scenario_table(results);
      } else if (scenario == "null") {
        NullConfig c;
        c.n = s_n.value_or(500);
        c.q = s_q.value_or(500);
        c.selection = sc;
        c.reps = s_reps.value_or(1000);
        c.orthonormal = s_orth;
        c.seed = *s_seed;
        c.threads = common.threads;
        cfg.update(Json{{"nu", sc.nu}, {"orthonormal", s_orth}});
        results = scenario_json(run_null(c), timing);
        out.text = scenario_table(results);
      } else if (scenario == "consistency") {
        ConsistencyConfig c;
        c.n = s_n.value_or(2000);
        c.q = s_q.value_or(200);
        c.kstar = s_kstar;
        c.tau = s_tau;
        c.selection = sc;
        c.reps = s_reps.value_or(500);
        c.compressed = !s_full;
        c.seed = *s_seed;
        c.threads = common.threads;
        cfg.update(Json{{"nu", sc.nu}, {"kstar", c.kstar}, {"tau", c.tau}, {"beta", consistency_beta(c.n, c.q, c.kstar, c.tau)}});
        results = scenario_json(run_consistency(c), timing);
        out.text = scenario_table(results);
      } else {
        RandomGraphConfig c;
        c.n = s_n.value_or(400);
        c.q = s_q.value_or(100);
        c.graph.alpha = s_alpha;
        c.graph.selection.kmn = s_kmn;
        c.graph.selection.nu = sc.nu;
        c.reps = s_reps.value_or(20);
        c.seed = *s_seed;
        c.threads = common.threads;
        results = random_graph_json(run_random_graph(c), timing);
        out.text = random_graph_table(results);
      }
      out.report = make_report(command, cfg, results, s_seed, elapsed(common, t0));
    }

    if (common.format == "json") {
      std::cout << out.report.dump(2) << "\n";
    } else {
      std::cout << out.text;
    }
    return 0;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
