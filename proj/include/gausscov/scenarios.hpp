#pragma once

// Replicated simulations scored against a known truth: planted Toeplitz
// signals, pure noise, random graphs and orthonormal consistency checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gausscov/designs.hpp"
#include "gausscov/errors.hpp"
#include "gausscov/graph.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/selection.hpp"

namespace gausscov {

/// Per-replication outcome of one selection rule.
struct RepOutcome {
  long fp = 0;
  long fn = 0;
  long selected = 0;
  double seconds = 0.0;
};

struct RuleSummary {
  std::string label;
  long nu = 1;
  double alpha = 0.01;
  long reps = 0;
  double fp_mean = 0.0, fp_sd = 0.0;
  double fn_mean = 0.0, fn_sd = 0.0;
  double selected_mean = 0.0;
  double nonempty_rate = 0.0;   ///< fraction of replications selecting anything
  double recovery_rate = 0.0;   ///< fraction with truth contained in the selection
  double strict_superset_rate = 0.0;  ///< fraction with truth strictly contained
  double seconds_mean = 0.0;
};

struct ScenarioResult {
  std::string scenario;
  std::uint64_t seed = 0;
  long reps = 0;
  long n = 0;
  long q = 0;
  std::vector<RuleSummary> rules;
};

namespace detail {

inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
}

inline RepOutcome score(const std::vector<long>& chosen, const std::vector<long>& truth) {
  std::set<long> t(truth.begin(), truth.end());
  RepOutcome o;
  o.selected = static_cast<long>(chosen.size());
  for (long j : chosen) o.fp += t.count(j) ? 0 : 1;
  o.fn = static_cast<long>(truth.size()) - (o.selected - o.fp);
  return o;
}

inline RuleSummary summarize(std::string label, long nu, double alpha, const std::vector<RepOutcome>& outs) {
  RuleSummary s;
  s.label = std::move(label);
  s.nu = nu;
  s.alpha = alpha;
  s.reps = static_cast<long>(outs.size());
  std::vector<double> fp, fn;
  double sel = 0, nonempty = 0, rec = 0, sup = 0, sec = 0;
  for (const auto& o : outs) {
    fp.push_back(static_cast<double>(o.fp));
    fn.push_back(static_cast<double>(o.fn));
    sel += static_cast<double>(o.selected);
    nonempty += o.selected > 0;
    rec += o.fn == 0;
    sup += o.fn == 0 && o.fp > 0;
    sec += o.seconds;
  }
  const double r = std::max<double>(1.0, static_cast<double>(outs.size()));
  std::tie(s.fp_mean, s.fp_sd) = mean_sd(fp);
  std::tie(s.fn_mean, s.fn_sd) = mean_sd(fn);
  s.selected_mean = sel / r;
  s.nonempty_rate = nonempty / r;
  s.recovery_rate = rec / r;
  s.strict_superset_rate = sup / r;
  s.seconds_mean = sec / r;
  return s;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Runs f1st under each nu on replications of `design`.
inline ScenarioResult run_selection_scenario(std::string name, const SimDesign& design, const SelectionConfig& base,
                                             const std::vector<long>& nus, long reps, int threads, bool center) {
  if (reps < 1) throw input_error("need at least one replication");
  if (nus.empty()) throw input_error("need at least one nu");
  SelectionConfig cfg = base;
  cfg.threads = 1;
  for (long nu : nus) {
    cfg.nu = nu;
    cfg.validate();
  }
  std::vector<std::vector<RepOutcome>> outs(nus.size(), std::vector<RepOutcome>(static_cast<std::size_t>(reps)));
  parallel_for(reps, threads, [&](long r) {
    auto sim = gen_design(design, static_cast<std::uint64_t>(r));
    const Dataset data = center ? sim.data.centered_copy() : sim.data;
    for (std::size_t v = 0; v < nus.size(); ++v) {
      SelectionConfig c = cfg;
      c.nu = nus[v];
      const auto t0 = std::chrono::steady_clock::now();
      const auto trace = f1st(data, c);
      RepOutcome o = score(trace.chosen, sim.truth);
      o.seconds = seconds_since(t0);
      outs[v][static_cast<std::size_t>(r)] = o;
    }
  });
  ScenarioResult res;
  res.scenario = std::move(name);
  res.seed = design.seed;
  res.reps = reps;
  res.n = design.n;
  res.q = design.q;
  for (std::size_t v = 0; v < nus.size(); ++v) {
    res.rules.push_back(summarize("f1st nu=" + std::to_string(nus[v]), nus[v], cfg.alpha, outs[v]));
  }
  return res;
}

}  // namespace detail

struct Tutorial1Config {
  long n = 1000, q = 1000, p = 60;
  double amplitude = 4.5, rho = 0.25;
  SelectionConfig selection;  ///< kmn 0 by default; nu is taken from `nus`
  std::vector<long> nus{1, 5, 10};
  long reps = 10;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Toeplitz covariates, p active with coefficient amplitude / sqrt(n).
inline ScenarioResult run_tutorial1(const Tutorial1Config& c) {
  SimDesign d;
  d.kind = DesignKind::toeplitz;
  d.n = c.n;
  d.q = c.q;
  d.p_active = c.p;
  d.amplitude = c.amplitude;
  d.rho = c.rho;
  d.seed = c.seed;
  return detail::run_selection_scenario("tutorial1", d, c.selection, c.nus, c.reps, c.threads, false);
}

struct NullConfig {
  long n = 500, q = 500;
  SelectionConfig selection;
  long reps = 1000;
  bool orthonormal = false;  ///< compressed orthonormal design instead of Gaussian covariates
  std::uint64_t seed = 1;
  int threads = 1;
};

/// No signal: every selection is a false positive.
inline ScenarioResult run_null(const NullConfig& c) {
  SimDesign d;
  d.kind = c.orthonormal ? DesignKind::orthonormal : DesignKind::null;
  d.n = c.n;
  d.q = c.q;
  d.p_active = 0;
  d.seed = c.seed;
  return detail::run_selection_scenario("null", d, c.selection, {c.selection.nu}, c.reps, c.threads, false);
}

struct ConsistencyConfig {
  long n = 2000, q = 200, kstar = 5;
  double tau = 3.0;
  SelectionConfig selection;
  long reps = 500;
  bool compressed = true;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Orthonormal design with kstar equal coefficients at the signal bound.
inline ScenarioResult run_consistency(const ConsistencyConfig& c) {
  SimDesign d;
  d.kind = DesignKind::orthonormal;
  d.n = c.n;
  d.q = c.q;
  d.p_active = c.kstar;
  d.amplitude = consistency_beta(c.n, c.q, c.kstar, c.tau);
  d.compressed = c.compressed;
  d.seed = c.seed;
  return detail::run_selection_scenario("consistency", d, c.selection, {c.selection.nu}, c.reps, c.threads, false);
}

struct RandomGraphConfig {
  long n = 400, q = 100;
  GraphConfig graph;
  long reps = 20;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct GraphScore {
  long true_edges = 0;
  long found = 0;
  long fp = 0;
  long fn = 0;
  double seconds = 0.0;
};

struct RandomGraphResult {
  std::uint64_t seed = 0;
  long reps = 0, n = 0, q = 0;
  std::vector<GraphScore> per_rep;
  double true_edges_mean = 0.0, fp_mean = 0.0, fn_mean = 0.0, recall_mean = 0.0, seconds_mean = 0.0;
};

/// Undirected graph from per-node regressions against the generating graph.
inline RandomGraphResult run_random_graph(const RandomGraphConfig& c) {
  if (c.reps < 1) throw input_error("need at least one replication");
  SimDesign d;
  d.kind = DesignKind::random_graph;
  d.n = c.n;
  d.q = c.q;
  d.seed = c.seed;
  RandomGraphResult res;
  res.seed = c.seed;
  res.reps = c.reps;
  res.n = c.n;
  res.q = c.q;
  res.per_rep.resize(static_cast<std::size_t>(c.reps));
  GraphConfig g = c.graph;
  g.threads = 1;
  parallel_for(c.reps, c.threads, [&](long r) {
    const auto sim = gen_design(d, static_cast<std::uint64_t>(r));
    const auto t0 = std::chrono::steady_clock::now();
    const auto graph = build_graph(sim.data.X(), g);
    GraphScore s;
    s.seconds = detail::seconds_since(t0);
    const std::set<std::pair<long, long>> truth(sim.edges.begin(), sim.edges.end());
    s.true_edges = static_cast<long>(truth.size());
    s.found = static_cast<long>(graph.undirected.size());
    for (const auto& e : graph.undirected) s.fp += truth.count(e) ? 0 : 1;
    s.fn = s.true_edges - (s.found - s.fp);
    res.per_rep[static_cast<std::size_t>(r)] = s;
  });
  double recall = 0;
  for (const auto& s : res.per_rep) {
    res.true_edges_mean += static_cast<double>(s.true_edges);
    res.fp_mean += static_cast<double>(s.fp);
    res.fn_mean += static_cast<double>(s.fn);
    res.seconds_mean += s.seconds;
    recall += s.true_edges ? static_cast<double>(s.true_edges - s.fn) / static_cast<double>(s.true_edges) : 1.0;
  }
  const double r = static_cast<double>(c.reps);
  res.true_edges_mean /= r;
  res.fp_mean /= r;
  res.fn_mean /= r;
  res.seconds_mean /= r;
  res.recall_mean = recall / r;
  return res;
}

}  // namespace gausscov
