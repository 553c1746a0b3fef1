#pragma once

// Run reports: versioned JSON plus plain-text tables with the same numbers.
// Covariate indices are 1-based in every report.

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gausscov/fp_sim.hpp"
#include "gausscov/graph.hpp"
#include "gausscov/regions.hpp"
#include "gausscov/scenarios.hpp"
#include "gausscov/selection.hpp"
#include "gausscov/subsets.hpp"

namespace gausscov {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "gausscov.report/1";

/// Six significant digits, the precision of every P-value in a table.
inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace detail {

inline std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

inline std::string render(const std::vector<std::string>& head, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    w[c] = head[c].size();
    for (const auto& r : rows) w[c] = std::max(w[c], r[c].size());
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    std::string out;
    for (std::size_t c = 0; c < r.size(); ++c) out += (c ? "  " : "") + (c + 1 < r.size() ? pad(r[c], w[c]) : r[c]);
    os << out << "\n";
  };
  line(head);
  for (const auto& r : rows) line(r);
  return os.str();
}

inline const std::string& name_of(const std::vector<std::string>& names, long j) {
  return names.at(static_cast<std::size_t>(j));
}

}  // namespace detail

inline Json trace_json(const SelectionTrace& t, const std::vector<std::string>& names, bool intercept_coef = false) {
  Json chosen = Json::array();
  const long off = intercept_coef ? 1 : 0;
  for (std::size_t i = 0; i < t.chosen.size(); ++i) {
    Json c;
    c["index"] = t.chosen[i] + 1;
    c["name"] = detail::name_of(names, t.chosen[i]);
    c["pvalue"] = i < t.final_pvalues.size() ? t.final_pvalues[i] : 1.0;
    c["coefficient"] = t.coeffs.size() > static_cast<long>(i) + off ? t.coeffs(static_cast<long>(i) + off) : 0.0;
    chosen.push_back(c);
  }
  Json steps = Json::array();
  for (const auto& s : t.steps) {
    steps.push_back(Json{{"index", s.index + 1}, {"name", detail::name_of(names, s.index)}, {"pvalue", s.pvalue},
                         {"rss", s.rss}});
  }
  Json j;
  j["chosen"] = chosen;
  j["steps"] = steps;
  if (intercept_coef && t.coeffs.size() > 0) j["intercept"] = t.coeffs(0);
  j["rss"] = t.rss;
  j["rss_null"] = t.rss_null;
  j["termination"] = to_string(t.reason);
  j["final_pass_applied"] = t.final_pass_applied;
  j["asymptotic"] = t.asymptotic;
  j["warnings"] = t.warnings;
  return j;
}

inline std::string trace_table(const Json& t) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : t["chosen"]) {
    rows.push_back({std::to_string(c["index"].get<long>()), c["name"].get<std::string>(), fmt6(c["pvalue"].get<double>()),
                    fmt6(c["coefficient"].get<double>())});
  }
  std::ostringstream os;
  os << detail::render({"index", "name", "pvalue", "coefficient"}, rows);
  os << "rss " << fmt6(t["rss"].get<double>()) << "  (empty model " << fmt6(t["rss_null"].get<double>()) << ")  "
     << t["termination"].get<std::string>() << (t["asymptotic"].get<bool>() ? "  asymptotic P-values" : "") << "\n";
  std::vector<std::vector<std::string>> steps;
  for (const auto& s : t["steps"]) {
    steps.push_back({std::to_string(s["index"].get<long>()), s["name"].get<std::string>(), fmt6(s["pvalue"].get<double>()),
                     fmt6(s["rss"].get<double>())});
  }
  if (!steps.empty()) os << "steps\n" << detail::render({"index", "name", "pvalue", "rss"}, steps);
  for (const auto& w : t["warnings"]) os << "warning: " << w.get<std::string>() << "\n";
  return os.str();
}

inline Json approximations_json(const std::vector<SubsetApproximation>& approx, const std::vector<std::string>& names) {
  Json out = Json::array();
  for (const auto& a : approx) {
    Json members = Json::array();
    for (std::size_t i = 0; i < a.indices.size(); ++i) {
      members.push_back(Json{{"index", a.indices[i] + 1},
                             {"name", detail::name_of(names, a.indices[i])},
                             {"pvalue", i < a.pvalues.size() ? a.pvalues[i] : 1.0}});
    }
    out.push_back(Json{{"rss", a.rss}, {"members", members}});
  }
  return out;
}

inline std::string approximations_table(const Json& approx) {
  std::vector<std::vector<std::string>> rows;
  long rank = 0;
  for (const auto& a : approx) {
    std::string idx, ps;
    for (const auto& m : a["members"]) {
      idx += (idx.empty() ? "" : ",") + std::to_string(m["index"].get<long>());
      ps += (ps.empty() ? "" : ",") + fmt6(m["pvalue"].get<double>());
    }
    rows.push_back({std::to_string(++rank), fmt6(a["rss"].get<double>()), idx, ps});
  }
  return detail::render({"rank", "rss", "covariates", "pvalues"}, rows);
}

inline Json region_json(const ApproxRegion& r, const std::vector<ApproxInterval>& iv, const std::vector<std::string>& names) {
  Json ints = Json::array();
  for (const auto& i : iv) {
    ints.push_back(Json{{"index", i.index + 1},
                        {"name", detail::name_of(names, i.index)},
                        {"center", i.center},
                        {"half_width", i.half_width},
                        {"lower", i.lower()},
                        {"upper", i.upper()}});
  }
  Json sub = Json::array();
  for (long j : r.subset) sub.push_back(j + 1);
  return Json{{"subset", sub},      {"alpha", r.alpha}, {"n", r.n}, {"k", r.k}, {"rss_ls", r.rss_ls},
              {"radius_rss", r.radius_rss}, {"intervals", ints}};
}

inline std::string region_table(const Json& r) {
  std::ostringstream os;
  os << "rss " << fmt6(r["rss_ls"].get<double>()) << "  region radius " << fmt6(r["radius_rss"].get<double>())
     << "  alpha " << fmt6(r["alpha"].get<double>()) << "\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& i : r["intervals"]) {
    rows.push_back({std::to_string(i["index"].get<long>()), i["name"].get<std::string>(), fmt6(i["center"].get<double>()),
                    fmt6(i["lower"].get<double>()), fmt6(i["upper"].get<double>())});
  }
  os << detail::render({"index", "name", "coefficient", "lower", "upper"}, rows);
  return os.str();
}

inline Json histogram_json(const FpHistogram& h) {
  Json counts = Json::array();
  for (const auto& [c, f] : h.counts) counts.push_back(Json{{"count", c}, {"frequency", f}});
  return Json{{"n", h.n},       {"q", h.q},   {"alpha", h.alpha},       {"nu", h.nu},
              {"nsim", h.nsim}, {"seed", h.seed}, {"per_covariate", h.per_covariate}, {"mean", h.mean},
              {"sd", h.sd},     {"histogram", counts}};
}

inline std::string histogram_table(const Json& list) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& h : list) {
    std::string hist;
    if (h.contains("histogram")) {
      for (const auto& c : h["histogram"]) {
        hist += (hist.empty() ? "" : " ") + std::to_string(c["count"].get<long>()) + ":" + fmt6(c["frequency"].get<double>());
      }
    }
    rows.push_back({std::to_string(h["n"].get<long>()), std::to_string(h["q"].get<long>()), fmt6(h["alpha"].get<double>()),
                    std::to_string(h["nu"].get<long>()), fmt6(h["mean"].get<double>()),
                    h.contains("sd") ? fmt6(h["sd"].get<double>()) : "-", hist.empty() ? "-" : hist});
  }
  return detail::render({"n", "q", "alpha", "nu", "mean", "sd", "histogram"}, rows);
}

inline Json graph_json(const DependencyGraph& g) {
  Json directed = Json::array();
  for (const auto& e : g.directed) {
    directed.push_back(Json{{"source", e.source + 1}, {"target", e.target + 1}, {"pvalue", e.pvalue}});
  }
  Json undirected = Json::array();
  for (const auto& [a, b] : g.undirected) undirected.push_back(Json::array({a + 1, b + 1}));
  return Json{{"nodes", g.names}, {"directed", directed}, {"undirected", undirected}, {"warnings", g.warnings}};
}

inline std::string graph_table(const Json& g) {
  std::vector<std::vector<std::string>> rows;
  const auto& names = g["nodes"];
  for (const auto& e : g["directed"]) {
    rows.push_back({names[e["source"].get<std::size_t>() - 1].get<std::string>(),
                    names[e["target"].get<std::size_t>() - 1].get<std::string>(), fmt6(e["pvalue"].get<double>())});
  }
  std::ostringstream os;
  os << detail::render({"source", "target", "pvalue"}, rows);
  os << g["undirected"].size() << " undirected edge(s)\n";
  for (const auto& w : g["warnings"]) os << "warning: " << w.get<std::string>() << "\n";
  return os.str();
}

inline Json scenario_json(const ScenarioResult& r, bool timing) {
  Json rules = Json::array();
  for (const auto& s : r.rules) {
    Json j{{"rule", s.label},
           {"nu", s.nu},
           {"alpha", s.alpha},
           {"reps", s.reps},
           {"fp_mean", s.fp_mean},
           {"fp_sd", s.fp_sd},
           {"fn_mean", s.fn_mean},
           {"fn_sd", s.fn_sd},
           {"selected_mean", s.selected_mean},
           {"nonempty_rate", s.nonempty_rate},
           {"recovery_rate", s.recovery_rate},
           {"strict_superset_rate", s.strict_superset_rate}};
    if (timing) j["seconds_per_rep"] = s.seconds_mean;
    rules.push_back(j);
  }
  return Json{{"scenario", r.scenario}, {"n", r.n}, {"q", r.q}, {"reps", r.reps}, {"seed", r.seed}, {"rules", rules}};
}

inline std::string scenario_table(const Json& r) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : r["rules"]) {
    rows.push_back({s["rule"].get<std::string>(), fmt6(s["fp_mean"].get<double>()), fmt6(s["fp_sd"].get<double>()),
                    fmt6(s["fn_mean"].get<double>()), fmt6(s["fn_sd"].get<double>()),
                    fmt6(s["nonempty_rate"].get<double>()), fmt6(s["recovery_rate"].get<double>()),
                    s.contains("seconds_per_rep") ? fmt6(s["seconds_per_rep"].get<double>()) : "-"});
  }
  std::ostringstream os;
  os << r["scenario"].get<std::string>() << "  n " << r["n"].get<long>() << "  q " << r["q"].get<long>() << "  reps "
     << r["reps"].get<long>() << "  seed " << r["seed"].get<std::uint64_t>() << "\n";
  os << detail::render({"rule", "fp", "fp_sd", "fn", "fn_sd", "nonempty", "recovery", "sec/rep"}, rows);
  return os.str();
}

inline Json random_graph_json(const RandomGraphResult& r, bool timing) {
  Json reps = Json::array();
  for (const auto& s : r.per_rep) {
    Json j{{"true_edges", s.true_edges}, {"found", s.found}, {"fp", s.fp}, {"fn", s.fn}};
    if (timing) j["seconds"] = s.seconds;
    reps.push_back(j);
  }
  Json out{{"scenario", "randomgraph"}, {"n", r.n},       {"q", r.q},
           {"reps", r.reps},           {"seed", r.seed}, {"true_edges_mean", r.true_edges_mean},
           {"fp_mean", r.fp_mean},     {"fn_mean", r.fn_mean}, {"recall_mean", r.recall_mean}};
  if (timing) out["seconds_per_rep"] = r.seconds_mean;
  out["replications"] = reps;
  return out;
}

inline std::string random_graph_table(const Json& r) {
  std::ostringstream os;
  os << "randomgraph  n " << r["n"].get<long>() << "  q " << r["q"].get<long>() << "  reps " << r["reps"].get<long>()
     << "  seed " << r["seed"].get<std::uint64_t>() << "\n";
  os << detail::render({"true_edges", "fp", "fn", "recall", "sec/rep"},
                       {{fmt6(r["true_edges_mean"].get<double>()), fmt6(r["fp_mean"].get<double>()),
                         fmt6(r["fn_mean"].get<double>()), fmt6(r["recall_mean"].get<double>()),
                         r.contains("seconds_per_rep") ? fmt6(r["seconds_per_rep"].get<double>()) : "-"}});
  return os.str();
}

/// Report envelope. `command` is the argument vector that reproduces the run.
inline Json make_report(const std::vector<std::string>& command, const Json& config, const Json& results,
                        std::optional<std::uint64_t> seed = std::nullopt, std::optional<double> seconds = std::nullopt) {
  Json r;
  r["schema"] = kReportSchema;
  r["command"] = command;
  r["config"] = config;
  if (seed) r["seed"] = *seed;
  r["results"] = results;
  if (seconds) r["timing"] = Json{{"seconds", *seconds}};
  return r;
}

}  // namespace gausscov
