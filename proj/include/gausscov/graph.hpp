#pragma once

// Dependency graphs: each column is regressed on the others and an arrow
// j -> i is drawn when x_j is chosen for x_i.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gausscov/dataset.hpp"
#include "gausscov/errors.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/selection.hpp"

namespace gausscov {

enum class GraphMethod { f1st, f2st, f3st };

inline GraphMethod parse_graph_method(const std::string& s) {
  if (s == "f1st") return GraphMethod::f1st;
  if (s == "f2st") return GraphMethod::f2st;
  if (s == "f3st") return GraphMethod::f3st;
  throw input_error("unknown graph method '" + s + "' (expected f1st, f2st or f3st)");
}

struct GraphEdge {
  long source = -1;  ///< selected covariate
  long target = -1;  ///< regressed covariate
  double pvalue = 1.0;

  bool operator==(const GraphEdge& o) const { return source == o.source && target == o.target; }
};

struct DependencyGraph {
  long q = 0;
  std::vector<std::string> names;
  std::vector<GraphEdge> directed;             ///< ordered by target, then source
  std::vector<std::pair<long, long>> undirected;  ///< (a, b) with a < b, sorted
  std::vector<std::string> warnings;

  /// Rebuilds the undirected set from the directed edges and sorts both.
  void normalize() {
    std::sort(directed.begin(), directed.end(), [](const GraphEdge& a, const GraphEdge& b) {
      return a.target != b.target ? a.target < b.target : a.source < b.source;
    });
    std::set<std::pair<long, long>> pairs;
    for (const auto& e : directed) pairs.emplace(std::min(e.source, e.target), std::max(e.source, e.target));
    undirected.assign(pairs.begin(), pairs.end());
  }

  bool has_undirected(long a, long b) const {
    return std::binary_search(undirected.begin(), undirected.end(), std::make_pair(std::min(a, b), std::max(a, b)));
  }
};

struct GraphConfig {
  double alpha = 0.01;
  GraphMethod method = GraphMethod::f1st;
  SelectionConfig selection;   ///< nu, kmn, m, final pass; its alpha is ignored
  bool divide_alpha = true;    ///< cut-off alpha / q for each regression
  bool center = false;         ///< center the columns (intercept in every regression)
  int threads = 1;
};

inline DependencyGraph build_graph(const Eigen::MatrixXd& X, const GraphConfig& cfg,
                                   std::vector<std::string> names = {}) {
  const long q = X.cols();
  if (q < 2) throw input_error("a graph needs at least two columns");
  if (X.rows() < 3) throw input_error("a graph needs at least three rows");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw input_error("alpha must lie in (0,1)");
  Dataset base(X, X.col(0), std::move(names));
  if (cfg.center) base = base.centered_copy();

  SelectionConfig sel = cfg.selection;
  sel.alpha = cfg.divide_alpha ? cfg.alpha / static_cast<double>(q) : cfg.alpha;
  sel.threads = 1;
  sel.validate();

  std::vector<std::vector<GraphEdge>> per_node(static_cast<std::size_t>(q));
  std::vector<std::string> failures(static_cast<std::size_t>(q));
  parallel_for(q, cfg.threads, [&](long i) {
    const Dataset d = base.with_response(base.X().col(i));
    const std::vector<long> self{i};
    std::map<long, double> found;
    auto note = [&](long j, double p) {
      const auto it = found.find(j);
      if (it == found.end() || p < it->second) found[j] = p;
    };
    try {
      switch (cfg.method) {
        case GraphMethod::f1st: {
          const auto t = f1st(d, sel, self);
          if (!t.warnings.empty()) throw numerical_error(t.warnings.front());
          for (std::size_t c = 0; c < t.chosen.size(); ++c) note(t.chosen[c], t.final_pvalues[c]);
          break;
        }
        case GraphMethod::f2st:
          for (const auto& t : f2st(d, sel, self))
            for (std::size_t c = 0; c < t.chosen.size(); ++c) note(t.chosen[c], t.final_pvalues[c]);
          break;
        case GraphMethod::f3st:
          for (const auto& a : f3st(d, sel, self))
            for (std::size_t c = 0; c < a.indices.size(); ++c) note(a.indices[c], a.pvalues[c]);
          break;
      }
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
      found.clear();
    }
    for (const auto& [j, p] : found) per_node[static_cast<std::size_t>(i)].push_back(GraphEdge{j, i, p});
  });

  DependencyGraph g;
  g.q = q;
  g.names = base.names();
  for (long i = 0; i < q; ++i) {
    const auto& edges = per_node[static_cast<std::size_t>(i)];
    g.directed.insert(g.directed.end(), edges.begin(), edges.end());
    if (!failures[static_cast<std::size_t>(i)].empty()) {
      g.warnings.push_back("node " + g.names[static_cast<std::size_t>(i)] + ": " + failures[static_cast<std::size_t>(i)]);
    }
  }
  g.normalize();
  return g;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string dot_id(const std::string& s) {
  const bool numeral = !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
  const bool plain = !s.empty() && !std::isdigit(static_cast<unsigned char>(s[0])) &&
                     std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
  if (numeral || plain) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Tab-separated edge list. Header lines:
///   # gausscov graph v1 directed|undirected
///   # nodes <name>\t<name>...
/// then "source\ttarget\tpvalue" rows (undirected rows list the pair once,
/// lower index first, with the smaller of the two P-values).
inline std::string export_edge_list(const DependencyGraph& g, bool directed = true) {
  std::ostringstream os;
  os << "# gausscov graph v1 " << (directed ? "directed" : "undirected") << "\n# nodes";
  for (std::size_t i = 0; i < g.names.size(); ++i) os << (i ? '\t' : ' ') << g.names[i];
  os << "\n";
  if (directed) {
    for (const auto& e : g.directed) {
      os << g.names[static_cast<std::size_t>(e.source)] << '\t' << g.names[static_cast<std::size_t>(e.target)] << '\t'
         << detail::format_double(e.pvalue) << "\n";
    }
  } else {
    std::map<std::pair<long, long>, double> best;
    for (const auto& e : g.directed) {
      const auto key = std::make_pair(std::min(e.source, e.target), std::max(e.source, e.target));
      const auto it = best.find(key);
      if (it == best.end() || e.pvalue < it->second) best[key] = e.pvalue;
    }
    for (const auto& [key, p] : best) {
      os << g.names[static_cast<std::size_t>(key.first)] << '\t' << g.names[static_cast<std::size_t>(key.second)]
         << '\t' << detail::format_double(p) << "\n";
    }
  }
  return os.str();
}

inline std::string export_dot(const DependencyGraph& g, bool directed = true) {
  std::ostringstream os;
  os << (directed ? "digraph" : "graph") << " gausscov {\n";
  const char* arrow = directed ? " -> " : " -- ";
  if (directed) {
    for (const auto& e : g.directed) {
      os << "  " << detail::dot_id(g.names[static_cast<std::size_t>(e.source)]) << arrow
         << detail::dot_id(g.names[static_cast<std::size_t>(e.target)]) << ";\n";
    }
  } else {
    for (const auto& [a, b] : g.undirected) {
      os << "  " << detail::dot_id(g.names[static_cast<std::size_t>(a)]) << arrow
         << detail::dot_id(g.names[static_cast<std::size_t>(b)]) << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

/// Reads the edge-list format written by export_edge_list.
inline DependencyGraph parse_edge_list(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw input_error("empty graph file");
  bool directed;
  if (line == "# gausscov graph v1 directed") {
    directed = true;
  } else if (line == "# gausscov graph v1 undirected") {
    directed = false;
  } else {
    throw input_error("unrecognized graph header: " + line);
  }
  if (!std::getline(is, line) || line.rfind("# nodes", 0) != 0) throw input_error("graph file lacks a node line");
  DependencyGraph g;
  std::map<std::string, long> index;
  if (line.size() > 8) {
    std::istringstream ns(line.substr(8));
    for (std::string name; std::getline(ns, name, '\t');) {
      if (!index.emplace(name, static_cast<long>(g.names.size())).second) throw input_error("duplicate node " + name);
      g.names.push_back(name);
    }
  }
  g.q = static_cast<long>(g.names.size());
  long lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, p;
    if (!std::getline(ls, a, '\t') || !std::getline(ls, b, '\t') || !std::getline(ls, p)) {
      throw input_error("malformed edge on line " + std::to_string(lineno));
    }
    const auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end() || ib == index.end()) throw input_error("unknown node on line " + std::to_string(lineno));
    if (ia->second == ib->second) throw input_error("self-loop on line " + std::to_string(lineno));
    double pv;
    try {
      pv = std::stod(p);
    } catch (const std::exception&) {
      throw input_error("bad P-value on line " + std::to_string(lineno));
    }
    g.directed.push_back(GraphEdge{ia->second, ib->second, pv});
    if (!directed) g.directed.push_back(GraphEdge{ib->second, ia->second, pv});
  }
  g.normalize();
  return g;
}

}  // namespace gausscov
