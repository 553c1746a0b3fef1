// Dependency graph of a random geometric graph design, scored against
// the generating edges.

#include <cstdio>
#include <set>
#include <utility>

#include "gausscov/designs.hpp"
#include "gausscov/graph.hpp"

int main() {
  gausscov::SimDesign design;
  design.kind = gausscov::DesignKind::random_graph;
  design.n = 400;
  design.q = 100;
  design.seed = 7;
  const auto sim = gausscov::gen_design(design);

  gausscov::GraphConfig cfg;
  const auto g = gausscov::build_graph(sim.data.X(), cfg);
  const std::set<std::pair<long, long>> truth(sim.edges.begin(), sim.edges.end());
  long hits = 0;
  for (const auto& e : g.undirected) hits += truth.count(e);
  std::printf("true edges %zu  found %zu  correct %ld\n", truth.size(), g.undirected.size(), hits);
  std::fputs(gausscov::export_dot(g, false).c_str(), stdout);
  return 0;
}
