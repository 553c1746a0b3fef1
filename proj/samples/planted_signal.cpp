// Toeplitz design with a planted signal: f1st at nu = 1 and nu = 5,
// then the confidence region of the selected subset.

#include <cstdio>
#include <set>

#include "gausscov/designs.hpp"
#include "gausscov/regions.hpp"
#include "gausscov/selection.hpp"

int main() {
  gausscov::SimDesign design;
  design.n = 400;
  design.q = 300;
  design.p_active = 8;
  design.amplitude = 9.0;
  design.seed = 42;
  const auto sim = gausscov::gen_design(design);
  const std::set<long> truth(sim.truth.begin(), sim.truth.end());

  for (long nu : {1L, 5L}) {
    gausscov::SelectionConfig cfg;
    cfg.nu = nu;
    const auto trace = gausscov::f1st(sim.data, cfg);
    long hits = 0;
    for (long j : trace.chosen) hits += truth.count(j);
    std::printf("nu=%ld  selected %zu  true %ld of %zu  rss %.4g\n", nu, trace.chosen.size(), hits, truth.size(),
                trace.rss);
    if (nu == 1 && !trace.empty()) {
      const auto iv = gausscov::intervals(sim.data, trace.chosen, 0.01);
      for (const auto& i : iv) std::printf("  x%-4ld %9.4f  [%9.4f, %9.4f]\n", i.index + 1, i.center, i.lower(), i.upper());
    }
  }
  return 0;
}
