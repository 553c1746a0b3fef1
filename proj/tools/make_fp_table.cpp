// Regenerates the shipped false-positive table.

#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gausscov/fp_sim.hpp"
#include "gausscov/fp_table.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Build the null false-positive table"};
  std::string out = "fp_table.txt";
  long reps = 2000;
  std::uint64_t seed = 20240601;
  int threads = gausscov::default_threads();
  app.add_option("-o,--out", out, "output file");
  app.add_option("--reps", reps, "replications per (n, q) cell");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "worker threads");
  CLI11_PARSE(app, argc, argv);

  const std::vector<double> ns{50, 100, 200, 500, 1000, 2000, 5000};
  const std::vector<double> qs{25, 100, 500, 1000, 5000, 20000, 50000};
  const std::vector<long> nus{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<double> alphas{0.01, 0.05};
  std::vector<double> nu_axis(nus.begin(), nus.end());
  gausscov::FpTable table(ns, qs, nu_axis, alphas);
  table.comments().push_back("engine rotational, kmn 0, no final pass, reps " + std::to_string(reps) + ", seed " +
                             std::to_string(seed));

  std::uint64_t cell = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    for (std::size_t j = 0; j < qs.size(); ++j, ++cell) {
      const auto t0 = std::chrono::steady_clock::now();
      gausscov::FpSimConfig cfg;
      cfg.n = static_cast<long>(ns[i]);
      cfg.q = static_cast<long>(qs[j]);
      cfg.nsim = reps;
      cfg.seed = seed + 1000003 * cell;
      cfg.threads = threads;
      const auto hs = gausscov::simulate_fp_grid(cfg, alphas, nus);
      for (std::size_t a = 0; a < alphas.size(); ++a)
        for (std::size_t v = 0; v < nus.size(); ++v) table.at(a, i, j, v) = hs[a * nus.size() + v].mean;
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cerr << "n=" << cfg.n << " q=" << cfg.q << " " << secs << "s\n";
    }
  }
  table.save(out);
  return 0;
}
