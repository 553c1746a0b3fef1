#pragma once

// Table of mean null false-positive counts over a grid of (alpha, n, q, nu),
// interpolated multilinearly in (log n, log q, nu).
//
// File layout (whitespace separated, '#' lines are comments):
//   gausscov-fp-table 1
//   n <values...>
//   q <values...>
//   nu <values...>
//   alpha <values...>
//   then one row per (alpha, n, q) in that nesting order:
//   <alpha> <n> <q> <mean for each nu>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gausscov/errors.hpp"

namespace gausscov {

class FpTable {
 public:
  static constexpr int kVersion = 1;

  FpTable() = default;
  FpTable(std::vector<double> n, std::vector<double> q, std::vector<double> nu, std::vector<double> alpha)
      : n_(std::move(n)), q_(std::move(q)), nu_(std::move(nu)), alpha_(std::move(alpha)) {
    check_axis(n_, "n");
    check_axis(q_, "q");
    check_axis(nu_, "nu");
    check_axis(alpha_, "alpha");
    values_.assign(alpha_.size() * n_.size() * q_.size() * nu_.size(), std::numeric_limits<double>::quiet_NaN());
  }

  const std::vector<double>& n_axis() const { return n_; }
  const std::vector<double>& q_axis() const { return q_; }
  const std::vector<double>& nu_axis() const { return nu_; }
  const std::vector<double>& alpha_axis() const { return alpha_; }
  std::vector<std::string>& comments() { return comments_; }

  double& at(std::size_t a, std::size_t i, std::size_t j, std::size_t v) { return values_[offset(a, i, j, v)]; }
  double at(std::size_t a, std::size_t i, std::size_t j, std::size_t v) const { return values_[offset(a, i, j, v)]; }

  bool in_range(double n, double q, double alpha, double nu) const {
    return alpha_index(alpha) >= 0 && n >= n_.front() && n <= n_.back() && q >= q_.front() && q <= q_.back() &&
           nu >= nu_.front() && nu <= nu_.back();
  }

  /// Interpolated mean number of false positives.
  double lookup(double n, double q, double alpha, double nu) const {
    const long a = alpha_index(alpha);
    if (!in_range(n, q, alpha, nu)) {
      std::ostringstream msg;
      msg << "(n=" << n << ", q=" << q << ", alpha=" << alpha << ", nu=" << nu
          << ") lies outside the false-positive table (n in [" << n_.front() << ", " << n_.back() << "], q in ["
          << q_.front() << ", " << q_.back() << "], nu in [" << nu_.front() << ", " << nu_.back()
          << "], alpha in {";
      for (std::size_t i = 0; i < alpha_.size(); ++i) msg << (i ? ", " : "") << alpha_[i];
      msg << "}); run the null simulation instead";
      throw input_error(msg.str());
    }
    const auto [i0, tn] = bracket(n_, n, true);
    const auto [j0, tq] = bracket(q_, q, true);
    const auto [v0, tv] = bracket(nu_, nu, false);
    double out = 0.0;
    for (int di = 0; di < 2; ++di) {
      const double wi = di ? tn : 1.0 - tn;
      if (wi == 0.0) continue;
      for (int dj = 0; dj < 2; ++dj) {
        const double wj = dj ? tq : 1.0 - tq;
        if (wj == 0.0) continue;
        for (int dv = 0; dv < 2; ++dv) {
          const double wv = dv ? tv : 1.0 - tv;
          if (wv == 0.0) continue;
          out += wi * wj * wv * at(static_cast<std::size_t>(a), i0 + di, j0 + dj, v0 + dv);
        }
      }
    }
    return out;
  }

  void save(std::ostream& os) const {
    os << "gausscov-fp-table " << kVersion << "\n";
    for (const auto& c : comments_) os << "# " << c << "\n";
    write_axis(os, "n", n_);
    write_axis(os, "q", q_);
    write_axis(os, "nu", nu_);
    write_axis(os, "alpha", alpha_);
    os << std::setprecision(10);
    for (std::size_t a = 0; a < alpha_.size(); ++a)
      for (std::size_t i = 0; i < n_.size(); ++i)
        for (std::size_t j = 0; j < q_.size(); ++j) {
          os << alpha_[a] << ' ' << n_[i] << ' ' << q_[j];
          for (std::size_t v = 0; v < nu_.size(); ++v) os << ' ' << at(a, i, j, v);
          os << "\n";
        }
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw input_error("cannot write " + path);
    save(os);
  }

  static FpTable load(std::istream& is) {
    std::vector<std::string> lines, comments;
    for (std::string line; std::getline(is, line);) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (line[first] == '#') {
        comments.push_back(line.substr(std::min(line.size(), first + 2)));
        continue;
      }
      lines.push_back(line);
    }
    if (lines.size() < 5) throw input_error("false-positive table is truncated");
    {
      std::istringstream head(lines[0]);
      std::string magic;
      int version = 0;
      head >> magic >> version;
      if (magic != "gausscov-fp-table") throw input_error("not a false-positive table");
      if (version != kVersion) throw input_error("unsupported false-positive table version " + std::to_string(version));
    }
    FpTable t(read_axis(lines[1], "n"), read_axis(lines[2], "q"), read_axis(lines[3], "nu"),
              read_axis(lines[4], "alpha"));
    t.comments_ = std::move(comments);
    const std::size_t rows = t.alpha_.size() * t.n_.size() * t.q_.size();
    if (lines.size() != 5 + rows) throw input_error("false-positive table has the wrong number of rows");
    std::size_t r = 5;
    for (std::size_t a = 0; a < t.alpha_.size(); ++a)
      for (std::size_t i = 0; i < t.n_.size(); ++i)
        for (std::size_t j = 0; j < t.q_.size(); ++j, ++r) {
          std::istringstream row(lines[r]);
          double av, nv, qv;
          if (!(row >> av >> nv >> qv) || !close(av, t.alpha_[a]) || !close(nv, t.n_[i]) || !close(qv, t.q_[j])) {
            throw input_error("false-positive table row " + std::to_string(r + 1) + " does not match the grid");
          }
          for (std::size_t v = 0; v < t.nu_.size(); ++v) {
            if (!(row >> t.at(a, i, j, v)) || !std::isfinite(t.at(a, i, j, v))) {
              throw input_error("false-positive table row " + std::to_string(r + 1) + " is malformed");
            }
          }
        }
    return t;
  }

  static FpTable load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw input_error("cannot open false-positive table " + path);
    return load(is);
  }

 private:
  std::size_t offset(std::size_t a, std::size_t i, std::size_t j, std::size_t v) const {
    return ((a * n_.size() + i) * q_.size() + j) * nu_.size() + v;
  }

  long alpha_index(double alpha) const {
    for (std::size_t a = 0; a < alpha_.size(); ++a)
      if (close(alpha, alpha_[a])) return static_cast<long>(a);
    return -1;
  }

  static bool close(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(std::fabs(a), std::fabs(b)); }

  // Lower node index and weight of the upper node.
  static std::pair<std::size_t, double> bracket(const std::vector<double>& g, double x, bool log_scale) {
    if (g.size() == 1) return {0, 0.0};
    std::size_t i = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin());
    i = std::min(std::max<std::size_t>(i, 1), g.size() - 1) - 1;
    const auto f = [&](double v) { return log_scale ? std::log(v) : v; };
    const double t = (f(x) - f(g[i])) / (f(g[i + 1]) - f(g[i]));
    return {i, std::clamp(t, 0.0, 1.0)};
  }

  static void check_axis(const std::vector<double>& g, const char* name) {
    if (g.empty()) throw input_error(std::string("empty table axis ") + name);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i]) || g[i] <= 0.0 || (i && g[i] <= g[i - 1])) {
        throw input_error(std::string("table axis ") + name + " must be positive and increasing");
      }
    }
  }

  static void write_axis(std::ostream& os, const char* name, const std::vector<double>& g) {
    os << name;
    for (double v : g) os << ' ' << std::setprecision(10) << v;
    os << "\n";
  }

  static std::vector<double> read_axis(const std::string& line, const std::string& name) {
    std::istringstream is(line);
    std::string tag;
    is >> tag;
    if (tag != name) throw input_error("false-positive table: expected axis " + name);
    std::vector<double> g;
    for (double v; is >> v;) g.push_back(v);
    return g;
  }

  std::vector<double> n_, q_, nu_, alpha_;
  std::vector<double> values_;
  std::vector<std::string> comments_;
};

}  // namespace gausscov
