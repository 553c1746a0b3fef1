#pragma once

// CSV ingestion, lagged designs and column standardization.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gausscov/dataset.hpp"
#include "gausscov/errors.hpp"

namespace gausscov {

struct CsvOptions {
  bool strict = false;  ///< missing values are an error instead of dropping the row
};

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  ///< complete rows only
  long dropped_rows = 0;
  std::vector<std::string> warnings;

  long column(const std::string& key) const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Splits one record; double quotes group fields and "" escapes a quote.
/// Embedded newlines are not supported.
inline std::vector<std::string> split_record(const std::string& line, bool whitespace, long lineno) {
  std::vector<std::string> out;
  if (whitespace) {
    std::istringstream is(line);
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
  }
  std::string cur;
  bool quoted = false, was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = was_quoted = true;
    } else if (c == ',') {
      out.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) throw input_error("unterminated quote on line " + std::to_string(lineno));
  out.push_back(was_quoted ? cur : trim(cur));
  return out;
}

inline bool is_missing(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == ".";
}

inline std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads a numeric table with a header row. Comma separated; a header with
/// no comma switches to whitespace separation.
inline CsvTable read_csv(std::istream& in, const CsvOptions& opts = {}) {
  CsvTable t;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw input_error("empty input: a header row is required");
  const bool ws = line.find(',') == std::string::npos;
  t.header = detail::split_record(line, ws, lineno);
  const std::size_t width = t.header.size();
  for (std::size_t j = 0; j < width; ++j) {
    if (t.header[j].empty()) t.header[j] = "V" + std::to_string(j + 1);
  }
  std::vector<double> data;
  long rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_record(line, ws, lineno);
    if (f.size() != width) {
      throw input_error("line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields, expected " +
                        std::to_string(width));
    }
    std::vector<double> row(width);
    bool missing = false;
    for (std::size_t j = 0; j < width; ++j) {
      if (detail::is_missing(f[j])) {
        if (opts.strict) {
          throw input_error("missing value at line " + std::to_string(lineno) + ", column " + std::to_string(j + 1) +
                            " (" + t.header[j] + ")");
        }
        missing = true;
        continue;
      }
      const auto v = detail::parse_number(f[j]);
      if (!v) {
        throw input_error("non-numeric value '" + f[j] + "' at line " + std::to_string(lineno) + ", column " +
                          std::to_string(j + 1) + " (" + t.header[j] + ")");
      }
      row[j] = *v;
    }
    if (missing) {
      ++t.dropped_rows;
      continue;
    }
    data.insert(data.end(), row.begin(), row.end());
    ++rows;
  }
  t.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), rows, static_cast<long>(width));
  if (t.dropped_rows > 0) {
    t.warnings.push_back("dropped " + std::to_string(t.dropped_rows) + " row(s) with missing values");
  }
  return t;
}

inline CsvTable read_csv_file(const std::string& path, const CsvOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  return read_csv(in, opts);
}

/// Column by header name, or by 1-based position when no name matches.
inline long CsvTable::column(const std::string& key) const {
  const auto it = std::find(header.begin(), header.end(), key);
  if (it != header.end()) return static_cast<long>(it - header.begin());
  if (!key.empty() && std::all_of(key.begin(), key.end(), [](unsigned char c) { return std::isdigit(c); })) {
    const long j = std::stol(key);
    if (j >= 1 && j <= static_cast<long>(header.size())) return j - 1;
  }
  throw input_error("no column '" + key + "'");
}

struct LoadedData {
  Dataset data;
  long dropped_rows = 0;
  std::vector<std::string> warnings;
};

/// Response from `y_column` (name or 1-based index); every other column is a covariate.
inline LoadedData dataset_from_table(const CsvTable& t, const std::string& y_column) {
  if (t.header.size() < 2) throw input_error("need a response and at least one covariate column");
  const long yc = t.column(y_column);
  std::vector<std::string> names;
  Eigen::MatrixXd X(t.values.rows(), t.values.cols() - 1);
  for (long j = 0, c = 0; j < t.values.cols(); ++j) {
    if (j == yc) continue;
    X.col(c++) = t.values.col(j);
    names.push_back(t.header[static_cast<std::size_t>(j)]);
  }
  return {Dataset(std::move(X), t.values.col(yc), std::move(names)), t.dropped_rows, t.warnings};
}

inline LoadedData load_csv(const std::string& path, const std::string& y_column = "1", const CsvOptions& opts = {}) {
  return dataset_from_table(read_csv_file(path, opts), y_column);
}

struct LagSpec {
  long max_lag = 1;
  std::vector<std::string> series;  ///< lagged series in column order; empty: target first, then the rest
  std::string target;               ///< empty: first column
};

/// Maps a 0-based lagged column to (series position, lag).
inline std::pair<long, long> lag_position(long column, long max_lag) {
  return {column / max_lag, column % max_lag + 1};
}

/// Lagged design: row t holds every listed series at t-1..t-max_lag, series
/// major and lag minor; y is the target at t. The first max_lag rows are lost.
inline Dataset make_lags(const Eigen::MatrixXd& series, const std::vector<std::string>& names, const LagSpec& spec) {
  const long T = series.rows();
  if (static_cast<long>(names.size()) != series.cols()) throw input_error("series name count does not match the data");
  if (spec.max_lag < 1) throw input_error("max lag must be at least 1");
  if (spec.max_lag >= T) throw input_error("max lag must be below the series length");
  auto find = [&](const std::string& s) {
    const auto it = std::find(names.begin(), names.end(), s);
    if (it == names.end()) throw input_error("unknown series '" + s + "'");
    return static_cast<long>(it - names.begin());
  };
  const long target = spec.target.empty() ? 0 : find(spec.target);
  std::vector<long> order;
  if (spec.series.empty()) {
    order.push_back(target);
    for (long j = 0; j < series.cols(); ++j)
      if (j != target) order.push_back(j);
  } else {
    for (const auto& s : spec.series) order.push_back(find(s));
  }
  const long L = spec.max_lag, n = T - L;
  Eigen::MatrixXd X(n, static_cast<long>(order.size()) * L);
  std::vector<std::string> labels;
  for (std::size_t s = 0; s < order.size(); ++s) {
    for (long lag = 1; lag <= L; ++lag) {
      X.col(static_cast<long>(s) * L + lag - 1) = series.col(order[s]).segment(L - lag, n);
      labels.push_back(names[static_cast<std::size_t>(order[s])] + "_lag" + std::to_string(lag));
    }
  }
  return Dataset(std::move(X), series.col(target).tail(n), std::move(labels));
}

struct Standardized {
  Dataset data;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  ///< sample standard deviation (divisor n - 1)

  /// Coefficients on the standardized columns back to the original units.
  Eigen::VectorXd original_coefficients(const std::vector<long>& subset, const Eigen::VectorXd& b) const {
    Eigen::VectorXd out(b.size());
    for (long i = 0; i < b.size(); ++i) out(i) = b(i) / scale(subset[static_cast<std::size_t>(i)]);
    return out;
  }
};

/// Centers every covariate and scales it to unit sample variance; y is left as is.
inline Standardized standardize(const Dataset& d) {
  const long n = d.n();
  Standardized s;
  s.mean = d.X().colwise().mean().transpose();
  s.scale.resize(d.q());
  Eigen::MatrixXd X = d.X().rowwise() - s.mean.transpose();
  for (long j = 0; j < d.q(); ++j) {
    const double sd = std::sqrt(X.col(j).squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 1e-12 * std::max(1.0, std::fabs(s.mean(j))))) {
      throw input_error("covariate " + d.name(j) + " is constant and cannot be standardized");
    }
    s.scale(j) = sd;
    X.col(j) /= sd;
  }
  s.data = Dataset(std::move(X), d.y(), d.names());
  return s;
}

}  // namespace gausscov
