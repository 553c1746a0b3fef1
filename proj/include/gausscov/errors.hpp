#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace gausscov {

/// Bad user input: malformed files, invalid parameters, unsupported sizes.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge or lost accuracy beyond repair.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void warn(const std::string& msg) { std::clog << "gausscov: warning: " << msg << '\n'; }

}  // namespace detail
}  // namespace gausscov
