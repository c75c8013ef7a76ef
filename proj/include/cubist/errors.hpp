#pragma once

#include <stdexcept>
#include <string>

namespace cubist {

/// Malformed or inconsistent input data (files, dimensions, parameters).
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (non-finite values, degenerate systems).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cubist
