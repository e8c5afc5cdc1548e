// Copyright (c) the nlrom project developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLROM_ERRORS_HPP
#define NLROM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nlrom {

/// Invalid user input: bad parameter ranges, malformed configs, shape mismatches.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string &msg) : std::invalid_argument(msg) {}
};

/// Pipeline stage invoked out of order or with missing prerequisite artifacts.
class StageError : public std::runtime_error {
 public:
  explicit StageError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Numerical failure: solver non-convergence, NaN loss, residual contract violation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string &msg) : std::runtime_error(msg) {}
};

/// File I/O and format failures: bad magic, truncation, integrity mismatch.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string &msg) : std::runtime_error(msg) {}
};

}  // namespace nlrom

#endif  // NLROM_ERRORS_HPP
