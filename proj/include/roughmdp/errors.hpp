#pragma once

#include <stdexcept>
#include <string>

namespace roughmdp {

/// Bad user input: rejected parameters, malformed configs, shape mismatches.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Computation left the trustworthy regime: non-finite state, failed
/// PSD/consistency checks, degenerate variances.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem / stream failures.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace roughmdp
