#pragma once

#include <stdexcept>
#include <string>

namespace gemmed {

// Bad arguments or malformed input data (CLI exit code 2).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed configuration document or inconsistent settings (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical breakdown, e.g. a Gram matrix that cannot be factorized.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A dual-variable or model invariant does not hold.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

// Training terminated without a usable nominal set.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gemmed
