#pragma once

#include <stdexcept>

namespace lpl {

// Failure taxonomy mirrors the CLI exit codes: validation -> 1, I/O -> 2,
// numerical -> 3.

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lpl
