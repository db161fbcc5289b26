#pragma once

#include <stdexcept>
#include <string>

namespace polsq {

/// Bad inputs: parameter domain violations, malformed specs/files,
/// degenerate (zero-trace) correlation records. CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not reach its requested accuracy. Raised
/// instead of returning a silently wrong value. CLI exit code 3.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polsq
