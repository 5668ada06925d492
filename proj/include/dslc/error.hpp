#pragma once

#include <stdexcept>
#include <string>

namespace dslc {

/// Raised when caller-supplied data violates a documented precondition
/// (bad config values, malformed files, invalid graph structure).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a well-formed request cannot be carried out (numerical
/// breakdown, enumeration caps, I/O failures).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dslc
