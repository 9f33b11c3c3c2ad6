#pragma once

#include <stdexcept>
#include <string>

namespace heisfan {

/// Raised when an input violates a documented precondition.
class ValidationError : public std::invalid_argument
{
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a requested enumeration would exceed the configured label bound.
class CapacityError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when no common eigenvalue can be found for a mixture of labels.
class AlignmentError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace heisfan
