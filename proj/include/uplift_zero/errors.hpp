#pragma once

#include <stdexcept>
#include <string>

namespace uplift_zero {

// Malformed input: unreadable file, bad JSON, wrong field types.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that breaks a domain invariant (g_min > g_max, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No commitment profile covers demand.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EnumerationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A builder or check was called outside the setting it is defined for.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A candidate redundant constraint is positive somewhere on the feasible set.
class NotRedundantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uplift_zero
