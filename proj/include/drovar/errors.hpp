#pragma once

#include <stdexcept>
#include <string>

namespace drovar {

/// Raised when an input violates a documented precondition (bad lengths,
/// negative weights, eta outside the admissible range, ...).
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The dual objective is +inf at every multistart point.
class InfeasibleStartError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Gradient requested at a point where the objective is infinite or not
/// differentiable.
class NonsmoothPointError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// The brute-force oracle only handles 2 or 3 atoms.
class UnsupportedSizeError : public std::length_error {
public:
  using std::length_error::length_error;
};

}  // namespace drovar
