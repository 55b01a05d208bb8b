#pragma once

#include <stdexcept>
#include <string>

namespace trustdyn {

/// Malformed or out-of-range input data: file schema violations, value-range
/// failures, inconsistent logs. Carries a human-readable message that names
/// the offending field, key, or row.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A regression design that cannot identify the requested parameters,
/// e.g. an event type that never occurs or a zero-variance regressor.
class DegenerateDesignError : public ValidationError {
 public:
  explicit DegenerateDesignError(const std::string& what) : ValidationError(what) {}
};

/// Numerical failure inside an otherwise valid computation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// An iteration hit its safety cap without meeting its convergence test.
class NonConvergenceError : public NumericalError {
 public:
  explicit NonConvergenceError(const std::string& what) : NumericalError(what) {}
};

}  // namespace trustdyn
