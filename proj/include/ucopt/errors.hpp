#pragma once

#include <stdexcept>
#include <string>

namespace ucopt {

/// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation
/// (negative radius, query beyond a model's radius range, ...).
struct DomainError : Error {
  using Error::Error;
};

/// Ill-formed object: non-monotone table, non-SPD norm matrix,
/// inconsistent dimensions, bad parameter combination.
struct ConfigError : Error {
  using Error::Error;
};

/// Iterative routine failed to reach its tolerance.
struct NumericalError : Error {
  using Error::Error;
};

/// Requested accuracy is not reachable for the given model/radius range.
struct UnattainableAccuracyError : Error {
  using Error::Error;
};

/// Structurally valid request that this implementation does not support
/// (e.g. a prox geometry / regularizer pair with no closed-form solve).
struct CapabilityError : Error {
  using Error::Error;
};

/// Unknown problem name or bad parameters for a catalog instance.
struct CatalogError : Error {
  using Error::Error;
};

/// Objective oracle returned a non-finite value where a finite one is required.
struct OracleError : Error {
  using Error::Error;
};

/// Backtracking/doubling search exceeded its per-iteration cap.
struct LineSearchError : Error {
  LineSearchError(const std::string& what, int doublings)
      : Error(what), doublings_tried(doublings) {}
  int doublings_tried;
};

/// An online certificate that must hold by construction failed; indicates
/// a bug or a genuinely invalid configuration, never silently ignored.
struct InvariantViolationError : Error {
  InvariantViolationError(const std::string& what, long iteration)
      : Error(what), iteration(iteration) {}
  long iteration;
};

/// Malformed CSV/JSON input; carries the 1-based line where parsing stopped.
struct ParseError : Error {
  ParseError(const std::string& what, long line) : Error(what), line(line) {}
  long line;
};

}  // namespace ucopt
