#pragma once

#include <stdexcept>
#include <string>

namespace autoecon {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// An input bundle falls outside the supported regime while strict-regime
// checking is requested.
struct OutOfRegimeError : Error {
  using Error::Error;
};

// The inner sum of the scaling law is non-positive, so its logarithm is
// undefined. Only reachable under extrapolation with clamping disabled.
struct NonPositiveBracketError : Error {
  using Error::Error;
};

// An argument lies outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// A requested value lies outside the invertible bracket of a monotone map.
struct OutOfRangeError : Error {
  using Error::Error;
};

// No feasible point satisfies the constraints of a minimization problem.
struct InfeasibleError : Error {
  using Error::Error;
};

// A solver finished without meeting its convergence cross-checks.
struct NotConvergedError : Error {
  using Error::Error;
};

// No restart of the nonlinear least-squares fit converged.
struct FitFailedError : Error {
  using Error::Error;
};

// The observation design has no variation on at least one input axis.
struct DegenerateDesignError : Error {
  using Error::Error;
};

// The task baseline loss does not exceed the model loss, so elasticities of
// the substitution-ratio numerator are undefined.
struct BaselineNotExceededError : Error {
  using Error::Error;
};

// Wage data is unavailable for a per-datum labeling price.
struct MissingWageError : Error {
  using Error::Error;
};

// A weighted rate has an empty or zero-weight denominator.
struct ZeroDenominatorError : Error {
  using Error::Error;
};

// Malformed input file. Carries a 1-based line number when known.
struct ParseError : Error {
  ParseError(const std::string& msg, long line = -1)
      : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_number(line) {}
  long line_number;
};

}  // namespace autoecon
