#pragma once

#include <stdexcept>
#include <string>

namespace dred {

// Base class for all engine errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed expression text; carries a 0-based character offset.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t position)
      : Error(msg + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

// Declaration or lookup problem: undeclared names, duplicate names,
// ill-formed contexts, cross-context migration failures.
struct SemanticError : Error {
  using Error::Error;
};

// Operation outside the supported expression or generator class.
struct UnsupportedError : Error {
  using Error::Error;
};

// Cyclic substitution binding caught by the occurs-check.
struct CycleError : Error {
  using Error::Error;
};

// Numeric evaluation hit a singular point (log domain, zero denominator,
// exp overflow); the sample should be redrawn.
struct SingularPointError : Error {
  using Error::Error;
};

// Numeric verification could not produce a usable sample set.
struct InconclusiveError : Error {
  using Error::Error;
};

// Symbolic zero-test and randomized numeric check disagreed.  This always
// indicates an engine bug and is never downgraded to a soft failure.
struct ZeroGuardError : Error {
  using Error::Error;
};

// Coordinate change is degenerate (vanishing Jacobian) or incomplete
// (old variables survive the rewrite).
struct ChangeError : Error {
  using Error::Error;
};

// Generator is not associated with the conserved vector, so the
// requested reduction step is not available.
struct NotAssociatedError : Error {
  using Error::Error;
};

}  // namespace dred
