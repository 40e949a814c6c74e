#pragma once

#include <stdexcept>
#include <string>

namespace ufe {

// Base class for all library errors. Catch this at the CLI boundary.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad argument values: non-finite inputs, alpha outside (0,1), sigma <= 0, ...
class InvalidInputError : public Error {
  public:
    using Error::Error;
};

// Malformed CSV or dataset structure. Carries the 1-based input line when known.
class SchemaError : public Error {
  public:
    explicit SchemaError(const std::string& what, long line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    long line() const { return line_; }

  private:
    long line_;
};

// A residual group too small (or with zero scale) to test.
class DegenerateGroupError : public Error {
  public:
    using Error::Error;
};

// A test was invoked before its prerequisite test passed.
class SequencingError : public Error {
  public:
    using Error::Error;
};

// Balanced closed-form estimator called on unbalanced data.
class WrongPathError : public Error {
  public:
    using Error::Error;
};

// Equality constraints cannot be met by any least-squares solution.
class InfeasibleError : public Error {
  public:
    InfeasibleError(const std::string& what, double residual)
        : Error(what + " (constraint residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

}  // namespace ufe
