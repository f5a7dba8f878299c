#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iphs {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise unusable field values.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Fields or operators built on different grids / species counts.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// exp(s/c_v) left the representable range at `cell`.
class SaturationError : public Error {
 public:
  SaturationError(const std::string& what, std::size_t cell)
      : Error(what), cell_(cell) {}
  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

/// A constitutive requirement (T > 0, positive coefficients) was violated.
class ConstitutiveError : public Error {
 public:
  using Error::Error;
};

/// Structure matrices, Xi pairs or scenario contents failed validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Port synthesis could not decide the rank of P_e.
class RankAmbiguityError : public Error {
 public:
  using Error::Error;
};

/// Newton iteration of the implicit stage did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A time step was rejected; the state before the step is still valid.
class StepError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace iphs
