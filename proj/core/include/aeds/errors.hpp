#ifndef AEDS_ERRORS_HPP
#define AEDS_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include "aeds/report.hpp"

namespace aeds {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text; `position` is a 0-based character offset.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(const std::string& name)
      : Error("unknown variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class NonIntegerExponent : public Error {
 public:
  using Error::Error;
};

class MissingCoordinate : public Error {
 public:
  explicit MissingCoordinate(const std::string& name)
      : Error("no value supplied for coordinate '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Domain violation during numeric evaluation (division by zero, log of a
/// nonpositive number, sqrt of a negative number, non-finite result).
class EvalError : public Error {
 public:
  using Error::Error;
};

class AlgebroidMismatch : public Error {
 public:
  AlgebroidMismatch() : Error("operands live on different algebroids") {}
};

class DegreeZero : public Error {
 public:
  DegreeZero() : Error("interior product of a degree-0 form is undefined") {}
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

class NameCollision : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class DegreeError : public Error {
 public:
  using Error::Error;
};

class InvalidStructureConstants : public Error {
 public:
  using Error::Error;
};

class NotAffine : public Error {
 public:
  NotAffine(double worst_residual, const std::string& detail)
      : Error("Euler-Poincare expressions are not affine in w (worst second-derivative residual " +
              std::to_string(worst_residual) + "): " + detail),
        worst_(worst_residual) {}
  double worst_residual() const noexcept { return worst_; }

 private:
  double worst_;
};

/// A check that must hold before another can run; carries the failing report.
class PreconditionFailed : public Error {
 public:
  PreconditionFailed(const std::string& what, Report report) : Error(what), report_(std::move(report)) {}
  const Report& report() const noexcept { return report_; }

 private:
  Report report_;
};

}  // namespace aeds

#endif  // AEDS_ERRORS_HPP
