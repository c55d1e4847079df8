#pragma once

#include <stdexcept>
#include <string>

namespace mcdr {

// All library failures derive from Error so the CLI can map them to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Raised when a log-type objective sees a nonpositive utility.
class DegenerateUtility : public Error {
 public:
  DegenerateUtility(std::size_t group, double value)
      : Error("degenerate utility for group " + std::to_string(group) + ": z = " +
              std::to_string(value)),
        group_(group),
        value_(value) {}

  std::size_t group() const noexcept { return group_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t group_;
  double value_;
};

class InfeasibleInput : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class NumericalStall : public Error {
 public:
  using Error::Error;
};

}  // namespace mcdr
