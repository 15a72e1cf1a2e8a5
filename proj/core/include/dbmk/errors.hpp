#pragma once

#include <stdexcept>
#include <string>

namespace dbmk {

// Exit-code family of an error, shared by the library and the CLI.
enum class ErrorKind { Validation = 2, Convergence = 3, Conditioning = 4, Io = 5 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::string parameter = {})
      : std::runtime_error(what), kind_(kind), parameter_(std::move(parameter)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& parameter() const noexcept { return parameter_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string parameter_;
};

// Argument outside the mathematical domain (t <= 0, |a| >= 1, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, std::string parameter = {})
      : Error(ErrorKind::Validation, what, std::move(parameter)) {}
};

// Bad numerical configuration (too few nodes, contours crossing, ...).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string parameter = {})
      : Error(ErrorKind::Validation, what, std::move(parameter)) {}
};

class DegreeOverflowError : public Error {
 public:
  explicit DegreeOverflowError(const std::string& what)
      : Error(ErrorKind::Validation, what, "n") {}
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double partial, double tail_estimate)
      : Error(ErrorKind::Convergence, what), partial_(partial), tail_(tail_estimate) {}

  double partial_sum() const noexcept { return partial_; }
  double tail_estimate() const noexcept { return tail_; }

 private:
  double partial_;
  double tail_;
};

class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double condition_estimate)
      : Error(ErrorKind::Conditioning, what), cond_(condition_estimate) {}

  double condition_estimate() const noexcept { return cond_; }

 private:
  double cond_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Convergence, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what, std::string parameter = {})
      : Error(ErrorKind::Io, what, std::move(parameter)) {}
};

}  // namespace dbmk
