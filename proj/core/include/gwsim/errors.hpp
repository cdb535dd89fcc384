#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gwsim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

/// An argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "DomainError"; }
};

class NumericFailure : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "NumericFailure"; }
};

/// Raised when a generation total exceeds the configured population cap.
class PopulationOverflow : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "PopulationOverflow"; }
};

/// A custom absorbing or mating rule broke its contract.
class InvalidRule : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "InvalidRule"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ConfigError"; }
};

/// The partial-mean equation has no finite root: the expected total claim
/// mass does not exceed the budget.
class BudgetExceedsMass : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "BudgetExceedsMass"; }
};

/// A batch exceeded its failure budget. Carries the first failing trial and
/// the kind of the underlying error.
class BatchAborted : public Error {
 public:
  BatchAborted(std::size_t trial, std::string cause_kind, const std::string& what)
      : Error("trial " + std::to_string(trial) + ": " + what),
        trial_(trial),
        cause_kind_(std::move(cause_kind)) {}
  const char* kind() const noexcept override { return "BatchAborted"; }
  std::size_t trial() const noexcept { return trial_; }
  const std::string& cause_kind() const noexcept { return cause_kind_; }

 private:
  std::size_t trial_;
  std::string cause_kind_;
};

}  // namespace gwsim
