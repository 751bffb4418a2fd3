#pragma once

#include <stdexcept>
#include <string>

namespace stark {

/// Failure categories shared by every module. The numeric values are the
/// CLI exit codes and the C API status codes.
enum class ErrorKind : int {
  config = 2,
  budget = 3,
  domain = 4,
};

/// Base exception for the library. Carries the module and operation that
/// raised it so that front ends can report them without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, std::string operation,
        const std::string& what)
      : std::runtime_error(module + "::" + operation + ": " + what),
        kind_(kind),
        module_(std::move(module)),
        operation_(std::move(operation)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::string operation_;
};

class DomainError : public Error {
 public:
  DomainError(std::string module, std::string operation, const std::string& what)
      : Error(ErrorKind::domain, std::move(module), std::move(operation), what) {}
};

class ConfigError : public Error {
 public:
  ConfigError(std::string module, std::string operation, const std::string& what)
      : Error(ErrorKind::config, std::move(module), std::move(operation), what) {}
};

/// A numerical budget (tolerance, iteration count, time horizon) was exceeded.
/// `budget` names the exhausted quantity, e.g. "tail_tolerance".
class BudgetError : public Error {
 public:
  BudgetError(std::string module, std::string operation, std::string budget,
              const std::string& what)
      : Error(ErrorKind::budget, std::move(module), std::move(operation), what),
        budget_(std::move(budget)) {}

  const std::string& budget() const noexcept { return budget_; }

 private:
  std::string budget_;
};

}  // namespace stark
