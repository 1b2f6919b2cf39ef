#pragma once
#include <stdexcept>
#include <string>

namespace cve {

// Exit codes used by the CLI.
enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitConvergence = 3, kExitValidation = 4 };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 1; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return kExitConfig; }
};

class InvalidParameter : public ConfigError { using ConfigError::ConfigError; };
class ConflictError : public ConfigError { using ConfigError::ConfigError; };
class StructuralError : public ConfigError { using ConfigError::ConfigError; };
class DomainError : public ConfigError { using ConfigError::ConfigError; };

class ConvergenceError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return kExitConvergence; }
};

class DegeneracyError : public ConvergenceError { using ConvergenceError::ConvergenceError; };
class AmbiguityError : public ConvergenceError { using ConvergenceError::ConvergenceError; };
class NoEntanglementError : public ConvergenceError { using ConvergenceError::ConvergenceError; };

class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return kExitValidation; }
};

}  // namespace cve
