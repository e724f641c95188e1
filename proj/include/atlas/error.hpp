#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace atlas {

// Process exit codes used by the CLI. Every error type maps onto one of them.
enum class ExitCode : int {
  ok = 0,
  internal = 1,
  config = 2,
  dependency = 3,
  replay = 4,
  service = 5,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::internal; }
};

// Broken precondition of a library call (programming error, not bad data).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Inputs to the explorer export disagree, or an export file breaks the schema.
class ExportError : public ContractError {
 public:
  using ContractError::ContractError;
};

// Bad configuration or malformed input data.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

class NormalizationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Malformed input file; line() is 1-based and counts the header.
class ParseError : public ConfigError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class AssociationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class BuildError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class PlacementError : public ConfigError {
 public:
  PlacementError(std::string label, const std::string& what)
      : ConfigError(what), label_(std::move(label)) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

// A stage was asked to run before the stage producing its inputs.
class DependencyError : public Error {
 public:
  DependencyError(std::string required_stage, const std::string& what)
      : Error(what), required_stage_(std::move(required_stage)) {}
  const std::string& required_stage() const noexcept { return required_stage_; }
  ExitCode exit_code() const noexcept override { return ExitCode::dependency; }

 private:
  std::string required_stage_;
};

// Offline mode needed a query that the cache does not hold.
class ReplayError : public Error {
 public:
  explicit ReplayError(std::vector<std::string> missing);
  const std::vector<std::string>& missing_queries() const noexcept { return missing_; }
  ExitCode exit_code() const noexcept override { return ExitCode::replay; }

 private:
  std::vector<std::string> missing_;
};

// Failures talking to the catalogue service.
class ServiceError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::service; }
};

// Non-retryable HTTP status (4xx other than 429).
class QueryError : public ServiceError {
 public:
  QueryError(int status, const std::string& what) : ServiceError(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

// Retries exhausted, connection failures, or an exceeded request ceiling.
class TransportError : public ServiceError {
 public:
  using ServiceError::ServiceError;
};

}  // namespace atlas
