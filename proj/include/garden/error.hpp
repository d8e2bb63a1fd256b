#pragma once

#include <stdexcept>
#include <string>

namespace garden {

// Exit codes used by the command-line tool.
enum class ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kDivergence = 4 };

// Bad argument to an operation (out-of-range node id, invalid temperature, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller violated a documented precondition (shape mismatch, stepping a finished episode).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Inconsistent configuration (split ratios, empty data directory, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the offending line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Files parse individually but disagree with each other.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during training.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An action that is not a neighbor of the message holder.
class IllegalActionError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace garden
