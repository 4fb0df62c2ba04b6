#pragma once

#include <stdexcept>
#include <string>

namespace jamflow {

/// Process exit codes shared by every CLI subcommand.
enum class ExitCode : int { kOk = 0, kValidation = 1, kIo = 2 };

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};

struct SchemaError : ValidationError {
  using ValidationError::ValidationError;
};

/// A tree node whose hessian mass plus lambda is not positive.
struct DegenerateNodeError : ValidationError {
  using ValidationError::ValidationError;
};

/// Metric undefined for the input, e.g. AUC over a single class.
struct UndefinedMetricError : ValidationError {
  using ValidationError::ValidationError;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void throw_io(std::string const& what, std::string const& path);

}  // namespace jamflow
