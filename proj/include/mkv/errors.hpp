#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mkv {

// Exception hierarchy. The CLI maps each family onto a process exit code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration values (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A grid too coarse to represent a field.
class ResolutionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Sample arrays whose length is incompatible with the transform.
class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Non-finite state during time stepping (exit code 3).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Failure of a dense linear-algebra routine.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File system failures (exit code 4).
class IoError : public Error {
 public:
  IoError(const std::string& what, const std::string& path)
      : Error(what + ": " + path), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace mkv
