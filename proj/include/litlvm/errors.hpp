#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace litlvm {

// Root of every exception the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sizes of vectors/matrices/schemes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller-supplied value is outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Non-finite intermediate or undefined weight.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Input is well formed but carries no information for the request
// (zero events, single-class labels, no comparable pairs, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Operation requested on an object that is not in the required state.
class StateError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error("diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or unreadable input files.
class DataError : public Error {
 public:
  using Error::Error;
};

class SearchFailedError : public Error {
 public:
  SearchFailedError(const std::string& what, std::vector<std::string> diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}

  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

}  // namespace litlvm
