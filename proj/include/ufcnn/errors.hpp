#pragma once

#include <stdexcept>

namespace ufcnn {

// Invalid configuration or misuse of an interface, detected up front.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Operation called in the wrong order (e.g. backward before forward).
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

// Bad input data: files, labels, targets.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : DataError {
  using DataError::DataError;
};

struct DomainError : DataError {
  using DataError::DataError;
};

// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ufcnn
