#pragma once

#include <stdexcept>
#include <string>

namespace nameres {

/// Malformed input: unparsable JSON, schema violations, broken references,
/// incompatible checkpoint shapes.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values (zero vocabulary, fractions out of range).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite values detected during training or inference.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nameres
