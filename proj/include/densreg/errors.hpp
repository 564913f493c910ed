#pragma once

#include <stdexcept>
#include <string>

namespace densreg {

// Data-level failure: malformed input, invariant violation. CLI exit code 3.
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// File could not be parsed; message names the offending line.
struct parse_error : validation_error {
  explicit parse_error(const std::string& msg) : validation_error(msg) {}
};

// File parsed but does not match the expected column schema.
struct schema_error : validation_error {
  explicit schema_error(const std::string& msg) : validation_error(msg) {}
};

// Filesystem read/write failure.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent or unusable configuration. CLI exit code 2.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Query fell outside every kernel neighborhood under the Undefined
// fallback policy. CLI exit code 4.
struct uncovered_error : std::runtime_error {
  explicit uncovered_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace densreg
