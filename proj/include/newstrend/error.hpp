#pragma once

#include <stdexcept>
#include <string>

namespace newstrend {

// Malformed or missing input data (files, records).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent configuration or tensor shapes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Unreadable checkpoint or version/magic mismatch.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace newstrend
