#pragma once

#include <stdexcept>
#include <string>

namespace dpre {

// Invalid configuration values; the CLI maps these to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data (unknown node ids, unsorted records, bad CSV rows).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A node id that is not part of the model vocabulary.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Chi-square on a contingency table with an empty expected cell.
class DegenerateModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpre
