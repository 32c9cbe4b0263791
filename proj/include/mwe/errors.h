#pragma once

#include <stdexcept>
#include <string>

namespace mwe {

// Malformed input file or stream (bad header, wrong column count, ...).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while training (non-finite gradient, impossible negative sample).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mwe
