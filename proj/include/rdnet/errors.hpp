#pragma once

#include <stdexcept>
#include <string>

namespace rdnet {

// Caller-supplied data or configuration violates a precondition.
struct InvalidInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File contents are malformed, corrupt, or not decodable.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The object is not in the state the operation requires.
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rdnet
