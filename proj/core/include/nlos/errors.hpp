#pragma once

#include <stdexcept>
#include <string>

namespace nlos {

// Raised when an optimization or numerical procedure fails to make progress
// (e.g. a diverged fit). File and validation problems use the standard
// exception types instead.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nlos
