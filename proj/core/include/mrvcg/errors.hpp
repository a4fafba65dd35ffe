#pragma once

#include <stdexcept>
#include <string>

namespace mrvcg {

// Thrown when a caller breaks a documented precondition (mismatched
// capacities, malformed input values, a handle used against the wrong
// index, and so on). These are programming errors, not I/O conditions.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Thrown when a file or stream cannot be read or parsed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace mrvcg
