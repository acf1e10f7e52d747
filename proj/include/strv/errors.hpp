#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace strv {

/// Raised when a caller breaks a documented precondition (bad width, replica
/// index out of range, row beyond the array, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid user-supplied configuration, detected before any simulation runs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FaultKind : std::uint8_t {
  IllegalInstruction,
  AlignmentFault,
  BusFault,
  Timeout,
};

const char* to_string(FaultKind kind);

/// A condition that stops the simulated machine: the modeled core has no trap
/// vector, so these end the run with a diagnostic.
class SimFault : public std::runtime_error {
 public:
  SimFault(FaultKind kind, std::uint32_t address, const std::string& what);

  FaultKind kind() const { return kind_; }
  std::uint32_t address() const { return address_; }

 private:
  FaultKind kind_;
  std::uint32_t address_;
};

}  // namespace strv
