#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mpsoc {

/// Bad configuration file, option, or platform parameter.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Speed-up / precision evaluation on unusable measurements.
class MeasurementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base of every fault raised by guest execution (illegal opcode, bad fetch,
/// failed bus access). Engines turn these into aborted runs.
class GuestFault : public std::runtime_error {
 public:
  GuestFault(const std::string& what, std::uint32_t pc) : std::runtime_error(what), pc_(pc) {}

  std::uint32_t pc() const noexcept { return pc_; }
  void set_pc(std::uint32_t pc) noexcept { pc_ = pc; }

 private:
  std::uint32_t pc_;
};

}  // namespace mpsoc
