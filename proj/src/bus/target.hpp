#pragma once

#include <cstdint>

#include "bus/transaction.hpp"

namespace mpsoc::bus {

/// A slave on the bus. access() runs in the initiator's process and sets
/// txn.status; `offset` is relative to the slave's base address.
class Target {
 public:
  virtual ~Target() = default;
  virtual void access(Transaction& txn, std::uint32_t offset) = 0;

  /// Extra bus cycles the slave needs after the single transfer cycle.
  unsigned access_cycles() const noexcept { return access_cycles_; }
  void set_access_cycles(unsigned c) noexcept { access_cycles_ = c; }

 private:
  unsigned access_cycles_ = 1;
};

}  // namespace mpsoc::bus
