#pragma once

// Shared-bus bindings. Both run the slave's access method directly in the
// calling master's process.
//
//   TlmBus    one blocking call per transaction, owner handed to the
//             lowest-rank waiter on release
//   CycleBus  request asserted every bus cycle, per-cycle fixed-priority
//             arbitration, 1 transfer cycle + slave access cycles, timeout
//             after ArbiterConfig::timeout_cycles counted from the request

#include <cstdint>
#include <optional>
#include <vector>

#include "bus/arbiter.hpp"
#include "bus/memory_map.hpp"
#include "bus/transaction.hpp"
#include "sim/kernel.hpp"

namespace mpsoc::bus {

/// Decodes and runs the slave access. Unmapped addresses get
/// `unmapped_status`, malformed ones bus_error; failed reads return zero.
void perform_access(const MemoryMap& map, Transaction& txn, Status unmapped_status);

class TlmBus {
 public:
  TlmBus(sim::Kernel& kernel, const MemoryMap& map, ArbiterConfig cfg, sim::SimTime clock_period_ns);

  /// Blocks the calling process while another master owns the bus. Must be
  /// called from a kernel process.
  void transport(Transaction& txn);

  const BusStats& stats() const { return stats_; }
  const MemoryMap& map() const { return map_; }

 private:
  struct Waiter {
    unsigned master;
    sim::ProcessHandle process;
  };

  sim::Kernel& kernel_;
  const MemoryMap& map_;
  ArbiterConfig cfg_;
  sim::SimTime period_;
  std::optional<unsigned> owner_;
  std::vector<Waiter> waiters_;
  sim::SimTime stall_ns_ = 0;
  BusStats stats_;
};

class CycleBus {
 public:
  CycleBus(sim::Kernel& kernel, const MemoryMap& map, ArbiterConfig cfg, sim::SimTime clock_period_ns);

  /// Must be called from a kernel process on a clock edge; returns on the
  /// clock edge at which the transfer (or timeout) completes.
  void transport(Transaction& txn);

  bool in_transfer() const { return in_transfer_; }
  /// Largest number of simultaneous transfers ever observed (1 when sound).
  unsigned max_concurrent_transfers() const { return max_concurrent_; }
  const BusStats& stats() const { return stats_; }
  const MemoryMap& map() const { return map_; }

 private:
  sim::Kernel& kernel_;
  const MemoryMap& map_;
  ArbiterConfig cfg_;
  sim::SimTime period_;
  std::vector<unsigned> requests_;
  std::optional<unsigned> owner_;
  sim::SimTime arbitrated_at_ = sim::kForever;
  bool in_transfer_ = false;
  unsigned active_transfers_ = 0;
  unsigned max_concurrent_ = 0;
  BusStats stats_;
};

}  // namespace mpsoc::bus
