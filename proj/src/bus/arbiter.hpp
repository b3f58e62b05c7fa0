#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mpsoc::bus {

struct ArbiterConfig {
  /// rank[master_id]; lower rank wins.
  std::vector<unsigned> ranks{0, 1};
  unsigned timeout_cycles = 16;

  static ArbiterConfig fixed(std::size_t masters);
  unsigned rank(unsigned master) const;
  /// Throws ConfigError unless ranks are unique and cover `masters`.
  void validate(std::size_t masters) const;
};

/// Fixed priority: the requesting master with the lowest rank.
std::optional<unsigned> arbitrate_cycle(std::span<const unsigned> requests, const ArbiterConfig& cfg);

struct BusStats {
  std::uint64_t transactions = 0;
  std::uint64_t stall_cycles = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t bus_errors = 0;
  std::vector<std::uint64_t> per_master;

  void count(unsigned master) {
    if (per_master.size() <= master) per_master.resize(master + 1);
    ++per_master[master];
    ++transactions;
  }
};

}  // namespace mpsoc::bus
