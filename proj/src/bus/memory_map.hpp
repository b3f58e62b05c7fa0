#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bus/target.hpp"

namespace mpsoc::bus {

struct RegionSpec {
  std::string name;
  std::uint32_t base = 0;
  std::uint32_t size = 0;

  std::uint64_t end() const { return std::uint64_t{base} + size; }
  bool contains(std::uint32_t a) const { return a >= base && a < end(); }
  friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

/// The six regions of the reference platform: BRAM, SRAM, GPIO, INTC,
/// TIMER, VGA.
std::vector<RegionSpec> default_regions();

class MemoryMap {
 public:
  struct Entry {
    RegionSpec region;
    Target* target = nullptr;
  };
  struct Hit {
    const Entry* entry;
    std::uint32_t offset;
  };

  MemoryMap() = default;
  /// Throws ConfigError for empty, wrapping or overlapping regions.
  explicit MemoryMap(std::vector<Entry> entries);

  std::optional<Hit> decode(std::uint32_t address) const;
  const Entry* find(const std::string& name) const;
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;  // sorted by base
};

/// Throws ConfigError when two regions overlap or one is empty/wraps.
void validate_regions(const std::vector<RegionSpec>& regions);

}  // namespace mpsoc::bus
