#include "bus/memory_map.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "common/error.hpp"

namespace mpsoc::bus {

std::vector<RegionSpec> default_regions() {
  return {
      {"BRAM", 0x00000000, 0x00002000},
      {"SRAM", 0x20100000, 0x00100000},
      {"GPIO", 0x40000000, 0x00010000},
      {"INTC", 0x41200000, 0x00010000},
      {"TIMER", 0x41C00000, 0x00010000},
      {"VGA", 0x73A00000, 0x00010000},
  };
}

void validate_regions(const std::vector<RegionSpec>& regions) {
  std::vector<RegionSpec> sorted = regions;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.base < b.base; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& r = sorted[i];
    if (r.size == 0) throw ConfigError(fmt::format("region {} has size 0", r.name));
    if (r.end() > 0x1'0000'0000ull) throw ConfigError(fmt::format("region {} wraps the address space", r.name));
    if (i > 0 && sorted[i - 1].end() > r.base) {
      throw ConfigError(fmt::format("regions {} and {} overlap", sorted[i - 1].name, r.name));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (sorted[j].name == r.name) throw ConfigError(fmt::format("region {} defined twice", r.name));
    }
  }
}

MemoryMap::MemoryMap(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::vector<RegionSpec> specs;
  for (const auto& e : entries_) specs.push_back(e.region);
  validate_regions(specs);
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.region.base < b.region.base; });
}

std::optional<MemoryMap::Hit> MemoryMap::decode(std::uint32_t address) const {
  // Last entry whose base is <= address.
  auto it = std::upper_bound(entries_.begin(), entries_.end(), address,
                             [](std::uint32_t a, const Entry& e) { return a < e.region.base; });
  if (it == entries_.begin()) return std::nullopt;
  --it;
  if (!it->region.contains(address)) return std::nullopt;
  return Hit{&*it, address - it->region.base};
}

const MemoryMap::Entry* MemoryMap::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.region.name == name) return &e;
  }
  return nullptr;
}

}  // namespace mpsoc::bus
