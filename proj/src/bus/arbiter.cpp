#include "bus/arbiter.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "common/error.hpp"

namespace mpsoc::bus {

ArbiterConfig ArbiterConfig::fixed(std::size_t masters) {
  ArbiterConfig c;
  c.ranks.resize(masters);
  for (std::size_t i = 0; i < masters; ++i) c.ranks[i] = static_cast<unsigned>(i);
  return c;
}

unsigned ArbiterConfig::rank(unsigned master) const {
  return master < ranks.size() ? ranks[master] : static_cast<unsigned>(ranks.size() + master);
}

void ArbiterConfig::validate(std::size_t masters) const {
  if (ranks.size() < masters) {
    throw ConfigError(fmt::format("priorities cover {} masters, platform has {}", ranks.size(), masters));
  }
  auto sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("priority ranks must be unique");
  if (timeout_cycles == 0) throw ConfigError("timeout_cycles must be >= 1");
}

std::optional<unsigned> arbitrate_cycle(std::span<const unsigned> requests, const ArbiterConfig& cfg) {
  std::optional<unsigned> best;
  for (unsigned m : requests) {
    if (!best || cfg.rank(m) < cfg.rank(*best)) best = m;
  }
  return best;
}

}  // namespace mpsoc::bus
