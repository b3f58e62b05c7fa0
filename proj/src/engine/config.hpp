#pragma once

// Platform configuration file, one `key = value` per line, `;`/`#` comments:
//
//   cpu_count = 2
//   priorities = 0 1              rank per CPU, lower wins
//   timeout_cycles = 16
//   timing = default.timing       relative to the config file
//   map = SRAM 0x20100000 0x100000   any map line replaces the default map
//   access_cycles = SRAM 1
//   workload = life generations=10
//   engines = caba iss pvt native

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bus/arbiter.hpp"
#include "bus/memory_map.hpp"
#include "isa/timing.hpp"

namespace mpsoc::engine {

enum class Mode : std::uint8_t { caba, iss, pvt, native };

const char* to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);
inline constexpr Mode kAllModes[] = {Mode::caba, Mode::iss, Mode::pvt, Mode::native};

struct WorkloadSpec {
  std::string name;
  std::map<std::string, std::int64_t> params;

  std::int64_t param(const std::string& key, std::int64_t fallback) const;
  /// "life generations=10"
  static WorkloadSpec parse(std::string_view text);
  std::string to_string() const;
};

struct PlatformConfig {
  unsigned cpu_count = 2;
  bus::ArbiterConfig arbiter = bus::ArbiterConfig::fixed(2);
  std::vector<bus::RegionSpec> regions = bus::default_regions();
  std::map<std::string, unsigned> access_cycles;  // region name -> cycles, default 1
  isa::TimingTable timing = isa::TimingTable::defaults();
  std::filesystem::path timing_path;
  std::vector<WorkloadSpec> workloads;
  std::vector<Mode> engines{std::begin(kAllModes), std::end(kAllModes)};

  static PlatformConfig parse(std::string_view text, const std::filesystem::path& base_dir = {});
  static PlatformConfig load(const std::filesystem::path& path);

  /// Throws ConfigError when the platform cannot be built.
  void validate() const;
  unsigned access_cycles_for(const std::string& region) const;
  const bus::RegionSpec& region(const std::string& name) const;
};

}  // namespace mpsoc::engine
