#include "engine/config.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "common/error.hpp"
#include "common/text.hpp"

namespace mpsoc::engine {

namespace {

constexpr const char* kRequiredRegions[] = {"BRAM", "SRAM", "GPIO", "INTC", "TIMER", "VGA"};

std::uint32_t u32(std::string_view s, int line, const char* what) {
  const auto v = text::parse_int(s);
  if (!v || *v < 0 || *v > 0xFFFFFFFFll) throw ConfigError(fmt::format("config line {}: bad {} '{}'", line, what, s));
  return static_cast<std::uint32_t>(*v);
}

}  // namespace

const char* to_string(Mode m) {
  switch (m) {
    case Mode::caba: return "caba";
    case Mode::iss: return "iss";
    case Mode::pvt: return "pvt";
    case Mode::native: return "native";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  const auto l = text::lower(text::trim(s));
  for (Mode m : kAllModes) {
    if (l == to_string(m)) return m;
  }
  return std::nullopt;
}

std::int64_t WorkloadSpec::param(const std::string& key, std::int64_t fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

WorkloadSpec WorkloadSpec::parse(std::string_view text) {
  const auto toks = text::split_ws(text);
  if (toks.empty()) throw ConfigError("empty workload");
  WorkloadSpec w;
  w.name = text::lower(toks[0]);
  for (std::size_t i = 1; i < toks.size(); ++i) {
    const auto eq = toks[i].find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("workload parameter '{}' is not key=value", toks[i]));
    const auto v = text::parse_int(toks[i].substr(eq + 1));
    if (!v) throw ConfigError(fmt::format("workload parameter '{}' needs an integer", toks[i]));
    w.params[std::string(toks[i].substr(0, eq))] = *v;
  }
  return w;
}

std::string WorkloadSpec::to_string() const {
  std::string s = name;
  for (const auto& [k, v] : params) s += fmt::format(" {}={}", k, v);
  return s;
}

PlatformConfig PlatformConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  PlatformConfig c;
  bool custom_map = false;
  bool custom_priorities = false;
  int line_no = 0;
  for (auto line : text::split_lines(text)) {
    ++line_no;
    if (const auto k = line.find_first_of(";#"); k != std::string_view::npos) line = line.substr(0, k);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("config line {}: expected key = value", line_no));
    const auto key = text::lower(text::trim(line.substr(0, eq)));
    const auto value = text::trim(line.substr(eq + 1));
    const auto toks = text::split_ws(value);

    if (key == "cpu_count") {
      c.cpu_count = u32(value, line_no, "cpu_count");
    } else if (key == "priorities") {
      c.arbiter.ranks.clear();
      for (auto t : toks) c.arbiter.ranks.push_back(u32(t, line_no, "priority"));
      custom_priorities = true;
    } else if (key == "timeout_cycles") {
      c.arbiter.timeout_cycles = u32(value, line_no, "timeout_cycles");
    } else if (key == "timing") {
      std::filesystem::path p{std::string(value)};
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      c.timing_path = p;
      c.timing = isa::TimingTable::load(p);
    } else if (key == "map") {
      if (toks.size() != 3) throw ConfigError(fmt::format("config line {}: map needs NAME BASE SIZE", line_no));
      if (!custom_map) c.regions.clear();
      custom_map = true;
      c.regions.push_back({text::upper(toks[0]), u32(toks[1], line_no, "base"), u32(toks[2], line_no, "size")});
    } else if (key == "access_cycles") {
      if (toks.size() != 2) throw ConfigError(fmt::format("config line {}: access_cycles needs NAME CYCLES", line_no));
      c.access_cycles[text::upper(toks[0])] = u32(toks[1], line_no, "cycles");
    } else if (key == "workload") {
      c.workloads.push_back(WorkloadSpec::parse(value));
    } else if (key == "engines") {
      c.engines.clear();
      for (auto t : toks) {
        const auto m = parse_mode(t);
        if (!m) throw ConfigError(fmt::format("config line {}: unknown engine '{}'", line_no, t));
        c.engines.push_back(*m);
      }
    } else {
      throw ConfigError(fmt::format("config line {}: unknown key '{}'", line_no, key));
    }
  }
  if (!custom_priorities) c.arbiter.ranks = bus::ArbiterConfig::fixed(c.cpu_count).ranks;
  c.validate();
  return c;
}

PlatformConfig PlatformConfig::load(const std::filesystem::path& path) {
  try {
    return parse(text::read_file(path), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void PlatformConfig::validate() const {
  if (cpu_count < 1) throw ConfigError("cpu_count must be >= 1");
  arbiter.validate(cpu_count);
  bus::validate_regions(regions);
  for (const char* name : kRequiredRegions) region(name);
  for (const auto& r : regions) {
    if (std::find(std::begin(kRequiredRegions), std::end(kRequiredRegions), r.name) == std::end(kRequiredRegions)) {
      throw ConfigError(fmt::format("unknown memory region '{}'", r.name));
    }
  }
  for (const auto& [name, cycles] : access_cycles) {
    region(name);
    (void)cycles;
  }
  timing.validate();
  if (engines.empty()) throw ConfigError("no engines configured");
}

unsigned PlatformConfig::access_cycles_for(const std::string& name) const {
  auto it = access_cycles.find(name);
  return it == access_cycles.end() ? 1u : it->second;
}

const bus::RegionSpec& PlatformConfig::region(const std::string& name) const {
  for (const auto& r : regions) {
    if (r.name == name) return r;
  }
  throw ConfigError(fmt::format("memory map lacks region '{}'", name));
}

}  // namespace mpsoc::engine
