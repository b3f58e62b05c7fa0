#include "isa/timing.hpp"

#include <fmt/format.h>

#include "common/error.hpp"
#include "common/text.hpp"

namespace mpsoc::isa {

TimingTable TimingTable::defaults() {
  TimingTable t;
  for (const auto& e : opcode_table()) t.cycles[static_cast<std::size_t>(e.mnemonic)] = e.default_cycles;
  return t;
}

TimingTable TimingTable::parse(std::string_view text) {
  TimingTable t = defaults();
  int line_no = 0;
  for (auto line : text::split_lines(text)) {
    ++line_no;
    if (const auto c = line.find_first_of(";#"); c != std::string_view::npos) line = line.substr(0, c);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("timing line {}: expected key = value", line_no));
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::parse_int(line.substr(eq + 1));
    if (!value || *value < 0 || *value > 0xFFFFFFFFll)
      throw ConfigError(fmt::format("timing line {}: bad value for '{}'", line_no, key));
    const auto v = static_cast<std::uint32_t>(*value);
    if (key == "clock_period_ns") {
      t.clock_period_ns = v;
    } else if (key == "transaction_delay_cycles") {
      t.transaction_delay_cycles = v;
    } else if (key == "taken_branch_extra") {
      t.taken_branch_extra = v;
    } else if (const auto m = from_name(key)) {
      t.set_cost(*m, v);
    } else {
      throw ConfigError(fmt::format("timing line {}: unknown key '{}'", line_no, key));
    }
  }
  t.validate();
  return t;
}

TimingTable TimingTable::load(const std::filesystem::path& path) { return parse(text::read_file(path)); }

void TimingTable::validate() const {
  if (clock_period_ns < 1) throw ConfigError("timing: clock_period_ns must be >= 1");
  for (const auto& e : opcode_table()) {
    if (cost(e.mnemonic) < 1) throw ConfigError(fmt::format("timing: {} must cost at least 1 cycle", e.name));
  }
}

std::string TimingTable::to_text() const {
  std::string out;
  out += fmt::format("clock_period_ns = {}\n", clock_period_ns);
  out += fmt::format("transaction_delay_cycles = {}\n", transaction_delay_cycles);
  out += fmt::format("taken_branch_extra = {}\n", taken_branch_extra);
  for (const auto& e : opcode_table()) out += fmt::format("{} = {}\n", e.name, cost(e.mnemonic));
  return out;
}

}  // namespace mpsoc::isa
