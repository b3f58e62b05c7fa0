#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "isa/isa.hpp"

namespace mpsoc::isa {

/// Per-mnemonic cycle costs plus the global transaction delay and clock.
///
/// Text form (one `key = value` per line, `;` or `#` comments):
///   clock_period_ns = 10
///   transaction_delay_cycles = 2
///   taken_branch_extra = 2
///   ADD = 1
struct TimingTable {
  std::uint32_t clock_period_ns = 10;
  std::uint32_t transaction_delay_cycles = 2;
  std::uint32_t taken_branch_extra = 2;
  std::array<std::uint32_t, kMnemonicCount> cycles{};

  /// Stand-in defaults: ALU/branch 1, MUL 3, loads/stores 2, +2 when a
  /// branch is taken, 2-cycle transactions, 100 MHz.
  static TimingTable defaults();
  /// Starts from defaults(); keys present in `text` override them.
  static TimingTable parse(std::string_view text);
  static TimingTable load(const std::filesystem::path& path);

  std::uint32_t cost(Mnemonic m) const { return cycles[static_cast<std::size_t>(m)]; }
  void set_cost(Mnemonic m, std::uint32_t c) { cycles[static_cast<std::size_t>(m)] = c; }

  /// Throws ConfigError unless every entry is >= 1 and the clock is >= 1 ns.
  void validate() const;
  std::string to_text() const;

  friend bool operator==(const TimingTable&, const TimingTable&) = default;
};

}  // namespace mpsoc::isa
