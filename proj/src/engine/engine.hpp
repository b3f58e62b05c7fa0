#pragma once

// The four simulation levels over one Platform:
//
//   caba    one kernel step per clock cycle, cycle-stepped bus arbitration
//   iss     one wait per instruction (table cycles), untimed bus
//   pvt     iss plus the transaction delay after every bus access
//   native  host tasks; only their redirected I/O advances simulated time

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "engine/config.hpp"
#include "engine/platform.hpp"
#include "isa/cpu.hpp"
#include "sim/kernel.hpp"

namespace mpsoc::engine {

/// Guest-visible I/O of a native task. Every call is one bus transaction
/// and costs transaction_delay_cycles of simulated time.
class NativeIo {
 public:
  virtual ~NativeIo() = default;
  virtual std::uint32_t read32(std::uint32_t address) = 0;
  virtual std::uint8_t read8(std::uint32_t address) = 0;
  virtual void write32(std::uint32_t address, std::uint32_t value) = 0;
  virtual void write8(std::uint32_t address, std::uint8_t value) = 0;
  virtual unsigned cpu_id() const = 0;
  virtual unsigned cpu_count() const = 0;
};

using NativeTask = std::function<void(NativeIo&)>;

/// A native access the bus rejected.
class NativeBusError : public GuestFault {
 public:
  NativeBusError(std::uint32_t address, const std::string& what) : GuestFault(what, 0), address_(address) {}
  std::uint32_t address() const noexcept { return address_; }

 private:
  std::uint32_t address_;
};

/// A guest fault that aborted a run.
class RunFault : public GuestFault {
 public:
  RunFault(Mode mode, unsigned cpu, std::uint32_t pc, std::optional<std::uint32_t> word, const std::string& detail);
  Mode mode() const noexcept { return mode_; }
  unsigned cpu() const noexcept { return cpu_; }
  std::optional<std::uint32_t> word() const noexcept { return word_; }

 private:
  Mode mode_;
  unsigned cpu_;
  std::optional<std::uint32_t> word_;
};

struct RetireRecord {
  unsigned cpu;
  std::uint32_t pc;  // address of the retired instruction
  const isa::StepResult& result;
  const isa::CpuState& state;  // after execution
};

struct RunOptions {
  /// Stop after this many clock cycles of simulated time (0 = no limit).
  std::uint64_t max_cycles = 0;
  /// Kernel dispatch trace.
  std::ostream* trace = nullptr;
  /// Enables 60 Hz frame dumps plus one at the end of the run.
  std::optional<std::filesystem::path> vga_dump_dir;
  std::function<void(const RetireRecord&)> on_retire;
};

struct RunReport {
  Mode mode = Mode::caba;
  double wall_seconds = 0;
  std::uint64_t sim_cycles = 0;
  std::uint64_t sim_ns = 0;
  std::vector<std::uint64_t> instr_count;
  std::uint64_t bus_transactions = 0;
  std::uint64_t contention_stall_cycles = 0;
  std::map<std::string, double> component_wall_share;
  bool completed = false;  // every CPU halted / task returned
  bool limit_reached = false;
  std::uint64_t trace_hash = 0;
  std::uint64_t dispatches = 0;
  std::vector<std::filesystem::path> frames;

  std::uint64_t total_instructions() const;
  /// One human-readable line per field.
  std::string summary() const;
};

/// Runs the platform to completion (or the cycle limit). Native mode needs
/// one task per CPU. Throws RunFault on guest faults, ConfigError on misuse.
RunReport run(Platform& platform, Mode mode, const RunOptions& options = {},
              const std::vector<NativeTask>& tasks = {});

}  // namespace mpsoc::engine
