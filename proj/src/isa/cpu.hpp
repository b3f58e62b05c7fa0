#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "bus/transaction.hpp"
#include "common/error.hpp"
#include "isa/isa.hpp"
#include "isa/timing.hpp"

namespace mpsoc::isa {

inline constexpr std::uint32_t kInterruptVector = 0x10;
inline constexpr unsigned kInterruptLinkRegister = 14;

struct CpuState {
  std::array<std::uint32_t, 32> regs{};
  std::uint32_t pc = 0;
  bool msr_ie = false;
  std::optional<std::uint16_t> imm_latch;
  unsigned cpu_id = 0;

  std::uint32_t reg(unsigned i) const { return regs[i]; }
  /// Writes to r0 are discarded.
  void set_reg(unsigned i, std::uint32_t v) {
    if (i != 0) regs[i] = v;
  }

  friend bool operator==(const CpuState&, const CpuState&) = default;
};

/// Instruction side (LMB to the CPU's private BRAM).
class FetchPort {
 public:
  virtual ~FetchPort() = default;
  virtual std::optional<std::uint32_t> fetch_word(std::uint32_t address) = 0;
};

/// Data side. access() may block the calling kernel process.
class DataPort {
 public:
  virtual ~DataPort() = default;
  virtual void access(bus::Transaction& txn) = 0;
};

class UnmappedFetch : public GuestFault {
 public:
  explicit UnmappedFetch(std::uint32_t pc);
};

class DataBusError : public GuestFault {
 public:
  DataBusError(const bus::Transaction& txn, std::uint32_t pc);
  const bus::Transaction& transaction() const noexcept { return txn_; }

 private:
  bus::Transaction txn_;
};

struct StepResult {
  Instruction executed;
  /// Table cycles for the instruction (0 when no timing table was given).
  std::uint32_t cycles = 0;
  std::uint32_t next_pc = 0;
  bool branch_taken = false;
  bool halted = false;
  bool interrupt_taken = false;

  std::span<const bus::Transaction> transactions() const { return {txns_.data(), txn_count_}; }
  void record(const bus::Transaction& t) { txns_[txn_count_++] = t; }

 private:
  // The subset issues at most one data access per instruction.
  std::array<bus::Transaction, 1> txns_{};
  std::size_t txn_count_ = 0;
};

/// Instruction word at cpu.pc. Throws UnmappedFetch.
std::uint32_t fetch(const CpuState& cpu, FetchPort& iport);

/// Interrupt entry: r14 <- resume address (cpu.pc), IE cleared, pc <- vector.
void take_interrupt(CpuState& cpu);

/// Fetches, decodes and executes one instruction, then samples `irq_line`:
/// with IE set and no pending IMM prefix the interrupt is entered before
/// returning. HALT leaves pc unchanged and sets `halted`.
StepResult step(CpuState& cpu, FetchPort& iport, DataPort& dport, const TimingTable* timing,
                bool irq_line = false);

}  // namespace mpsoc::isa
