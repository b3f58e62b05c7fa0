#include "isa/cpu.hpp"

#include <fmt/format.h>

namespace mpsoc::isa {

UnmappedFetch::UnmappedFetch(std::uint32_t pc)
    : GuestFault(fmt::format("instruction fetch from unmapped address 0x{:08x}", pc), pc) {}

DataBusError::DataBusError(const bus::Transaction& txn, std::uint32_t pc)
    : GuestFault(fmt::format("data access failed: {}", bus::describe(txn)), pc), txn_(txn) {}

std::uint32_t fetch(const CpuState& cpu, FetchPort& iport) {
  if (cpu.pc % 4 != 0) throw UnmappedFetch(cpu.pc);
  const auto w = iport.fetch_word(cpu.pc);
  if (!w) throw UnmappedFetch(cpu.pc);
  return *w;
}

void take_interrupt(CpuState& cpu) {
  cpu.set_reg(kInterruptLinkRegister, cpu.pc);
  cpu.msr_ie = false;
  cpu.pc = kInterruptVector;
}

namespace {

std::uint32_t load(CpuState& cpu, DataPort& dport, StepResult& r, std::uint32_t addr, std::uint8_t width) {
  auto txn = bus::Transaction::read(cpu.cpu_id, addr, width);
  dport.access(txn);
  r.record(txn);
  if (txn.status != bus::Status::ok) throw DataBusError(txn, cpu.pc);
  return txn.value();
}

void store(CpuState& cpu, DataPort& dport, StepResult& r, std::uint32_t addr, std::uint8_t width,
           std::uint32_t value) {
  auto txn = bus::Transaction::write(cpu.cpu_id, addr, width, value);
  dport.access(txn);
  r.record(txn);
  if (txn.status != bus::Status::ok) throw DataBusError(txn, cpu.pc);
}

bool condition(Mnemonic m, std::int32_t v) {
  switch (m) {
    case Mnemonic::BEQ: case Mnemonic::BEQI: return v == 0;
    case Mnemonic::BNE: case Mnemonic::BNEI: return v != 0;
    case Mnemonic::BLT: case Mnemonic::BLTI: return v < 0;
    case Mnemonic::BLE: case Mnemonic::BLEI: return v <= 0;
    case Mnemonic::BGT: case Mnemonic::BGTI: return v > 0;
    case Mnemonic::BGE: case Mnemonic::BGEI: return v >= 0;
    default: return false;
  }
}

}  // namespace

StepResult step(CpuState& cpu, FetchPort& iport, DataPort& dport, const TimingTable* timing, bool irq_line) {
  const std::uint32_t word = fetch(cpu, iport);
  StepResult r;
  try {
    r.executed = decode(word);
  } catch (const IllegalInstruction&) {
    throw IllegalInstruction(word, cpu.pc);
  }
  const Instruction& in = r.executed;
  const std::uint32_t pc = cpu.pc;
  const std::uint32_t a = cpu.reg(in.ra);
  const std::uint32_t b = cpu.reg(in.rb);
  const std::uint32_t d = cpu.reg(in.rd);

  // Type-B immediate, extended by a pending IMM prefix.
  std::uint32_t imm = static_cast<std::uint32_t>(static_cast<std::int32_t>(in.imm16));
  if (in.form == Form::B && in.mnemonic != Mnemonic::IMM) {
    if (cpu.imm_latch) {
      imm = (static_cast<std::uint32_t>(*cpu.imm_latch) << 16) | static_cast<std::uint16_t>(in.imm16);
      cpu.imm_latch.reset();
    }
  }

  std::uint32_t next = pc + 4;
  auto branch = [&](std::uint32_t target) {
    next = target;
    r.branch_taken = true;
  };

  switch (in.mnemonic) {
    case Mnemonic::ADD: cpu.set_reg(in.rd, a + b); break;
    case Mnemonic::RSUB: cpu.set_reg(in.rd, b - a); break;
    case Mnemonic::MUL: cpu.set_reg(in.rd, a * b); break;
    case Mnemonic::AND: cpu.set_reg(in.rd, a & b); break;
    case Mnemonic::OR: cpu.set_reg(in.rd, a | b); break;
    case Mnemonic::XOR: cpu.set_reg(in.rd, a ^ b); break;
    case Mnemonic::CMP: {
      std::uint32_t v = b - a;
      if (static_cast<std::int32_t>(a) > static_cast<std::int32_t>(b)) {
        v |= 0x80000000u;
      } else {
        v &= 0x7FFFFFFFu;
      }
      cpu.set_reg(in.rd, v);
      break;
    }
    case Mnemonic::SRA: cpu.set_reg(in.rd, static_cast<std::uint32_t>(static_cast<std::int32_t>(a) >> 1)); break;
    case Mnemonic::SRL: cpu.set_reg(in.rd, a >> 1); break;

    case Mnemonic::LW: cpu.set_reg(in.rd, load(cpu, dport, r, a + b, 4)); break;
    case Mnemonic::LBU: cpu.set_reg(in.rd, load(cpu, dport, r, a + b, 1)); break;
    case Mnemonic::SW: store(cpu, dport, r, a + b, 4, d); break;
    case Mnemonic::SB: store(cpu, dport, r, a + b, 1, d & 0xFF); break;

    case Mnemonic::BEQ: case Mnemonic::BNE: case Mnemonic::BLT:
    case Mnemonic::BLE: case Mnemonic::BGT: case Mnemonic::BGE:
      if (condition(in.mnemonic, static_cast<std::int32_t>(a))) branch(pc + b);
      break;
    case Mnemonic::BR: branch(pc + b); break;

    case Mnemonic::ADDI: cpu.set_reg(in.rd, a + imm); break;
    case Mnemonic::RSUBI: cpu.set_reg(in.rd, imm - a); break;
    case Mnemonic::ANDI: cpu.set_reg(in.rd, a & imm); break;
    case Mnemonic::ORI: cpu.set_reg(in.rd, a | imm); break;
    case Mnemonic::XORI: cpu.set_reg(in.rd, a ^ imm); break;
    case Mnemonic::BSLLI: cpu.set_reg(in.rd, a << (imm & 31)); break;
    case Mnemonic::BSRLI: cpu.set_reg(in.rd, a >> (imm & 31)); break;
    case Mnemonic::IMM: cpu.imm_latch = static_cast<std::uint16_t>(in.imm16); break;

    case Mnemonic::LWI: cpu.set_reg(in.rd, load(cpu, dport, r, a + imm, 4)); break;
    case Mnemonic::LBUI: cpu.set_reg(in.rd, load(cpu, dport, r, a + imm, 1)); break;
    case Mnemonic::SWI: store(cpu, dport, r, a + imm, 4, d); break;
    case Mnemonic::SBI: store(cpu, dport, r, a + imm, 1, d & 0xFF); break;

    case Mnemonic::BEQI: case Mnemonic::BNEI: case Mnemonic::BLTI:
    case Mnemonic::BLEI: case Mnemonic::BGTI: case Mnemonic::BGEI:
      if (condition(in.mnemonic, static_cast<std::int32_t>(a))) branch(pc + imm);
      break;
    case Mnemonic::BRI: branch(pc + imm); break;
    case Mnemonic::BRLID:
      cpu.set_reg(in.rd, pc);
      branch(pc + imm);
      break;
    case Mnemonic::RTSD: branch(a + imm); break;
    case Mnemonic::RTID:
      branch(a + imm);
      cpu.msr_ie = true;
      break;
    case Mnemonic::HALT:
      r.halted = true;
      next = pc;
      break;
  }

  cpu.pc = next;
  if (!r.halted && irq_line && cpu.msr_ie && !cpu.imm_latch) {
    take_interrupt(cpu);
    r.interrupt_taken = true;
  }
  r.next_pc = cpu.pc;
  if (timing != nullptr) {
    r.cycles = timing->cost(in.mnemonic) + (r.branch_taken ? timing->taken_branch_extra : 0);
  }
  return r;
}

}  // namespace mpsoc::isa
