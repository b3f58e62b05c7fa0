#include "isa/isa.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

#include "common/text.hpp"

namespace mpsoc::isa {

namespace {

using M = Mnemonic;
using O = Operands;

constexpr std::array<OpcodeInfo, kMnemonicCount> kTable{{
    {M::ADD, "ADD", 0x00, Form::A, O::rd_ra_rb, 1, "rd = ra + rb"},
    {M::RSUB, "RSUB", 0x01, Form::A, O::rd_ra_rb, 1, "rd = rb - ra"},
    {M::MUL, "MUL", 0x02, Form::A, O::rd_ra_rb, 3, "rd = low 32 bits of ra * rb"},
    {M::AND, "AND", 0x03, Form::A, O::rd_ra_rb, 1, "rd = ra & rb"},
    {M::OR, "OR", 0x04, Form::A, O::rd_ra_rb, 1, "rd = ra | rb"},
    {M::XOR, "XOR", 0x05, Form::A, O::rd_ra_rb, 1, "rd = ra ^ rb"},
    {M::CMP, "CMP", 0x06, Form::A, O::rd_ra_rb, 1, "rd = rb - ra; bit 31 = (ra > rb signed)"},
    {M::SRA, "SRA", 0x07, Form::A, O::rd_ra, 1, "rd = ra >> 1 (arithmetic)"},
    {M::SRL, "SRL", 0x08, Form::A, O::rd_ra, 1, "rd = ra >> 1 (logical)"},
    {M::LW, "LW", 0x09, Form::A, O::rd_ra_rb, 2, "rd = mem32[ra + rb]"},
    {M::LBU, "LBU", 0x0A, Form::A, O::rd_ra_rb, 2, "rd = zero-extended mem8[ra + rb]"},
    {M::SW, "SW", 0x0B, Form::A, O::rd_ra_rb, 2, "mem32[ra + rb] = rd"},
    {M::SB, "SB", 0x0C, Form::A, O::rd_ra_rb, 2, "mem8[ra + rb] = low byte of rd"},
    {M::BEQ, "BEQ", 0x0D, Form::A, O::ra_rb, 1, "if ra == 0: pc += rb"},
    {M::BNE, "BNE", 0x0E, Form::A, O::ra_rb, 1, "if ra != 0: pc += rb"},
    {M::BLT, "BLT", 0x0F, Form::A, O::ra_rb, 1, "if ra < 0: pc += rb"},
    {M::BLE, "BLE", 0x10, Form::A, O::ra_rb, 1, "if ra <= 0: pc += rb"},
    {M::BGT, "BGT", 0x11, Form::A, O::ra_rb, 1, "if ra > 0: pc += rb"},
    {M::BGE, "BGE", 0x12, Form::A, O::ra_rb, 1, "if ra >= 0: pc += rb"},
    {M::BR, "BR", 0x13, Form::A, O::rb, 1, "pc += rb"},
    {M::ADDI, "ADDI", 0x20, Form::B, O::rd_ra_imm, 1, "rd = ra + imm"},
    {M::RSUBI, "RSUBI", 0x21, Form::B, O::rd_ra_imm, 1, "rd = imm - ra"},
    {M::ANDI, "ANDI", 0x22, Form::B, O::rd_ra_imm, 1, "rd = ra & imm"},
    {M::ORI, "ORI", 0x23, Form::B, O::rd_ra_imm, 1, "rd = ra | imm"},
    {M::XORI, "XORI", 0x24, Form::B, O::rd_ra_imm, 1, "rd = ra ^ imm"},
    {M::BSLLI, "BSLLI", 0x25, Form::B, O::rd_ra_imm, 1, "rd = ra << (imm & 31)"},
    {M::BSRLI, "BSRLI", 0x26, Form::B, O::rd_ra_imm, 1, "rd = ra >> (imm & 31) (logical)"},
    {M::IMM, "IMM", 0x27, Form::B, O::imm, 1, "latch imm as the upper halfword of the next type-B immediate"},
    {M::LWI, "LWI", 0x28, Form::B, O::rd_ra_imm, 2, "rd = mem32[ra + imm]"},
    {M::LBUI, "LBUI", 0x29, Form::B, O::rd_ra_imm, 2, "rd = zero-extended mem8[ra + imm]"},
    {M::SWI, "SWI", 0x2A, Form::B, O::rd_ra_imm, 2, "mem32[ra + imm] = rd"},
    {M::SBI, "SBI", 0x2B, Form::B, O::rd_ra_imm, 2, "mem8[ra + imm] = low byte of rd"},
    {M::BEQI, "BEQI", 0x2C, Form::B, O::ra_target, 1, "if ra == 0: pc += imm"},
    {M::BNEI, "BNEI", 0x2D, Form::B, O::ra_target, 1, "if ra != 0: pc += imm"},
    {M::BLTI, "BLTI", 0x2E, Form::B, O::ra_target, 1, "if ra < 0: pc += imm"},
    {M::BLEI, "BLEI", 0x2F, Form::B, O::ra_target, 1, "if ra <= 0: pc += imm"},
    {M::BGTI, "BGTI", 0x30, Form::B, O::ra_target, 1, "if ra > 0: pc += imm"},
    {M::BGEI, "BGEI", 0x31, Form::B, O::ra_target, 1, "if ra >= 0: pc += imm"},
    {M::BRI, "BRI", 0x32, Form::B, O::target, 1, "pc += imm"},
    {M::BRLID, "BRLID", 0x33, Form::B, O::rd_target, 1, "rd = pc; pc += imm"},
    {M::RTSD, "RTSD", 0x34, Form::B, O::ra_imm, 1, "pc = ra + imm"},
    {M::RTID, "RTID", 0x35, Form::B, O::ra_imm, 1, "pc = ra + imm; MSR[IE] = 1"},
    {M::HALT, "HALT", 0x3F, Form::A, O::none, 1, "stop this CPU"},
}};

constexpr std::array<std::int16_t, 64> build_opcode_index() {
  std::array<std::int16_t, 64> idx{};
  for (auto& v : idx) v = -1;
  for (std::size_t i = 0; i < kTable.size(); ++i) idx[kTable[i].opcode] = static_cast<std::int16_t>(i);
  return idx;
}

constexpr auto kOpcodeIndex = build_opcode_index();

static_assert([] {
  for (std::size_t i = 0; i < kTable.size(); ++i)
    if (static_cast<std::size_t>(kTable[i].mnemonic) != i) return false;
  return true;
}(), "opcode table must be indexed by mnemonic");

}  // namespace

std::span<const OpcodeInfo> opcode_table() { return kTable; }

const OpcodeInfo& info(Mnemonic m) { return kTable[static_cast<std::size_t>(m)]; }

std::string_view name(Mnemonic m) { return info(m).name; }

std::optional<Mnemonic> from_name(std::string_view n) {
  const auto up = text::upper(n);
  for (const auto& e : kTable)
    if (e.name == up) return e.mnemonic;
  return std::nullopt;
}

std::optional<Mnemonic> from_opcode(std::uint8_t opcode) {
  if (opcode >= 64 || kOpcodeIndex[opcode] < 0) return std::nullopt;
  return kTable[static_cast<std::size_t>(kOpcodeIndex[opcode])].mnemonic;
}

bool is_load(Mnemonic m) { return m == M::LW || m == M::LBU || m == M::LWI || m == M::LBUI; }
bool is_store(Mnemonic m) { return m == M::SW || m == M::SB || m == M::SWI || m == M::SBI; }

bool is_control_transfer(Mnemonic m) {
  switch (info(m).operands) {
    case O::ra_rb:
    case O::ra_target:
    case O::rb:
    case O::target:
    case O::rd_target:
    case O::ra_imm:
      return true;
    default:
      return false;
  }
}

Instruction make(Mnemonic m, unsigned rd, unsigned ra, unsigned rb, std::int32_t imm) {
  Instruction in;
  in.mnemonic = m;
  in.form = info(m).form;
  in.rd = static_cast<std::uint8_t>(rd);
  in.ra = static_cast<std::uint8_t>(ra);
  if (in.form == Form::A) {
    in.rb = static_cast<std::uint8_t>(rb);
  } else {
    in.imm16 = static_cast<std::int16_t>(imm);
  }
  return in;
}

IllegalInstruction::IllegalInstruction(std::uint32_t word, std::uint32_t pc)
    : GuestFault(fmt::format("illegal instruction 0x{:08x}", word), pc), word_(word) {}

Instruction decode(std::uint32_t word) {
  const auto opcode = static_cast<std::uint8_t>(word >> 26);
  const auto m = from_opcode(opcode);
  if (!m) throw IllegalInstruction(word);
  Instruction in;
  in.mnemonic = *m;
  in.form = info(*m).form;
  in.rd = static_cast<std::uint8_t>((word >> 21) & 0x1F);
  in.ra = static_cast<std::uint8_t>((word >> 16) & 0x1F);
  if (in.form == Form::A) {
    if ((word & 0x7FF) != 0) throw IllegalInstruction(word);
    in.rb = static_cast<std::uint8_t>((word >> 11) & 0x1F);
  } else {
    in.imm16 = static_cast<std::int16_t>(word & 0xFFFF);
  }
  return in;
}

std::uint32_t encode(const Instruction& in) {
  if (in.rd > 31 || in.ra > 31 || in.rb > 31) {
    throw std::out_of_range(fmt::format("register index out of range in {} (rd={}, ra={}, rb={})",
                                        name(in.mnemonic), in.rd, in.ra, in.rb));
  }
  const auto& e = info(in.mnemonic);
  std::uint32_t w = static_cast<std::uint32_t>(e.opcode) << 26;
  w |= static_cast<std::uint32_t>(in.rd) << 21;
  w |= static_cast<std::uint32_t>(in.ra) << 16;
  if (e.form == Form::A) {
    w |= static_cast<std::uint32_t>(in.rb) << 11;
  } else {
    w |= static_cast<std::uint16_t>(in.imm16);
  }
  return w;
}

bool canonical_operands(const Instruction& in) {
  switch (info(in.mnemonic).operands) {
    case O::rd_ra_rb:
    case O::rd_ra_imm: return true;
    case O::rd_ra: return in.rb == 0;
    case O::imm:
    case O::target: return in.rd == 0 && in.ra == 0;
    case O::rb: return in.rd == 0 && in.ra == 0;
    case O::ra_rb:
    case O::ra_target:
    case O::ra_imm: return in.rd == 0;
    case O::rd_target: return in.ra == 0;
    case O::none: return in.rd == 0 && in.ra == 0 && in.rb == 0;
  }
  return false;
}

std::string format(const Instruction& in) {
  const auto n = name(in.mnemonic);
  switch (info(in.mnemonic).operands) {
    case O::rd_ra_rb: return fmt::format("{} r{}, r{}, r{}", n, in.rd, in.ra, in.rb);
    case O::rd_ra: return fmt::format("{} r{}, r{}", n, in.rd, in.ra);
    case O::rd_ra_imm: return fmt::format("{} r{}, r{}, {}", n, in.rd, in.ra, in.imm16);
    case O::imm: return fmt::format("{} {}", n, in.imm16);
    case O::ra_rb: return fmt::format("{} r{}, r{}", n, in.ra, in.rb);
    case O::ra_target: return fmt::format("{} r{}, {}", n, in.ra, in.imm16);
    case O::rb: return fmt::format("{} r{}", n, in.rb);
    case O::target: return fmt::format("{} {}", n, in.imm16);
    case O::rd_target: return fmt::format("{} r{}, {}", n, in.rd, in.imm16);
    case O::ra_imm: return fmt::format("{} r{}, {}", n, in.ra, in.imm16);
    case O::none: return std::string(n);
  }
  return std::string(n);
}

}  // namespace mpsoc::isa
