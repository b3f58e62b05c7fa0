#pragma once

// MicroBlaze-style instruction subset: encoding table, decode and encode.
//
//   type A:  opcode(6) | rd(5) | ra(5) | rb(5) | 0(11)
//   type B:  opcode(6) | rd(5) | ra(5) | imm16
//
// Opcode numbers are this project's own; docs/isa.md lists them.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "common/error.hpp"

namespace mpsoc::isa {

enum class Mnemonic : std::uint8_t {
  ADD, RSUB, MUL, AND, OR, XOR, CMP, SRA, SRL,
  LW, LBU, SW, SB,
  BEQ, BNE, BLT, BLE, BGT, BGE, BR,
  ADDI, RSUBI, ANDI, ORI, XORI, BSLLI, BSRLI, IMM,
  LWI, LBUI, SWI, SBI,
  BEQI, BNEI, BLTI, BLEI, BGTI, BGEI, BRI, BRLID, RTSD, RTID,
  HALT,
};
inline constexpr std::size_t kMnemonicCount = static_cast<std::size_t>(Mnemonic::HALT) + 1;

enum class Form : std::uint8_t { A, B };

/// Assembly operand layout of a mnemonic.
enum class Operands : std::uint8_t {
  rd_ra_rb,    // ADD r3, r1, r2
  rd_ra,       // SRA r3, r1
  rd_ra_imm,   // ADDI r3, r1, -4
  imm,         // IMM 0x1234
  ra_rb,       // BEQ r1, r2       (offset in rb)
  ra_target,   // BEQI r1, label
  rb,          // BR r2
  target,      // BRI label
  rd_target,   // BRLID r15, label
  ra_imm,      // RTSD r15, 4
  none,        // HALT
};

struct OpcodeInfo {
  Mnemonic mnemonic;
  std::string_view name;
  std::uint8_t opcode;
  Form form;
  Operands operands;
  unsigned default_cycles;
  std::string_view semantics;
};

std::span<const OpcodeInfo> opcode_table();
const OpcodeInfo& info(Mnemonic m);
std::string_view name(Mnemonic m);
std::optional<Mnemonic> from_name(std::string_view name);  // case-insensitive
std::optional<Mnemonic> from_opcode(std::uint8_t opcode);

bool is_load(Mnemonic m);
bool is_store(Mnemonic m);
bool is_control_transfer(Mnemonic m);

/// Decoded instruction. Type A carries imm16 = 0, type B carries rb = 0.
struct Instruction {
  Mnemonic mnemonic = Mnemonic::ADD;
  std::uint8_t rd = 0;
  std::uint8_t ra = 0;
  std::uint8_t rb = 0;
  std::int16_t imm16 = 0;
  Form form = Form::A;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Builds a well-formed instruction (form taken from the table).
Instruction make(Mnemonic m, unsigned rd = 0, unsigned ra = 0, unsigned rb = 0, std::int32_t imm = 0);

class IllegalInstruction : public GuestFault {
 public:
  IllegalInstruction(std::uint32_t word, std::uint32_t pc = 0);
  std::uint32_t word() const noexcept { return word_; }

 private:
  std::uint32_t word_;
};

/// Throws IllegalInstruction for unknown opcodes and for type-A words with
/// non-zero reserved bits.
Instruction decode(std::uint32_t word);

/// Throws std::out_of_range when a register index exceeds 31.
std::uint32_t encode(const Instruction& in);

/// True when every field the operand layout ignores is zero, i.e. format()
/// followed by assembly reproduces the same word.
bool canonical_operands(const Instruction& in);

/// Assembly text, e.g. "ADDI r1, r0, -1". Branch targets render as raw
/// signed offsets so the output reassembles to the same word.
std::string format(const Instruction& in);

}  // namespace mpsoc::isa
