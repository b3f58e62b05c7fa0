#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "isa/cpu.hpp"
#include "isa/isa.hpp"
#include "isa/timing.hpp"
#include "support.hpp"

using namespace mpsoc::isa;
using test_support::SparseMemory;

namespace {

Instruction random_instruction(std::mt19937& rng) {
  const auto table = opcode_table();
  const auto& e = table[rng() % table.size()];
  Instruction in;
  in.mnemonic = e.mnemonic;
  in.form = e.form;
  in.rd = static_cast<std::uint8_t>(rng() % 32);
  in.ra = static_cast<std::uint8_t>(rng() % 32);
  if (e.form == Form::A) {
    in.rb = static_cast<std::uint8_t>(rng() % 32);
  } else {
    in.imm16 = static_cast<std::int16_t>(rng() & 0xFFFF);
  }
  return in;
}

}  // namespace

TEST(IsaTable, FortyThreeDistinctMnemonics) {
  EXPECT_EQ(opcode_table().size(), 43u);
  std::set<std::uint8_t> opcodes;
  std::set<std::string_view> names;
  for (const auto& e : opcode_table()) {
    opcodes.insert(e.opcode);
    names.insert(e.name);
    EXPECT_LT(e.opcode, 64);
    EXPECT_EQ(from_name(e.name), e.mnemonic);
    EXPECT_EQ(from_opcode(e.opcode), e.mnemonic);
  }
  EXPECT_EQ(opcodes.size(), 43u);
  EXPECT_EQ(names.size(), 43u);
  EXPECT_EQ(from_name("addi"), Mnemonic::ADDI);
  EXPECT_FALSE(from_name("FOO"));
}

TEST(IsaCodec, RandomRoundTrip) {
  std::mt19937 rng(2024);
  for (int i = 0; i < 5000; ++i) {
    const auto in = random_instruction(rng);
    const auto w = encode(in);
    EXPECT_EQ(decode(w), in) << format(in);
    EXPECT_EQ(encode(decode(w)), w);
  }
}

TEST(IsaCodec, RandomWordsDecodeOrReject) {
  // decode∘encode is the identity on every word that decodes.
  std::mt19937 rng(99);
  int decoded = 0;
  for (int i = 0; i < 20000; ++i) {
    const std::uint32_t w = rng();
    try {
      const auto in = decode(w);
      EXPECT_EQ(encode(in), w);
      ++decoded;
    } catch (const IllegalInstruction& e) {
      EXPECT_EQ(e.word(), w);
    }
  }
  EXPECT_GT(decoded, 1000);
}

TEST(IsaCodec, Examples) {
  EXPECT_EQ(decode(encode(make(Mnemonic::ADD, 3, 1, 2))), make(Mnemonic::ADD, 3, 1, 2));
  const auto addi = decode(encode(make(Mnemonic::ADDI, 5, 0, 0, -1)));
  EXPECT_EQ(addi.imm16, -1);
  EXPECT_EQ(addi.form, Form::B);
  EXPECT_EQ(encode(make(Mnemonic::ADD)) & 0x1FFFFF, 0u);
  EXPECT_EQ(encode(make(Mnemonic::ADDI, 1, 2, 0, 0x1234)),
            (0x20u << 26) | (1u << 21) | (2u << 16) | 0x1234u);
  Instruction bad = make(Mnemonic::ADD);
  bad.rd = 32;
  EXPECT_THROW(encode(bad), std::out_of_range);
}

TEST(IsaCodec, IllegalWords) {
  for (std::uint32_t op = 0; op < 64; ++op) {
    const std::uint32_t w = op << 26;
    if (from_opcode(static_cast<std::uint8_t>(op))) {
      EXPECT_NO_THROW(decode(w));
    } else {
      EXPECT_THROW(decode(w), IllegalInstruction) << op;
    }
  }
  // Type A with reserved bits set.
  EXPECT_THROW(decode(encode(make(Mnemonic::ADD, 1, 2, 3)) | 1u), IllegalInstruction);
}

TEST(IsaCodec, FormatReadsBack) {
  EXPECT_EQ(format(make(Mnemonic::ADDI, 1, 0, 0, -1)), "ADDI r1, r0, -1");
  EXPECT_EQ(format(make(Mnemonic::HALT)), "HALT");
  EXPECT_EQ(format(make(Mnemonic::BRI, 0, 0, 0, -8)), "BRI -8");
}

TEST(IsaDoc, OneRowPerMnemonic) {
  std::ifstream in(MPSOC_SOURCE_DIR "/docs/isa.md");
  ASSERT_TRUE(in) << "docs/isa.md missing";
  std::map<std::string, std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("| ", 0) != 0) continue;
    std::istringstream cols(line.substr(2));
    std::string name, bar, opcode;
    cols >> name >> bar >> opcode;
    rows[name] = opcode;
  }
  for (const auto& e : opcode_table()) {
    ASSERT_TRUE(rows.count(std::string(e.name))) << e.name;
    EXPECT_EQ(std::stoul(rows[std::string(e.name)], nullptr, 16), e.opcode) << e.name;
  }
}

// ---------------------------------------------------------------------------
// Semantics, one case per mnemonic.

namespace {

constexpr std::uint32_t kPc = 0x100;

struct Machine {
  CpuState cpu;
  SparseMemory mem;
  StepResult result;
};

Machine exec(const Instruction& in, const std::function<void(Machine&)>& setup = {}) {
  Machine m;
  m.cpu.pc = kPc;
  m.mem.put_word(kPc, encode(in));
  if (setup) setup(m);
  const auto timing = TimingTable::defaults();
  m.result = step(m.cpu, m.mem, m.mem, &timing);
  return m;
}

Machine with_regs(const Instruction& in, std::uint32_t ra_val, std::uint32_t rb_val, std::uint32_t rd_val = 0) {
  return exec(in, [&](Machine& m) {
    m.cpu.set_reg(in.ra, ra_val);
    m.cpu.set_reg(in.rb, rb_val);
    if (in.rd != in.ra && in.rd != in.rb) m.cpu.set_reg(in.rd, rd_val);
  });
}

// Mnemonics with a semantics test below, registered at static init so the
// coverage check does not depend on test execution order.
std::set<Mnemonic>& covered() {
  static std::set<Mnemonic> s;
  return s;
}

bool covers(std::initializer_list<Mnemonic> ms) {
  covered().insert(ms.begin(), ms.end());
  return true;
}

using M = Mnemonic;

}  // namespace

[[maybe_unused]] const bool covers_Add = covers({M::ADD});

TEST(IsaSemantics, Add) {
  auto m = with_regs(make(M::ADD, 3, 1, 2), 2, 3);
  EXPECT_EQ(m.cpu.reg(3), 5u);
  EXPECT_EQ(m.result.next_pc, kPc + 4);
  EXPECT_EQ(with_regs(make(M::ADD, 3, 1, 2), 0xFFFFFFFF, 1).cpu.reg(3), 0u);
}

[[maybe_unused]] const bool covers_Rsub = covers({M::RSUB});

TEST(IsaSemantics, Rsub) {
  EXPECT_EQ(with_regs(make(M::RSUB, 3, 1, 2), 5, 3).cpu.reg(3), static_cast<std::uint32_t>(-2));
}

[[maybe_unused]] const bool covers_Mul = covers({M::MUL});

TEST(IsaSemantics, Mul) {
  EXPECT_EQ(with_regs(make(M::MUL, 3, 1, 2), 7, 6).cpu.reg(3), 42u);
  EXPECT_EQ(with_regs(make(M::MUL, 3, 1, 2), 0x10000, 0x10001).cpu.reg(3), 0x10000u);
  EXPECT_EQ(exec(make(M::MUL, 3, 1, 2)).result.cycles, 3u);
}

[[maybe_unused]] const bool covers_LogicOps = covers({M::AND, M::OR, M::XOR});

TEST(IsaSemantics, LogicOps) {
  EXPECT_EQ(with_regs(make(M::AND, 3, 1, 2), 0xF0F0, 0xFF00).cpu.reg(3), 0xF000u);
  EXPECT_EQ(with_regs(make(M::OR, 3, 1, 2), 0xF0F0, 0xFF00).cpu.reg(3), 0xFFF0u);
  EXPECT_EQ(with_regs(make(M::XOR, 3, 1, 2), 0xF0F0, 0xFF00).cpu.reg(3), 0x0FF0u);
}

[[maybe_unused]] const bool covers_Cmp = covers({M::CMP});

TEST(IsaSemantics, Cmp) {
  // ra > rb (signed) sets bit 31.
  EXPECT_EQ(with_regs(make(M::CMP, 3, 1, 2), 5, 3).cpu.reg(3) >> 31, 1u);
  EXPECT_EQ(with_regs(make(M::CMP, 3, 1, 2), 3, 5).cpu.reg(3), 2u);
  EXPECT_EQ(with_regs(make(M::CMP, 3, 1, 2), 4, 4).cpu.reg(3), 0u);
  // Signed: -1 > -2.
  EXPECT_EQ(with_regs(make(M::CMP, 3, 1, 2), 0xFFFFFFFF, 0xFFFFFFFE).cpu.reg(3) >> 31, 1u);
  // No overflow trap in the sign bit: 0x7FFFFFFF vs 0x80000000.
  EXPECT_EQ(with_regs(make(M::CMP, 3, 1, 2), 0x7FFFFFFF, 0x80000000).cpu.reg(3) >> 31, 1u);
}

[[maybe_unused]] const bool covers_Shifts = covers({M::SRA, M::SRL, M::BSLLI, M::BSRLI});

TEST(IsaSemantics, Shifts) {
  EXPECT_EQ(with_regs(make(M::SRA, 3, 1), 0x80000004, 0).cpu.reg(3), 0xC0000002u);
  EXPECT_EQ(with_regs(make(M::SRL, 3, 1), 0x80000004, 0).cpu.reg(3), 0x40000002u);
  EXPECT_EQ(with_regs(make(M::BSLLI, 3, 1, 0, 4), 0x0F000001, 0).cpu.reg(3), 0xF0000010u);
  EXPECT_EQ(with_regs(make(M::BSRLI, 3, 1, 0, 4), 0xF0000010, 0).cpu.reg(3), 0x0F000001u);
  EXPECT_EQ(with_regs(make(M::BSLLI, 3, 1, 0, 33), 1, 0).cpu.reg(3), 2u);  // amount & 31
}

[[maybe_unused]] const bool covers_RegisterLoadsAndStores = covers({M::LW, M::LBU, M::SW, M::SB});

TEST(IsaSemantics, RegisterLoadsAndStores) {
  auto lw = exec(make(M::LW, 3, 1, 2), [](Machine& m) {
    m.cpu.set_reg(1, 0x20100000);
    m.cpu.set_reg(2, 8);
    m.mem.put_word(0x20100008, 0xCAFEBABE);
  });
  EXPECT_EQ(lw.cpu.reg(3), 0xCAFEBABEu);
  ASSERT_EQ(lw.result.transactions().size(), 1u);
  EXPECT_EQ(lw.result.transactions()[0].address, 0x20100008u);
  EXPECT_EQ(lw.result.cycles, 2u);

  auto lbu = exec(make(M::LBU, 3, 1, 2), [](Machine& m) {
    m.cpu.set_reg(1, 0x20100000);
    m.cpu.set_reg(2, 1);
    m.mem.put_word(0x20100000, 0x11F23344);
  });
  EXPECT_EQ(lbu.cpu.reg(3), 0xF2u);

  auto sw = exec(make(M::SW, 3, 1, 2), [](Machine& m) {
    m.cpu.set_reg(1, 0x20100000);
    m.cpu.set_reg(2, 4);
    m.cpu.set_reg(3, 0x01020304);
  });
  EXPECT_EQ(sw.mem.word(0x20100004), 0x01020304u);
  EXPECT_EQ(sw.result.transactions()[0].kind, mpsoc::bus::Kind::write);

  auto sb = exec(make(M::SB, 3, 1, 2), [](Machine& m) {
    m.cpu.set_reg(1, 0x20100000);
    m.cpu.set_reg(3, 0x1234ABu);
  });
  ASSERT_EQ(sb.result.transactions().size(), 1u);
  const auto& t = sb.result.transactions()[0];
  EXPECT_EQ(t.width, 1);
  EXPECT_EQ(t.address, 0x20100000u);
  EXPECT_EQ(t.value(), 0xABu);
}

[[maybe_unused]] const bool covers_ImmediateLoadsAndStores = covers({M::LWI, M::LBUI, M::SWI, M::SBI});

TEST(IsaSemantics, ImmediateLoadsAndStores) {
  auto lwi = exec(make(M::LWI, 3, 1, 0, -4), [](Machine& m) {
    m.cpu.set_reg(1, 0x1004);
    m.mem.put_word(0x1000, 77);
  });
  EXPECT_EQ(lwi.cpu.reg(3), 77u);
  auto lbui = exec(make(M::LBUI, 3, 1, 0, 3), [](Machine& m) {
    m.cpu.set_reg(1, 0x1000);
    m.mem.put_word(0x1000, 0x000000FE);
  });
  EXPECT_EQ(lbui.cpu.reg(3), 0xFEu);
  auto swi = exec(make(M::SWI, 3, 1, 0, 8), [](Machine& m) {
    m.cpu.set_reg(1, 0x1000);
    m.cpu.set_reg(3, 0xDEADBEEF);
  });
  EXPECT_EQ(swi.mem.word(0x1008), 0xDEADBEEFu);
  auto sbi = exec(make(M::SBI, 3, 1, 0, 2), [](Machine& m) {
    m.cpu.set_reg(1, 0x1000);
    m.cpu.set_reg(3, 0x77);
  });
  EXPECT_EQ(sbi.mem.word(0x1000), 0x00007700u);
}

[[maybe_unused]] const bool covers_ImmediateArithmetic = covers({M::ADDI, M::RSUBI, M::ANDI, M::ORI, M::XORI});

TEST(IsaSemantics, ImmediateArithmetic) {
  EXPECT_EQ(with_regs(make(M::ADDI, 3, 1, 0, -1), 10, 0).cpu.reg(3), 9u);
  EXPECT_EQ(with_regs(make(M::RSUBI, 3, 1, 0, 10), 4, 0).cpu.reg(3), 6u);
  EXPECT_EQ(with_regs(make(M::ANDI, 3, 1, 0, 0x00FF), 0x1234, 0).cpu.reg(3), 0x34u);
  // Sign extension reaches the upper half.
  EXPECT_EQ(with_regs(make(M::ANDI, 3, 1, 0, -256), 0x12345678, 0).cpu.reg(3), 0x12345600u);
  EXPECT_EQ(with_regs(make(M::ORI, 3, 1, 0, 0x0F), 0x30, 0).cpu.reg(3), 0x3Fu);
  EXPECT_EQ(with_regs(make(M::XORI, 3, 1, 0, -1), 0, 0).cpu.reg(3), 0xFFFFFFFFu);
}

[[maybe_unused]] const bool covers_ImmPrefix = covers({M::IMM});

TEST(IsaSemantics, ImmPrefix) {
  Machine m;
  m.cpu.pc = kPc;
  m.mem.put_word(kPc, encode(make(M::IMM, 0, 0, 0, 0x0001)));
  m.mem.put_word(kPc + 4, encode(make(M::ADDI, 1, 0, 0, 0)));
  m.mem.put_word(kPc + 8, encode(make(M::ADDI, 2, 0, 0, -1)));
  step(m.cpu, m.mem, m.mem, nullptr);
  EXPECT_EQ(m.cpu.imm_latch, std::optional<std::uint16_t>(1));
  step(m.cpu, m.mem, m.mem, nullptr);
  EXPECT_EQ(m.cpu.reg(1), 0x00010000u);
  EXPECT_FALSE(m.cpu.imm_latch);
  step(m.cpu, m.mem, m.mem, nullptr);
  EXPECT_EQ(m.cpu.reg(2), 0xFFFFFFFFu);
}

[[maybe_unused]] const bool covers_RegisterBranches = covers({M::BR, M::BEQ, M::BNE, M::BLT, M::BLE, M::BGT, M::BGE});

TEST(IsaSemantics, RegisterBranches) {
  struct Case {
    M m;
    std::int32_t taken_for;
    std::int32_t not_taken_for;
  };
  const Case cases[] = {{M::BEQ, 0, 1},  {M::BNE, -3, 0}, {M::BLT, -1, 0},
                        {M::BLE, 0, 1},  {M::BGT, 1, 0},  {M::BGE, 0, -1}};
  for (const auto& c : cases) {
    auto taken = with_regs(make(c.m, 0, 1, 2), static_cast<std::uint32_t>(c.taken_for), 0x40);
    EXPECT_EQ(taken.result.next_pc, kPc + 0x40) << name(c.m);
    EXPECT_TRUE(taken.result.branch_taken);
    EXPECT_EQ(taken.result.cycles, 1u + 2u);
    auto not_taken = with_regs(make(c.m, 0, 1, 2), static_cast<std::uint32_t>(c.not_taken_for), 0x40);
    EXPECT_EQ(not_taken.result.next_pc, kPc + 4) << name(c.m);
    EXPECT_EQ(not_taken.result.cycles, 1u);
  }
  EXPECT_EQ(with_regs(make(M::BR, 0, 0, 2), 0, static_cast<std::uint32_t>(-8)).result.next_pc, kPc - 8);
}

[[maybe_unused]] const bool covers_ImmediateBranches = covers({M::BRI, M::BEQI, M::BNEI, M::BLTI, M::BLEI, M::BGTI, M::BGEI});

TEST(IsaSemantics, ImmediateBranches) {
  struct Case {
    M m;
    std::int32_t taken_for;
    std::int32_t not_taken_for;
  };
  const Case cases[] = {{M::BEQI, 0, 5}, {M::BNEI, 5, 0}, {M::BLTI, -5, 5},
                        {M::BLEI, -5, 5}, {M::BGTI, 5, -5}, {M::BGEI, 5, -5}};
  for (const auto& c : cases) {
    EXPECT_EQ(with_regs(make(c.m, 0, 1, 0, -16), static_cast<std::uint32_t>(c.taken_for), 0).result.next_pc,
              kPc - 16)
        << name(c.m);
    EXPECT_EQ(with_regs(make(c.m, 0, 1, 0, -16), static_cast<std::uint32_t>(c.not_taken_for), 0).result.next_pc,
              kPc + 4)
        << name(c.m);
  }
  EXPECT_EQ(exec(make(M::BRI, 0, 0, 0, 12)).result.next_pc, kPc + 12);
}

[[maybe_unused]] const bool covers_CallAndReturn = covers({M::BRLID, M::RTSD});

TEST(IsaSemantics, CallAndReturn) {
  auto call = exec(make(M::BRLID, 15, 0, 0, 0x20));
  EXPECT_EQ(call.cpu.reg(15), kPc);
  EXPECT_EQ(call.result.next_pc, kPc + 0x20);
  auto ret = with_regs(make(M::RTSD, 0, 15, 0, 8), 0x300, 0);
  EXPECT_EQ(ret.result.next_pc, 0x308u);
}

[[maybe_unused]] const bool covers_InterruptReturn = covers({M::RTID});

TEST(IsaSemantics, InterruptReturn) {
  auto m = with_regs(make(M::RTID, 0, 14, 0, 0), 0x104, 0);
  EXPECT_EQ(m.cpu.pc, 0x104u);
  EXPECT_TRUE(m.cpu.msr_ie);
}

[[maybe_unused]] const bool covers_Halt = covers({M::HALT});

TEST(IsaSemantics, Halt) {
  auto m = exec(make(M::HALT));
  EXPECT_TRUE(m.result.halted);
  EXPECT_EQ(m.cpu.pc, kPc);
}

TEST(IsaSemantics, ZeroRegisterStaysZero) {
  EXPECT_EQ(with_regs(make(M::ADDI, 0, 0, 0, 55), 0, 0).cpu.reg(0), 0u);
  std::mt19937 rng(5);
  CpuState cpu;
  SparseMemory mem;
  for (int i = 0; i < 2000; ++i) {
    // Random ALU and immediate instructions only; no control flow.
    static const M alu[] = {M::ADD, M::RSUB, M::MUL, M::AND, M::OR, M::XOR, M::CMP, M::SRA, M::SRL,
                            M::ADDI, M::RSUBI, M::ANDI, M::ORI, M::XORI, M::BSLLI, M::BSRLI, M::IMM};
    const auto mn = alu[rng() % std::size(alu)];
    const auto in = make(mn, rng() % 32, rng() % 32, info(mn).form == Form::A ? rng() % 32 : 0,
                         static_cast<std::int16_t>(rng()));
    Instruction canon = in;
    if (mn == M::SRA || mn == M::SRL) canon.rb = 0;
    if (mn == M::IMM) canon.rd = canon.ra = 0;
    mem.put_word(cpu.pc, encode(canon));
    step(cpu, mem, mem, nullptr);
    ASSERT_EQ(cpu.reg(0), 0u);
  }
}

TEST(IsaSemantics, StepIsPure) {
  std::mt19937 rng(11);
  for (int i = 0; i < 300; ++i) {
    Machine a;
    a.cpu.pc = kPc;
    for (unsigned r = 1; r < 32; ++r) a.cpu.set_reg(r, rng() & 0xFFFC);
    Instruction in = random_instruction(rng);
    if (in.mnemonic == M::HALT) continue;
    a.mem.put_word(kPc, encode(in));
    try {
      decode(encode(in));
    } catch (...) {
      continue;
    }
    Machine b = a;
    const auto timing = TimingTable::defaults();
    const auto ra = step(a.cpu, a.mem, a.mem, &timing);
    const auto rb = step(b.cpu, b.mem, b.mem, &timing);
    EXPECT_EQ(a.cpu, b.cpu);
    EXPECT_EQ(ra.cycles, rb.cycles);
    EXPECT_EQ(ra.next_pc, rb.next_pc);
    EXPECT_GE(ra.cycles, 1u);
    ASSERT_EQ(ra.transactions().size(), rb.transactions().size());
    for (std::size_t k = 0; k < ra.transactions().size(); ++k) EXPECT_EQ(ra.transactions()[k], rb.transactions()[k]);
  }
}

TEST(IsaSemantics, EveryMnemonicCovered) {
  for (const auto& e : opcode_table()) EXPECT_TRUE(covered().count(e.mnemonic)) << e.name;
}

// ---------------------------------------------------------------------------

TEST(IsaTiming, DefaultsAndParse) {
  const auto d = TimingTable::defaults();
  EXPECT_NO_THROW(d.validate());
  for (const auto& e : opcode_table()) EXPECT_EQ(d.cost(e.mnemonic), e.default_cycles);
  const auto t = TimingTable::parse("clock_period_ns = 5\nADD = 4 ; slow adder\n");
  EXPECT_EQ(t.clock_period_ns, 5u);
  EXPECT_EQ(t.cost(M::ADD), 4u);
  EXPECT_EQ(t.cost(M::MUL), 3u);
  EXPECT_EQ(TimingTable::parse(d.to_text()), d);
  EXPECT_THROW(TimingTable::parse("ADD = 0"), mpsoc::ConfigError);
  EXPECT_THROW(TimingTable::parse("FOO = 1"), mpsoc::ConfigError);
  EXPECT_THROW(TimingTable::parse("clock_period_ns = 0"), mpsoc::ConfigError);
}

TEST(IsaTiming, ShippedFileMatchesDefaults) {
  EXPECT_EQ(TimingTable::load(MPSOC_SOURCE_DIR "/timing/default.timing"), TimingTable::defaults());
}
