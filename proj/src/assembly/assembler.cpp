#include "assembly/assembler.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <vector>

#include "common/bytes.hpp"
#include "common/text.hpp"
#include "isa/isa.hpp"

namespace mpsoc::assembly {

AsmError::AsmError(int line, const std::string& msg, const std::string& file)
    : ConfigError(file.empty() ? fmt::format("line {}: {}", line, msg) : fmt::format("{}:{}: {}", file, line, msg)),
      line_(line),
      detail_(msg) {}

namespace {

using isa::Mnemonic;
using isa::Operands;

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

bool is_identifier(std::string_view s) {
  if (s.empty() || !ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), ident_char);
}

struct Value {
  std::int64_t v = 0;
  bool symbolic = false;
};

struct SymbolDef {
  std::uint32_t value;
  int line;
};

class Assembler {
 public:
  Image run(std::string_view source);

 private:
  struct Statement {
    int line;
    std::string op;  // upper-case mnemonic or lower-case directive
    std::vector<std::string_view> args;
    std::uint32_t address;
  };
  struct OpenSection {
    std::uint32_t base;
    int line;
    std::vector<std::uint8_t> bytes;
  };

  std::optional<Value> eval(std::string_view expr, int line, bool require_defined);
  Value must_eval(std::string_view expr, int line) { return *eval(expr, line, true); }
  std::uint32_t reg(std::string_view s, int line);
  void define(std::string_view name, std::uint32_t value, int line);
  void emit_word(std::uint32_t w);
  void emit_instruction(const Statement& st);
  std::uint32_t size_of(const Statement& st);

  std::map<std::string, SymbolDef, std::less<>> symbols_;
  std::vector<OpenSection> sections_;
  std::uint32_t pc_ = 0;
};

std::optional<Value> Assembler::eval(std::string_view expr, int line, bool require_defined) {
  expr = text::trim(expr);
  if (expr.empty()) throw AsmError(line, "missing operand");
  Value out;
  std::size_t i = 0;
  int sign = 1;
  bool expect_term = true;
  while (i < expr.size()) {
    const char c = expr[i];
    if (c == ' ' || c == '\t') {
      ++i;
      continue;
    }
    if (!expect_term) {
      if (c != '+' && c != '-') throw AsmError(line, fmt::format("bad expression '{}'", expr));
      sign = c == '-' ? -1 : 1;
      expect_term = true;
      ++i;
      continue;
    }
    if (c == '-' && sign == 1) {
      sign = -1;
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < expr.size() && (ident_char(expr[j]) || std::isalnum(static_cast<unsigned char>(expr[j])))) ++j;
    const auto term = expr.substr(i, j - i);
    if (term.empty()) throw AsmError(line, fmt::format("bad expression '{}'", expr));
    std::int64_t v;
    if (ident_start(term[0])) {
      auto it = symbols_.find(term);
      if (it == symbols_.end()) {
        if (require_defined) throw AsmError(line, fmt::format("undefined symbol '{}'", term));
        return std::nullopt;
      }
      v = it->second.value;
      out.symbolic = true;
    } else {
      const auto n = text::parse_int(term);
      if (!n) throw AsmError(line, fmt::format("bad number '{}'", term));
      v = *n;
    }
    out.v += sign * v;
    sign = 1;
    expect_term = false;
    i = j;
  }
  if (expect_term) throw AsmError(line, fmt::format("bad expression '{}'", expr));
  return out;
}

std::uint32_t Assembler::reg(std::string_view s, int line) {
  s = text::trim(s);
  if (s.size() >= 2 && (s[0] == 'r' || s[0] == 'R')) {
    const auto n = text::parse_int(s.substr(1));
    if (n && *n >= 0 && *n <= 31 && std::isdigit(static_cast<unsigned char>(s[1]))) {
      return static_cast<std::uint32_t>(*n);
    }
  }
  throw AsmError(line, fmt::format("expected register, got '{}'", s));
}

void Assembler::define(std::string_view name, std::uint32_t value, int line) {
  if (!is_identifier(name)) throw AsmError(line, fmt::format("bad symbol name '{}'", name));
  if (auto it = symbols_.find(name); it != symbols_.end()) {
    throw AsmError(line, fmt::format("duplicate label '{}' (lines {} and {})", name, it->second.line, line));
  }
  symbols_.emplace(std::string(name), SymbolDef{value, line});
}

void Assembler::emit_word(std::uint32_t w) {
  auto& b = sections_.back().bytes;
  const auto n = b.size();
  b.resize(n + 4);
  store_be(std::span<std::uint8_t>(b.data() + n, 4), w);
}

std::uint32_t Assembler::size_of(const Statement& st) {
  if (st.op == ".word") return static_cast<std::uint32_t>(4 * st.args.size());
  if (st.op == ".byte") return static_cast<std::uint32_t>(st.args.size());
  if (st.op == ".space") {
    const auto v = must_eval(st.args.at(0), st.line).v;
    if (v < 0 || v > 0x10000000) throw AsmError(st.line, ".space size out of range");
    return static_cast<std::uint32_t>(v);
  }
  if (st.op == "LI") return 8;
  return 4;
}

void Assembler::emit_instruction(const Statement& st) {
  const int line = st.line;
  auto want = [&](std::size_t n) {
    if (st.args.size() != n) {
      throw AsmError(line, fmt::format("{} takes {} operand(s), got {}", st.op, n, st.args.size()));
    }
  };
  if (st.op == "NOP") {
    want(0);
    emit_word(isa::encode(isa::make(Mnemonic::ADD)));
    return;
  }
  if (st.op == "LI") {
    want(2);
    const auto rd = reg(st.args[0], line);
    const auto v = must_eval(st.args[1], line).v;
    if (v < INT32_MIN || v > static_cast<std::int64_t>(UINT32_MAX)) throw AsmError(line, "LI value out of 32-bit range");
    const auto u = static_cast<std::uint32_t>(v);
    emit_word(isa::encode(isa::make(Mnemonic::IMM, 0, 0, 0, static_cast<std::int16_t>(u >> 16))));
    emit_word(isa::encode(isa::make(Mnemonic::ADDI, rd, 0, 0, static_cast<std::int16_t>(u & 0xFFFF))));
    return;
  }
  const auto m = isa::from_name(st.op);
  if (!m) throw AsmError(line, fmt::format("unknown mnemonic '{}'", st.op));

  auto imm = [&](std::string_view s) {
    const auto v = must_eval(s, line).v;
    if (v < -32768 || v > 65535) throw AsmError(line, fmt::format("immediate {} out of 16-bit range", v));
    return static_cast<std::int32_t>(static_cast<std::int16_t>(static_cast<std::uint16_t>(v)));
  };
  auto target = [&](std::string_view s) {
    const auto val = must_eval(s, line);
    const std::int64_t off = val.symbolic ? val.v - static_cast<std::int64_t>(st.address) : val.v;
    if (off < -32768 || off > 32767) {
      throw AsmError(line, fmt::format("branch target '{}' out of range (offset {})", text::trim(s), off));
    }
    return static_cast<std::int32_t>(off);
  };

  isa::Instruction in;
  switch (isa::info(*m).operands) {
    case Operands::rd_ra_rb:
      want(3);
      in = isa::make(*m, reg(st.args[0], line), reg(st.args[1], line), reg(st.args[2], line));
      break;
    case Operands::rd_ra:
      want(2);
      in = isa::make(*m, reg(st.args[0], line), reg(st.args[1], line));
      break;
    case Operands::rd_ra_imm:
      want(3);
      in = isa::make(*m, reg(st.args[0], line), reg(st.args[1], line), 0, imm(st.args[2]));
      break;
    case Operands::imm:
      want(1);
      in = isa::make(*m, 0, 0, 0, imm(st.args[0]));
      break;
    case Operands::ra_rb:
      want(2);
      in = isa::make(*m, 0, reg(st.args[0], line), reg(st.args[1], line));
      break;
    case Operands::ra_target:
      want(2);
      in = isa::make(*m, 0, reg(st.args[0], line), 0, target(st.args[1]));
      break;
    case Operands::rb:
      want(1);
      in = isa::make(*m, 0, 0, reg(st.args[0], line));
      break;
    case Operands::target:
      want(1);
      in = isa::make(*m, 0, 0, 0, target(st.args[0]));
      break;
    case Operands::rd_target:
      want(2);
      in = isa::make(*m, reg(st.args[0], line), 0, 0, target(st.args[1]));
      break;
    case Operands::ra_imm:
      want(2);
      in = isa::make(*m, 0, reg(st.args[0], line), 0, imm(st.args[1]));
      break;
    case Operands::none:
      want(0);
      in = isa::make(*m);
      break;
  }
  emit_word(isa::encode(in));
}

std::vector<std::string_view> split_args(std::string_view s) {
  std::vector<std::string_view> out;
  s = text::trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(text::trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Image Assembler::run(std::string_view source) {
  std::vector<Statement> statements;
  std::optional<std::pair<std::string_view, int>> entry;

  // Pass 1: addresses.
  pc_ = 0;
  const auto lines = text::split_lines(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i + 1);
    std::string_view l = lines[i];
    if (const auto c = l.find(';'); c != std::string_view::npos) l = l.substr(0, c);
    l = text::trim(l);
    // Labels.
    for (;;) {
      std::size_t j = 0;
      while (j < l.size() && ident_char(l[j])) ++j;
      if (j == 0 || j >= l.size() || l[j] != ':' || !ident_start(l[0])) break;
      define(l.substr(0, j), pc_, ln);
      l = text::trim(l.substr(j + 1));
    }
    if (l.empty()) continue;
    std::size_t k = 0;
    while (k < l.size() && !std::isspace(static_cast<unsigned char>(l[k]))) ++k;
    Statement st{ln, std::string(l.substr(0, k)), split_args(l.substr(k)), pc_};
    for (const auto& a : st.args) {
      if (a.empty()) throw AsmError(ln, "empty operand");
    }
    if (st.op[0] == '.') {
      st.op = text::lower(st.op);
      if (st.op == ".org") {
        if (st.args.size() != 1) throw AsmError(ln, ".org takes one address");
        const auto v = must_eval(st.args[0], ln).v;
        if (v < 0 || v > UINT32_MAX) throw AsmError(ln, ".org address out of range");
        pc_ = static_cast<std::uint32_t>(v);
        st.address = pc_;
        statements.push_back(st);
        continue;
      }
      if (st.op == ".equ") {
        if (st.args.size() != 2) throw AsmError(ln, ".equ takes a name and a value");
        const auto v = must_eval(st.args[1], ln).v;
        define(st.args[0], static_cast<std::uint32_t>(v), ln);
        continue;
      }
      if (st.op == ".entry") {
        if (st.args.size() != 1) throw AsmError(ln, ".entry takes one address");
        entry.emplace(st.args[0], ln);
        continue;
      }
      if (st.op != ".word" && st.op != ".byte" && st.op != ".space") {
        throw AsmError(ln, fmt::format("unknown directive '{}'", st.op));
      }
      if (st.args.empty() || (st.op == ".space" && st.args.size() != 1)) {
        throw AsmError(ln, fmt::format("{} needs operands", st.op));
      }
    } else {
      st.op = text::upper(st.op);
      if (st.op != "LI" && st.op != "NOP" && !isa::from_name(st.op)) {
        throw AsmError(ln, fmt::format("unknown mnemonic '{}'", st.op));
      }
    }
    if (st.op != ".byte" && st.op != ".space" && pc_ % 4 != 0) {
      throw AsmError(ln, fmt::format("misaligned {} at 0x{:08x}", st.op, pc_));
    }
    const std::uint64_t next = std::uint64_t{pc_} + size_of(st);
    if (next > 0x100000000ull) throw AsmError(ln, "code runs past the end of the address space");
    pc_ = static_cast<std::uint32_t>(next);
    statements.push_back(st);
  }

  // Pass 2: bytes.
  sections_.clear();
  sections_.push_back({0, 0, {}});
  for (const auto& st : statements) {
    if (st.op == ".org") {
      sections_.push_back({st.address, st.line, {}});
    } else if (st.op == ".word") {
      for (const auto& a : st.args) {
        const auto v = must_eval(a, st.line).v;
        if (v < INT32_MIN || v > static_cast<std::int64_t>(UINT32_MAX)) throw AsmError(st.line, ".word value out of range");
        emit_word(static_cast<std::uint32_t>(v));
      }
    } else if (st.op == ".byte") {
      for (const auto& a : st.args) {
        const auto v = must_eval(a, st.line).v;
        if (v < -128 || v > 255) throw AsmError(st.line, ".byte value out of range");
        sections_.back().bytes.push_back(static_cast<std::uint8_t>(v));
      }
    } else if (st.op == ".space") {
      auto& b = sections_.back().bytes;
      b.resize(b.size() + size_of(st), 0);
    } else {
      emit_instruction(st);
    }
  }

  std::vector<OpenSection> used;
  for (auto& s : sections_) {
    if (!s.bytes.empty()) used.push_back(std::move(s));
  }
  std::stable_sort(used.begin(), used.end(), [](const auto& a, const auto& b) { return a.base < b.base; });
  Image img;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (i > 0) {
      const auto& prev = used[i - 1];  // bytes already moved into img
      const std::uint64_t prev_end = img.sections.back().end();
      if (prev_end > used[i].base) {
        const int a = std::max(prev.line, used[i].line);
        const int b = std::min(prev.line, used[i].line);
        throw AsmError(a, fmt::format("overlapping .org: region at 0x{:08x} overlaps the one started on line {}",
                                      a == used[i].line ? used[i].base : prev.base, b));
      }
      if (prev_end == used[i].base) {
        auto& last = img.sections.back().bytes;
        last.insert(last.end(), used[i].bytes.begin(), used[i].bytes.end());
        continue;
      }
    }
    img.sections.push_back(Section{used[i].base, std::move(used[i].bytes)});
  }
  for (const auto& [name, def] : symbols_) img.symbols[name] = def.value;
  if (entry) {
    const auto v = must_eval(entry->first, entry->second).v;
    img.entry = static_cast<std::uint32_t>(v);
    const bool inside = std::any_of(img.sections.begin(), img.sections.end(), [&](const Section& s) {
      return img.entry >= s.base && img.entry < s.end();
    });
    if (!inside) throw AsmError(entry->second, fmt::format("entry 0x{:08x} is outside every section", img.entry));
  } else if (!img.sections.empty()) {
    img.entry = img.sections.front().base;
  }
  return img;
}

}  // namespace

Image assemble(std::string_view source) { return Assembler().run(source); }

Image assemble_file(const std::filesystem::path& path) {
  const auto src = text::read_file(path);
  try {
    return assemble(src);
  } catch (const AsmError& e) {
    throw AsmError(e.line(), e.detail(), path.string());
  }
}

std::string disassemble(const Image& img) {
  if (img.sections.empty() && img.symbols.empty()) return {};
  std::multimap<std::uint32_t, std::string> labels;
  std::string out;
  for (const auto& [name, addr] : img.symbols) {
    const bool inside = std::any_of(img.sections.begin(), img.sections.end(), [&](const Section& s) {
      return addr >= s.base && addr <= s.end();
    });
    if (inside) {
      labels.emplace(addr, name);
    } else {
      out += fmt::format(".equ {}, 0x{:08x}\n", name, addr);
    }
  }
  if (!img.sections.empty()) out += fmt::format(".entry 0x{:08x}\n", img.entry);

  auto has_label_in = [&](std::uint32_t lo, std::uint64_t hi) {
    auto it = labels.lower_bound(lo);
    return it != labels.end() && it->first < hi;
  };
  auto put_labels = [&](std::uint32_t addr) {
    auto [a, b] = labels.equal_range(addr);
    for (auto it = a; it != b; ++it) out += it->second + ":\n";
  };

  for (const auto& s : img.sections) {
    out += fmt::format("\n.org 0x{:08x}\n", s.base);
    std::size_t i = 0;
    while (i < s.bytes.size()) {
      const std::uint32_t addr = s.base + static_cast<std::uint32_t>(i);
      put_labels(addr);
      const std::size_t left = s.bytes.size() - i;
      if (addr % 4 != 0 || left < 4 || has_label_in(addr + 1, std::uint64_t{addr} + 4)) {
        out += fmt::format("    .byte 0x{:02x}\n", s.bytes[i]);
        ++i;
        continue;
      }
      // Collapse long zero runs that carry no labels.
      std::size_t z = i;
      while (z < s.bytes.size() && s.bytes[z] == 0) ++z;
      z = i + (z - i) / 4 * 4;
      if (z - i >= 16) {
        std::size_t run = z - i;
        // Stop the run at the next label.
        auto next = labels.upper_bound(addr);
        if (next != labels.end() && next->first < s.base + z) run = (next->first - addr) / 4 * 4;
        if (run >= 16 && !has_label_in(addr + 1, std::uint64_t{addr} + run)) {
          out += fmt::format("    .space {}\n", run);
          i += run;
          continue;
        }
      }
      const auto w = load_be(std::span<const std::uint8_t>(s.bytes.data() + i, 4));
      std::string body;
      try {
        const auto in = isa::decode(w);
        body = isa::canonical_operands(in) ? isa::format(in) : fmt::format(".word 0x{:08x}", w);
      } catch (const isa::IllegalInstruction&) {
        body = fmt::format(".word 0x{:08x}", w);
      }
      out += fmt::format("    {:<28}; {:08x}: {:08x}\n", body, addr, w);
      i += 4;
    }
    const bool next_starts_here = std::any_of(img.sections.begin(), img.sections.end(),
                                              [&](const Section& o) { return o.base == s.end(); });
    if (s.end() <= UINT32_MAX && !next_starts_here) put_labels(static_cast<std::uint32_t>(s.end()));
  }
  return out;
}

}  // namespace mpsoc::assembly
