#pragma once

// Two-pass assembler for the ISA subset.
//
// Grammar, one statement per line, `;` starts a comment:
//   label:                     any number of labels before a statement
//   MNEMONIC operands          registers r0..r31, immediates decimal or 0x hex
//   LI rd, value               IMM + ADDI pair, always two words
//   NOP                        ADD r0, r0, r0
//   .org addr                  start a new section
//   .word v, ...  .byte v, ...  .space n
//   .equ name, value
//   .entry addr
//
// Values are sums and differences of literals and symbols. For branch
// targets a value that names a symbol is an address and becomes a
// pc-relative offset; a plain literal is the offset itself.

#include <string>
#include <string_view>

#include "assembly/image.hpp"
#include "common/error.hpp"

namespace mpsoc::assembly {

class AsmError : public ConfigError {
 public:
  AsmError(int line, const std::string& msg, const std::string& file = {});
  int line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  int line_;
  std::string detail_;
};

Image assemble(std::string_view source);
Image assemble_file(const std::filesystem::path& path);

/// Reassemblable listing: labels at symbol addresses, one instruction per
/// word, `.word` for anything that does not decode to a canonical form.
std::string disassemble(const Image& img);

}  // namespace mpsoc::assembly
