#pragma once

// In-memory program image plus its text file format:
//
//   MPIMG1
//   ENTRY <hex>
//   SECTION <hex-base> <hex-len>
//   <up to 16 hex bytes per line>
//   SYM <name> <hex-addr>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace mpsoc::assembly {

struct Section {
  std::uint32_t base = 0;
  std::vector<std::uint8_t> bytes;

  std::uint64_t end() const { return std::uint64_t{base} + bytes.size(); }
  friend bool operator==(const Section&, const Section&) = default;
};

struct Image {
  std::vector<Section> sections;  // sorted by base, non-overlapping
  std::uint32_t entry = 0;
  std::map<std::string, std::uint32_t> symbols;

  bool empty() const { return sections.empty(); }
  std::optional<std::uint32_t> symbol(const std::string& name) const;
  /// Overwrites the big-endian word at `address`; it must lie inside a section.
  void set_word(std::uint32_t address, std::uint32_t value);
  std::optional<std::uint32_t> word(std::uint32_t address) const;

  friend bool operator==(const Image&, const Image&) = default;
};

/// Image file or placement problem.
class LoadError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

std::string to_text(const Image& img);
Image parse_image(const std::string& text);
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

/// A writable target memory for load_image.
struct MemoryView {
  std::string name;
  std::uint32_t base = 0;
  std::span<std::uint8_t> bytes;
};

/// Copies every section into the view that contains it. Checks all sections
/// first, so nothing is written when one does not fit.
void load_image(std::span<const MemoryView> memories, const Image& img);

}  // namespace mpsoc::assembly
