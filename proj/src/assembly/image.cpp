#include "assembly/image.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstring>

#include "common/bytes.hpp"
#include "common/text.hpp"

namespace mpsoc::assembly {

namespace {

const Section* find_section(const std::vector<Section>& sections, std::uint32_t address, std::uint32_t len) {
  for (const auto& s : sections) {
    if (address >= s.base && std::uint64_t{address} + len <= s.end()) return &s;
  }
  return nullptr;
}

std::uint32_t parse_hex(std::string_view tok, int line, const char* what) {
  if (tok.empty() || tok.size() > 8) throw LoadError(fmt::format("image line {}: bad {} '{}'", line, what, tok));
  std::uint32_t v = 0;
  for (char c : tok) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw LoadError(fmt::format("image line {}: bad {} '{}'", line, what, tok));
    v = (v << 4) | static_cast<std::uint32_t>(d);
  }
  return v;
}

}  // namespace

std::optional<std::uint32_t> Image::symbol(const std::string& name) const {
  auto it = symbols.find(name);
  if (it == symbols.end()) return std::nullopt;
  return it->second;
}

void Image::set_word(std::uint32_t address, std::uint32_t value) {
  auto* s = const_cast<Section*>(find_section(sections, address, 4));
  if (s == nullptr) throw LoadError(fmt::format("no section holds word at 0x{:08x}", address));
  store_be(std::span<std::uint8_t>(s->bytes.data() + (address - s->base), 4), value);
}

std::optional<std::uint32_t> Image::word(std::uint32_t address) const {
  const auto* s = find_section(sections, address, 4);
  if (s == nullptr) return std::nullopt;
  return load_be(std::span<const std::uint8_t>(s->bytes.data() + (address - s->base), 4));
}

std::string to_text(const Image& img) {
  std::string out = "MPIMG1\n";
  out += fmt::format("ENTRY {:08x}\n", img.entry);
  for (const auto& s : img.sections) {
    out += fmt::format("SECTION {:08x} {:x}\n", s.base, s.bytes.size());
    for (std::size_t i = 0; i < s.bytes.size(); i += 16) {
      const std::size_t n = std::min<std::size_t>(16, s.bytes.size() - i);
      for (std::size_t j = 0; j < n; ++j) out += fmt::format("{:02x}", s.bytes[i + j]);
      out += '\n';
    }
  }
  for (const auto& [name, addr] : img.symbols) out += fmt::format("SYM {} {:08x}\n", name, addr);
  return out;
}

Image parse_image(const std::string& text) {
  const auto lines = text::split_lines(text);
  if (lines.empty() || text::trim(lines[0]) != "MPIMG1") throw LoadError("not an image file (missing MPIMG1 header)");
  Image img;
  bool have_entry = false;
  Section* open = nullptr;
  std::size_t expected = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i + 1);
    const auto toks = text::split_ws(lines[i]);
    if (toks.empty()) continue;
    if (open != nullptr && open->bytes.size() < expected) {
      if (toks.size() != 1 || toks[0].size() % 2 != 0) throw LoadError(fmt::format("image line {}: bad data line", ln));
      for (std::size_t j = 0; j < toks[0].size(); j += 2) {
        open->bytes.push_back(static_cast<std::uint8_t>(parse_hex(toks[0].substr(j, 2), ln, "byte")));
      }
      if (open->bytes.size() > expected) throw LoadError(fmt::format("image line {}: section longer than declared", ln));
      continue;
    }
    if (toks[0] == "ENTRY" && toks.size() == 2) {
      img.entry = parse_hex(toks[1], ln, "entry");
      have_entry = true;
    } else if (toks[0] == "SECTION" && toks.size() == 3) {
      img.sections.push_back(Section{parse_hex(toks[1], ln, "base"), {}});
      open = &img.sections.back();
      expected = parse_hex(toks[2], ln, "length");
      open->bytes.reserve(expected);
    } else if (toks[0] == "SYM" && toks.size() == 3) {
      img.symbols[std::string(toks[1])] = parse_hex(toks[2], ln, "address");
    } else {
      throw LoadError(fmt::format("image line {}: unexpected '{}'", ln, text::trim(lines[i])));
    }
  }
  if (open != nullptr && open->bytes.size() < expected) throw LoadError("image truncated inside a section");
  std::sort(img.sections.begin(), img.sections.end(), [](const auto& a, const auto& b) { return a.base < b.base; });
  for (std::size_t i = 0; i < img.sections.size(); ++i) {
    if (img.sections[i].end() > 0x100000000ull) throw LoadError("section wraps the address space");
    if (i > 0 && img.sections[i - 1].end() > img.sections[i].base) {
      throw LoadError(fmt::format("sections at 0x{:08x} and 0x{:08x} overlap", img.sections[i - 1].base,
                                  img.sections[i].base));
    }
  }
  if (!have_entry && !img.sections.empty()) img.entry = img.sections.front().base;
  return img;
}

Image read_image(const std::filesystem::path& path) {
  try {
    return parse_image(text::read_file(path));
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void write_image(const std::filesystem::path& path, const Image& img) { text::write_file(path, to_text(img)); }

void load_image(std::span<const MemoryView> memories, const Image& img) {
  std::vector<std::pair<const Section*, const MemoryView*>> plan;
  for (const auto& s : img.sections) {
    const MemoryView* target = nullptr;
    for (const auto& m : memories) {
      if (s.base >= m.base && s.end() <= std::uint64_t{m.base} + m.bytes.size()) {
        target = &m;
        break;
      }
    }
    if (target == nullptr) {
      throw LoadError(fmt::format("section 0x{:08x}+0x{:x} does not fit any target memory", s.base, s.bytes.size()));
    }
    plan.emplace_back(&s, target);
  }
  for (const auto& [s, m] : plan) {
    if (!s->bytes.empty()) std::memcpy(m->bytes.data() + (s->base - m->base), s->bytes.data(), s->bytes.size());
  }
}

}  // namespace mpsoc::assembly
