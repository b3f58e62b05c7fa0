#pragma once

#include <cstdint>
#include <span>

namespace mpsoc {

// Guest memory is big-endian throughout.

inline std::uint32_t load_be(std::span<const std::uint8_t> bytes) noexcept {
  std::uint32_t v = 0;
  for (auto b : bytes) v = (v << 8) | b;
  return v;
}

inline void store_be(std::span<std::uint8_t> bytes, std::uint32_t value) noexcept {
  for (std::size_t i = bytes.size(); i-- > 0;) {
    bytes[i] = static_cast<std::uint8_t>(value & 0xFF);
    value >>= 8;
  }
}

}  // namespace mpsoc
