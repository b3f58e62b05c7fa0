#pragma once

// Small fixtures shared by the unit suites.

#include <cstdint>
#include <map>
#include <vector>

#include "bus/transaction.hpp"
#include "isa/cpu.hpp"

namespace test_support {

/// Sparse byte-addressed memory serving both instruction and data side.
/// Addresses listed in `faulting` answer with bus_error.
struct SparseMemory : mpsoc::isa::FetchPort, mpsoc::isa::DataPort {
  std::map<std::uint32_t, std::uint8_t> bytes;
  std::vector<mpsoc::bus::Transaction> log;
  std::vector<std::uint32_t> faulting;
  std::uint32_t fetch_limit = 0xFFFFFFFF;

  void put_word(std::uint32_t a, std::uint32_t w) {
    for (int i = 0; i < 4; ++i) bytes[a + i] = static_cast<std::uint8_t>(w >> (24 - 8 * i));
  }
  std::uint32_t word(std::uint32_t a) const {
    std::uint32_t w = 0;
    for (int i = 0; i < 4; ++i) w = (w << 8) | byte(a + i);
    return w;
  }
  std::uint8_t byte(std::uint32_t a) const {
    auto it = bytes.find(a);
    return it == bytes.end() ? 0 : it->second;
  }

  std::optional<std::uint32_t> fetch_word(std::uint32_t a) override {
    if (a >= fetch_limit) return std::nullopt;
    return word(a);
  }
  void access(mpsoc::bus::Transaction& t) override {
    for (auto f : faulting) {
      if (f == t.address) {
        t.status = mpsoc::bus::Status::bus_error;
        log.push_back(t);
        return;
      }
    }
    for (unsigned i = 0; i < t.width; ++i) {
      if (t.kind == mpsoc::bus::Kind::read) {
        t.payload[i] = byte(t.address + i);
      } else {
        bytes[t.address + i] = t.payload[i];
      }
    }
    t.status = mpsoc::bus::Status::ok;
    log.push_back(t);
  }
};

}  // namespace test_support
