#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "common/bytes.hpp"
#include "sim/kernel.hpp"

namespace mpsoc::bus {

enum class Kind : std::uint8_t { read, write };
enum class Status : std::uint8_t { ok, bus_error, timeout };

const char* to_string(Kind k);
const char* to_string(Status s);

/// One bus access. Payload bytes are big-endian; only the first `width`
/// bytes are meaningful.
struct Transaction {
  unsigned master_id = 0;
  Kind kind = Kind::read;
  std::uint32_t address = 0;
  std::uint8_t width = 4;
  std::array<std::uint8_t, 4> payload{};
  Status status = Status::ok;
  sim::SimTime annotated_delay = 0;

  static Transaction read(unsigned master, std::uint32_t address, std::uint8_t width) {
    Transaction t;
    t.master_id = master;
    t.kind = Kind::read;
    t.address = address;
    t.width = width;
    return t;
  }

  static Transaction write(unsigned master, std::uint32_t address, std::uint8_t width, std::uint32_t value) {
    Transaction t;
    t.master_id = master;
    t.kind = Kind::write;
    t.address = address;
    t.width = width;
    t.set_value(value);
    return t;
  }

  std::span<std::uint8_t> data() { return {payload.data(), width}; }
  std::span<const std::uint8_t> data() const { return {payload.data(), width}; }
  std::uint32_t value() const { return load_be(data()); }
  void set_value(std::uint32_t v) { store_be(data(), v); }

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

/// Width is 1, 2 or 4 and the access does not wrap the address space.
bool well_formed(const Transaction& t);

std::string describe(const Transaction& t);

}  // namespace mpsoc::bus
