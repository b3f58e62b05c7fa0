#include "bus/transaction.hpp"

#include <fmt/format.h>

namespace mpsoc::bus {

const char* to_string(Kind k) { return k == Kind::read ? "read" : "write"; }

const char* to_string(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::bus_error: return "bus_error";
    case Status::timeout: return "timeout";
  }
  return "?";
}

bool well_formed(const Transaction& t) {
  if (t.width != 1 && t.width != 2 && t.width != 4) return false;
  return static_cast<std::uint64_t>(t.address) + t.width <= 0x1'0000'0000ull;
}

std::string describe(const Transaction& t) {
  return fmt::format("master {} {} {}B @0x{:08x} = 0x{:x} [{}]", t.master_id, to_string(t.kind), t.width,
                     t.address, t.value(), to_string(t.status));
}

}  // namespace mpsoc::bus
