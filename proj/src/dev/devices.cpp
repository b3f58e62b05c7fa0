#include "dev/devices.hpp"

#include <fmt/format.h>

#include <stdexcept>

#include "common/bytes.hpp"
#include "common/error.hpp"
#include "common/text.hpp"

namespace mpsoc::dev {

using bus::Kind;
using bus::Status;

namespace {

/// Register files accept aligned word accesses only.
bool register_access_ok(const bus::Transaction& txn, std::uint32_t offset) {
  return txn.width == 4 && offset % 4 == 0;
}

}  // namespace

// ---------------------------------------------------------------------------

RamDevice::RamDevice(std::size_t size, unsigned access_cycles) : bytes_(size, 0) {
  set_access_cycles(access_cycles);
}

void RamDevice::access(bus::Transaction& txn, std::uint32_t offset) {
  if (std::uint64_t{offset} + txn.width > bytes_.size()) {
    txn.status = Status::bus_error;
    return;
  }
  auto* p = bytes_.data() + offset;
  if (txn.kind == Kind::read) {
    for (unsigned i = 0; i < txn.width; ++i) txn.payload[i] = p[i];
  } else {
    for (unsigned i = 0; i < txn.width; ++i) p[i] = txn.payload[i];
  }
  txn.status = Status::ok;
}

std::uint32_t RamDevice::peek(std::uint32_t offset, unsigned width) const {
  if (std::uint64_t{offset} + width > bytes_.size()) throw std::out_of_range("RAM peek out of range");
  return load_be(std::span<const std::uint8_t>(bytes_.data() + offset, width));
}

void RamDevice::poke(std::uint32_t offset, std::uint32_t value, unsigned width) {
  if (std::uint64_t{offset} + width > bytes_.size()) throw std::out_of_range("RAM poke out of range");
  store_be(std::span<std::uint8_t>(bytes_.data() + offset, width), value);
}

// ---------------------------------------------------------------------------

void GpioDevice::access(bus::Transaction& txn, std::uint32_t offset) {
  if (!register_access_ok(txn, offset) || offset != 0) {
    txn.status = Status::bus_error;
    return;
  }
  if (txn.kind == Kind::read) {
    txn.set_value(data_);
  } else {
    data_ = txn.value();
  }
  txn.status = Status::ok;
}

// ---------------------------------------------------------------------------

void IntcDevice::access(bus::Transaction& txn, std::uint32_t offset) {
  txn.status = Status::bus_error;
  if (!register_access_ok(txn, offset)) return;
  const bool rd = txn.kind == Kind::read;
  switch (offset) {
    case kStatus:
      if (!rd) return;
      txn.set_value(pending_);
      break;
    case kMask:
      if (rd) {
        txn.set_value(mask_);
      } else {
        mask_ = txn.value();
      }
      break;
    case kAck:
      if (rd) return;
      ack(txn.value());
      break;
    default:
      return;
  }
  txn.status = Status::ok;
}

// ---------------------------------------------------------------------------

bool TimerDevice::tick(std::uint64_t cycles) {
  if (!running()) return irq_line();
  while (cycles > 0 && running()) {
    if (cycles < counter_) {
      counter_ -= static_cast<std::uint32_t>(cycles);
      break;
    }
    cycles -= counter_;
    counter_ = 0;
    const bool was = irq_line();
    expired_ = true;
    ++expirations_;
    if (!was && irq_line() && intc_ != nullptr) intc_->raise(IntcDevice::kTimerBit);
    if ((ctrl_ & kAutoReload) != 0) {
      counter_ = load_;
    } else {
      ctrl_ &= ~kEnable;
    }
  }
  return irq_line();
}

void TimerDevice::write_load(std::uint32_t v) {
  sync();
  load_ = v;
  counter_ = v;
  changed();
}

void TimerDevice::write_ctrl(std::uint32_t v) {
  sync();
  const bool was_enabled = (ctrl_ & kEnable) != 0;
  const bool was_irq = irq_line();
  ctrl_ = v & (kEnable | kIrqEnable | kAutoReload);
  if (!was_enabled && (ctrl_ & kEnable) != 0 && counter_ == 0) counter_ = load_;
  if (!was_irq && irq_line() && intc_ != nullptr) intc_->raise(IntcDevice::kTimerBit);
  changed();
}

void TimerDevice::clear_status(std::uint32_t bits) {
  sync();
  if ((bits & 1u) != 0) expired_ = false;
}

void TimerDevice::access(bus::Transaction& txn, std::uint32_t offset) {
  txn.status = Status::bus_error;
  if (!register_access_ok(txn, offset)) return;
  const bool rd = txn.kind == Kind::read;
  switch (offset) {
    case kLoad:
      if (rd) {
        txn.set_value(load_);
      } else {
        write_load(txn.value());
      }
      break;
    case kCtrl:
      if (rd) {
        txn.set_value(ctrl_);
      } else {
        write_ctrl(txn.value());
      }
      break;
    case kStatus:
      if (rd) {
        sync();
        txn.set_value(expired_ ? 1u : 0u);
      } else {
        clear_status(txn.value());
      }
      break;
    default:
      return;
  }
  txn.status = Status::ok;
}

void TimerDevice::sync() {
  if (kernel_ == nullptr) return;
  const std::uint64_t now_cycle = kernel_->now() / period_;
  if (now_cycle > synced_cycle_) {
    tick(now_cycle - synced_cycle_);
    synced_cycle_ = now_cycle;
  }
}

void TimerDevice::changed() {
  if (kernel_ != nullptr && process_) kernel_->wake(*process_);
}

void TimerDevice::attach(sim::Kernel& kernel, sim::SimTime clock_period_ns) {
  kernel_ = &kernel;
  period_ = clock_period_ns;
  synced_cycle_ = kernel.now() / period_;
  process_ = kernel.register_process("timer", [this] {
    kernel_->set_region(sim::Region::device);
    for (;;) {
      sync();
      if (!running()) {
        kernel_->block();
        continue;
      }
      // Sleep until the next expiry; a register write wakes us early.
      const sim::SimTime due = (synced_cycle_ + counter_) * period_;
      kernel_->wait(due - kernel_->now());
    }
  });
}

// ---------------------------------------------------------------------------

void VgaDevice::access(bus::Transaction& txn, std::uint32_t offset) {
  txn.status = Status::bus_error;
  if (!register_access_ok(txn, offset)) return;
  const bool rd = txn.kind == Kind::read;
  switch (offset) {
    case kFbBase:
      if (rd) {
        txn.set_value(fb_base_);
      } else {
        fb_base_ = txn.value();
      }
      break;
    case kCtrl:
      if (rd) {
        txn.set_value(ctrl_);
      } else {
        ctrl_ = txn.value() & 1u;
      }
      break;
    default:
      return;
  }
  txn.status = Status::ok;
}

std::vector<std::uint8_t> VgaDevice::frame() const {
  if (sram_ == nullptr) throw ConfigError("VGA has no framebuffer memory");
  const std::uint64_t start = std::uint64_t{fb_base_} - sram_base_;
  if (fb_base_ < sram_base_ || start + kFrameBytes > sram_->size()) {
    throw ConfigError(fmt::format("framebuffer at 0x{:08x} does not fit in SRAM", fb_base_));
  }
  const auto b = sram_->bytes();
  return {b.begin() + static_cast<std::ptrdiff_t>(start), b.begin() + static_cast<std::ptrdiff_t>(start + kFrameBytes)};
}

std::string encode_pgm(unsigned width, unsigned height, std::span<const std::uint8_t> raster) {
  std::string out = fmt::format("P5 {} {} 255\n", width, height);
  out.append(reinterpret_cast<const char*>(raster.data()), raster.size());
  return out;
}

std::string VgaDevice::pgm() const {
  const auto f = frame();
  return encode_pgm(kWidth, kHeight, f);
}

std::filesystem::path VgaDevice::dump(const std::filesystem::path& dir, sim::SimTime sim_ns) const {
  const auto path = dir / fmt::format("frame_{}.pgm", sim_ns);
  text::write_file(path, pgm());
  ++dumps_;
  return path;
}

}  // namespace mpsoc::dev
