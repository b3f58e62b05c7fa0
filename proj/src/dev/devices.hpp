#pragma once

// Passive slaves of the platform. All register accesses run in the
// initiator's process; only the timer owns a process (its expiry source).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bus/target.hpp"
#include "sim/kernel.hpp"

namespace mpsoc::dev {

class RamDevice : public bus::Target {
 public:
  explicit RamDevice(std::size_t size, unsigned access_cycles = 1);

  void access(bus::Transaction& txn, std::uint32_t offset) override;

  std::size_t size() const { return bytes_.size(); }
  std::span<std::uint8_t> bytes() { return bytes_; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }

  /// Untimed host-side access (loader, oracles, tests). Throws
  /// std::out_of_range past the end.
  std::uint32_t peek(std::uint32_t offset, unsigned width = 4) const;
  void poke(std::uint32_t offset, std::uint32_t value, unsigned width = 4);

 private:
  std::vector<std::uint8_t> bytes_;
};

class GpioDevice : public bus::Target {
 public:
  void access(bus::Transaction& txn, std::uint32_t offset) override;
  std::uint32_t data() const { return data_; }

 private:
  std::uint32_t data_ = 0;
};

/// pending bit0 = timer, bit1 = gpio. Every CPU line is (pending & mask) != 0.
class IntcDevice : public bus::Target {
 public:
  static constexpr std::uint32_t kStatus = 0x0;
  static constexpr std::uint32_t kMask = 0x4;
  static constexpr std::uint32_t kAck = 0x8;
  static constexpr unsigned kTimerBit = 0;
  static constexpr unsigned kGpioBit = 1;

  void access(bus::Transaction& txn, std::uint32_t offset) override;

  void raise(unsigned bit) { pending_ |= 1u << bit; }
  bool line(unsigned /*cpu*/) const { return (pending_ & mask_) != 0; }
  std::uint32_t pending() const { return pending_; }
  std::uint32_t mask() const { return mask_; }
  void set_mask(std::uint32_t m) { mask_ = m; }
  void ack(std::uint32_t bits) { pending_ &= ~bits; }

 private:
  std::uint32_t pending_ = 0;
  std::uint32_t mask_ = 0;
};

/// Down-counter in bus cycles. Registers: 0x0 load, 0x4 ctrl
/// (bit0 enable, bit1 irq_enable, bit2 auto_reload), 0x8 status
/// (bit0 expired, write 1 to clear).
class TimerDevice : public bus::Target {
 public:
  static constexpr std::uint32_t kLoad = 0x0;
  static constexpr std::uint32_t kCtrl = 0x4;
  static constexpr std::uint32_t kStatus = 0x8;
  static constexpr std::uint32_t kEnable = 1u << 0;
  static constexpr std::uint32_t kIrqEnable = 1u << 1;
  static constexpr std::uint32_t kAutoReload = 1u << 2;

  explicit TimerDevice(IntcDevice* intc = nullptr) : intc_(intc) {}

  void access(bus::Transaction& txn, std::uint32_t offset) override;

  /// Advances the counter; returns the irq line afterwards.
  bool tick(std::uint64_t cycles);
  bool irq_line() const { return expired_ && (ctrl_ & kIrqEnable) != 0; }

  void write_load(std::uint32_t v);
  void write_ctrl(std::uint32_t v);
  void clear_status(std::uint32_t bits);

  std::uint32_t load() const { return load_; }
  std::uint32_t ctrl() const { return ctrl_; }
  std::uint32_t counter() const { return counter_; }
  bool expired() const { return expired_; }
  std::uint64_t expirations() const { return expirations_; }
  bool running() const { return (ctrl_ & kEnable) != 0 && load_ > 0; }

  /// Binds the timer to simulated time: registers its expiry process and
  /// keeps the counter in step with kernel time.
  void attach(sim::Kernel& kernel, sim::SimTime clock_period_ns);

 private:
  void sync();
  void changed();

  IntcDevice* intc_;
  std::uint32_t load_ = 0;
  std::uint32_t ctrl_ = 0;
  std::uint32_t counter_ = 0;
  bool expired_ = false;
  std::uint64_t expirations_ = 0;

  sim::Kernel* kernel_ = nullptr;
  sim::SimTime period_ = 1;
  std::uint64_t synced_cycle_ = 0;
  std::optional<sim::ProcessHandle> process_;
};

/// 640x480 8-bit grayscale scanout of a framebuffer held in SRAM.
/// Registers: 0x0 fb_base (guest address), 0x4 ctrl (bit0 enable).
class VgaDevice : public bus::Target {
 public:
  static constexpr unsigned kWidth = 640;
  static constexpr unsigned kHeight = 480;
  static constexpr std::size_t kFrameBytes = std::size_t{kWidth} * kHeight;
  static constexpr std::uint32_t kFbBase = 0x0;
  static constexpr std::uint32_t kCtrl = 0x4;

  VgaDevice(const RamDevice* sram, std::uint32_t sram_base) : sram_(sram), sram_base_(sram_base) {}

  void access(bus::Transaction& txn, std::uint32_t offset) override;

  std::uint32_t fb_base() const { return fb_base_; }
  bool enabled() const { return (ctrl_ & 1u) != 0; }
  void set_fb_base(std::uint32_t a) { fb_base_ = a; }
  void set_ctrl(std::uint32_t c) { ctrl_ = c; }

  /// Raster bytes. Throws ConfigError when the frame is not inside SRAM.
  std::vector<std::uint8_t> frame() const;
  /// Complete P5 file contents.
  std::string pgm() const;
  /// Writes `dir/frame_<sim_ns>.pgm`; returns the path.
  std::filesystem::path dump(const std::filesystem::path& dir, sim::SimTime sim_ns) const;
  std::size_t dumps() const { return dumps_; }

 private:
  const RamDevice* sram_;
  std::uint32_t sram_base_;
  std::uint32_t fb_base_ = 0;
  std::uint32_t ctrl_ = 0;
  mutable std::size_t dumps_ = 0;
};

/// P5 header plus raster; shared with tests that render expected frames.
std::string encode_pgm(unsigned width, unsigned height, std::span<const std::uint8_t> raster);

}  // namespace mpsoc::dev
