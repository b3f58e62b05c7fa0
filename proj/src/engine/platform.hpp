#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "assembly/image.hpp"
#include "bus/memory_map.hpp"
#include "dev/devices.hpp"
#include "engine/config.hpp"
#include "isa/cpu.hpp"

namespace mpsoc::engine {

/// One instance of the reference platform: N CPUs with private BRAM on
/// their local bus, and SRAM, GPIO, INTC, TIMER, VGA on the shared bus.
/// A platform is consumed by a single engine run.
class Platform {
 public:
  explicit Platform(PlatformConfig cfg);
  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  const PlatformConfig& config() const { return cfg_; }
  unsigned cpu_count() const { return cfg_.cpu_count; }

  dev::RamDevice& bram(unsigned cpu) { return *brams_.at(cpu); }
  const dev::RamDevice& bram(unsigned cpu) const { return *brams_.at(cpu); }
  dev::RamDevice& sram() { return sram_; }
  const dev::RamDevice& sram() const { return sram_; }
  dev::GpioDevice& gpio() { return gpio_; }
  dev::IntcDevice& intc() { return intc_; }
  dev::TimerDevice& timer() { return timer_; }
  dev::VgaDevice& vga() { return vga_; }
  const dev::VgaDevice& vga() const { return vga_; }
  const bus::MemoryMap& map() const { return map_; }
  const bus::RegionSpec& bram_region() const { return bram_region_; }
  const bus::RegionSpec& sram_region() const { return sram_region_; }

  isa::CpuState& cpu(unsigned i) { return cpus_.at(i); }
  const isa::CpuState& cpu(unsigned i) const { return cpus_.at(i); }

  /// BRAM sections go to this CPU's BRAM, SRAM sections to the shared SRAM;
  /// the CPU starts at the image entry point.
  void load_image(unsigned cpu, const assembly::Image& img);

  /// Untimed access to SRAM by guest address (setup and result checks).
  std::uint32_t peek(std::uint32_t address, unsigned width = 4) const;
  void poke(std::uint32_t address, std::uint32_t value, unsigned width = 4);
  std::vector<std::uint8_t> read_bytes(std::uint32_t address, std::size_t len) const;

  bool consumed() const { return consumed_; }
  void mark_consumed() { consumed_ = true; }

 private:
  std::uint32_t sram_offset(std::uint32_t address, std::size_t len) const;

  PlatformConfig cfg_;
  bus::RegionSpec bram_region_;
  bus::RegionSpec sram_region_;
  std::vector<std::unique_ptr<dev::RamDevice>> brams_;
  dev::RamDevice sram_;
  dev::GpioDevice gpio_;
  dev::IntcDevice intc_;
  dev::TimerDevice timer_;
  dev::VgaDevice vga_;
  bus::MemoryMap map_;
  std::vector<isa::CpuState> cpus_;
  bool consumed_ = false;
};

}  // namespace mpsoc::engine
