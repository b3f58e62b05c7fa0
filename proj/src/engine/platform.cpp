#include "engine/platform.hpp"

#include <fmt/format.h>

#include "common/error.hpp"

namespace mpsoc::engine {

Platform::Platform(PlatformConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      bram_region_(cfg_.region("BRAM")),
      sram_region_(cfg_.region("SRAM")),
      sram_(sram_region_.size, cfg_.access_cycles_for("SRAM")),
      timer_(&intc_),
      vga_(&sram_, sram_region_.base) {
  for (unsigned i = 0; i < cfg_.cpu_count; ++i) {
    brams_.push_back(std::make_unique<dev::RamDevice>(bram_region_.size, cfg_.access_cycles_for("BRAM")));
    isa::CpuState s;
    s.cpu_id = i;
    cpus_.push_back(s);
  }
  gpio_.set_access_cycles(cfg_.access_cycles_for("GPIO"));
  intc_.set_access_cycles(cfg_.access_cycles_for("INTC"));
  timer_.set_access_cycles(cfg_.access_cycles_for("TIMER"));
  vga_.set_access_cycles(cfg_.access_cycles_for("VGA"));

  std::vector<bus::MemoryMap::Entry> entries;
  for (const auto& r : cfg_.regions) {
    bus::Target* t = nullptr;
    if (r.name == "SRAM") t = &sram_;
    else if (r.name == "GPIO") t = &gpio_;
    else if (r.name == "INTC") t = &intc_;
    else if (r.name == "TIMER") t = &timer_;
    else if (r.name == "VGA") t = &vga_;
    // BRAM is private to each CPU and reachable only over its local bus.
    entries.push_back({r, t});
  }
  map_ = bus::MemoryMap(std::move(entries));
}

void Platform::load_image(unsigned cpu, const assembly::Image& img) {
  if (cpu >= cpu_count()) throw ConfigError(fmt::format("no CPU {}", cpu));
  const assembly::MemoryView views[] = {
      {"BRAM", bram_region_.base, bram(cpu).bytes()},
      {"SRAM", sram_region_.base, sram_.bytes()},
  };
  assembly::load_image(views, img);
  if (!bram_region_.contains(img.entry) || img.entry % 4 != 0) {
    throw assembly::LoadError(fmt::format("entry point 0x{:08x} is not a BRAM word", img.entry));
  }
  cpus_[cpu].pc = img.entry;
}

std::uint32_t Platform::sram_offset(std::uint32_t address, std::size_t len) const {
  if (!sram_region_.contains(address) || std::uint64_t{address} + len > sram_region_.end()) {
    throw ConfigError(fmt::format("0x{:08x}+{} is outside SRAM", address, len));
  }
  return address - sram_region_.base;
}

std::uint32_t Platform::peek(std::uint32_t address, unsigned width) const {
  return sram_.peek(sram_offset(address, width), width);
}

void Platform::poke(std::uint32_t address, std::uint32_t value, unsigned width) {
  sram_.poke(sram_offset(address, width), value, width);
}

std::vector<std::uint8_t> Platform::read_bytes(std::uint32_t address, std::size_t len) const {
  const auto off = sram_offset(address, len);
  const auto b = sram_.bytes();
  return {b.begin() + off, b.begin() + off + static_cast<std::ptrdiff_t>(len)};
}

}  // namespace mpsoc::engine
