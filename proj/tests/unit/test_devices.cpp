#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "common/error.hpp"
#include "dev/devices.hpp"
#include "sim/kernel.hpp"

using namespace mpsoc;
using namespace mpsoc::dev;
using bus::Status;
using bus::Transaction;

namespace {

Transaction rd(std::uint32_t off, std::uint8_t w = 4) { return Transaction::read(0, off, w); }
Transaction wr(std::uint32_t off, std::uint32_t v, std::uint8_t w = 4) { return Transaction::write(0, off, w, v); }

template <class Dev>
Transaction run(Dev& d, Transaction t) {
  d.access(t, t.address);
  return t;
}

constexpr std::uint32_t kSramBase = 0x20100000;

}  // namespace

TEST(Ram, BigEndianAndZeroInit) {
  RamDevice ram(0x1000);
  EXPECT_EQ(run(ram, wr(0, 0x01020304)).status, Status::ok);
  EXPECT_EQ(run(ram, rd(0, 1)).value(), 0x01u);
  EXPECT_EQ(run(ram, rd(3, 1)).value(), 0x04u);
  EXPECT_EQ(run(ram, rd(0x100)).value(), 0u);
  EXPECT_EQ(run(ram, wr(0x1000 - 1, 5)).status, Status::bus_error);
  EXPECT_EQ(ram.peek(0), 0x01020304u);
  ram.poke(8, 0xAB, 1);
  EXPECT_EQ(ram.peek(8, 1), 0xABu);
  EXPECT_THROW(ram.peek(0x1000), std::out_of_range);
}

TEST(Ram, ReadYourWrites) {
  RamDevice ram(64);
  std::mt19937 rng(1);
  for (int i = 0; i < 5000; ++i) {
    const std::uint8_t widths[] = {1, 2, 4};
    const auto w = widths[rng() % 3];
    const std::uint32_t off = rng() % (64 - w + 1);
    const std::uint32_t v = w == 4 ? rng() : rng() & ((1u << (8 * w)) - 1);
    ASSERT_EQ(run(ram, wr(off, v, w)).status, Status::ok);
    ASSERT_EQ(run(ram, rd(off, w)).value(), v);
  }
}

TEST(Gpio, DataRegister) {
  GpioDevice g;
  EXPECT_EQ(run(g, wr(0, 0x5A)).status, Status::ok);
  EXPECT_EQ(run(g, rd(0)).value(), 0x5Au);
  EXPECT_EQ(run(g, rd(4)).status, Status::bus_error);
  EXPECT_EQ(run(g, rd(0, 1)).status, Status::bus_error);
}

TEST(Intc, StatusMaskAck) {
  IntcDevice intc;
  intc.raise(IntcDevice::kTimerBit);
  EXPECT_EQ(run(intc, wr(IntcDevice::kMask, 1)).status, Status::ok);
  EXPECT_EQ(run(intc, rd(IntcDevice::kStatus)).value(), 1u);
  EXPECT_TRUE(intc.line(0));
  EXPECT_EQ(run(intc, wr(IntcDevice::kAck, 1)).status, Status::ok);
  EXPECT_EQ(intc.pending(), 0u);
  EXPECT_FALSE(intc.line(0));
  intc.raise(IntcDevice::kTimerBit);
  intc.set_mask(0);
  EXPECT_FALSE(intc.line(0));
  EXPECT_EQ(run(intc, rd(0xC)).status, Status::bus_error);
  EXPECT_EQ(run(intc, wr(IntcDevice::kStatus, 1)).status, Status::bus_error);
  EXPECT_EQ(run(intc, rd(IntcDevice::kAck)).status, Status::bus_error);
}

TEST(Intc, LineIsPureFunctionOfPendingAndMask) {
  std::mt19937 rng(8);
  for (int i = 0; i < 2000; ++i) {
    IntcDevice intc;
    const std::uint32_t pending = rng() & 3;
    const std::uint32_t mask = rng();
    for (unsigned b = 0; b < 2; ++b)
      if (pending & (1u << b)) intc.raise(b);
    intc.set_mask(mask);
    ASSERT_EQ(intc.line(0), (pending & mask) != 0);
    ASSERT_EQ(intc.line(1), intc.line(0));
  }
}

TEST(Timer, ExpiresAfterLoadCycles) {
  IntcDevice intc;
  intc.set_mask(1);
  TimerDevice t(&intc);
  t.write_load(100);
  t.write_ctrl(TimerDevice::kEnable | TimerDevice::kIrqEnable);
  EXPECT_FALSE(t.tick(99));
  EXPECT_TRUE(t.tick(1));
  EXPECT_TRUE(intc.line(0));
  EXPECT_FALSE(t.running());  // one-shot disables itself
}

TEST(Timer, AutoReload) {
  TimerDevice t;
  t.write_load(100);
  t.write_ctrl(TimerDevice::kEnable | TimerDevice::kAutoReload);
  t.tick(250);
  EXPECT_EQ(t.expirations(), 2u);
  EXPECT_EQ(t.counter(), 50u);
  EXPECT_FALSE(t.irq_line());  // irq_enable clear
  EXPECT_TRUE(t.expired());
  t.clear_status(1);
  EXPECT_FALSE(t.expired());
}

TEST(Timer, DisabledCounterIsFrozen) {
  TimerDevice t;
  t.write_load(100);
  t.tick(50);
  EXPECT_EQ(t.counter(), 100u);
  EXPECT_EQ(t.expirations(), 0u);
}

TEST(Timer, RegistersOverBus) {
  TimerDevice t;
  EXPECT_EQ(run(t, wr(TimerDevice::kLoad, 10)).status, Status::ok);
  EXPECT_EQ(run(t, wr(TimerDevice::kCtrl, 7)).status, Status::ok);
  EXPECT_EQ(run(t, rd(TimerDevice::kLoad)).value(), 10u);
  EXPECT_EQ(run(t, rd(TimerDevice::kCtrl)).value(), 7u);
  t.tick(10);
  EXPECT_EQ(run(t, rd(TimerDevice::kStatus)).value(), 1u);
  run(t, wr(TimerDevice::kStatus, 1));
  EXPECT_EQ(run(t, rd(TimerDevice::kStatus)).value(), 0u);
  EXPECT_EQ(run(t, rd(0xC)).status, Status::bus_error);
}

TEST(Timer, CounterNeverExceedsLoadWithAutoReload) {
  std::mt19937 rng(4);
  TimerDevice t;
  t.write_load(37);
  t.write_ctrl(TimerDevice::kEnable | TimerDevice::kAutoReload);
  std::uint64_t total = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = rng() % 100;
    t.tick(c);
    total += c;
    ASSERT_LE(t.counter(), t.load());
    ASSERT_GE(t.counter(), 1u);
  }
  EXPECT_EQ(t.expirations(), total / 37);
}

TEST(Timer, AttachedTimerRaisesAtSimulatedExpiry) {
  sim::Kernel k;
  IntcDevice intc;
  intc.set_mask(1);
  TimerDevice t(&intc);
  t.attach(k, 10);
  sim::SimTime raised_at = 0;
  k.register_process("watch", [&] {
    t.write_load(50);
    t.write_ctrl(TimerDevice::kEnable | TimerDevice::kIrqEnable);
    while (!intc.line(0)) k.wait(10);
    raised_at = k.now();
    k.request_stop();
  });
  k.run();
  EXPECT_EQ(raised_at, 500u);
}

TEST(Vga, BlankAndSinglePixelFrames) {
  RamDevice sram(0x100000);
  VgaDevice vga(&sram, kSramBase);
  vga.set_fb_base(kSramBase + 0x10000);
  const auto blank = vga.frame();
  EXPECT_EQ(blank.size(), 640u * 480u);
  EXPECT_TRUE(std::all_of(blank.begin(), blank.end(), [](auto b) { return b == 0; }));
  sram.poke(0x10000, 255, 1);
  const auto pgm = vga.pgm();
  const std::string header = "P5 640 480 255\n";
  ASSERT_EQ(pgm.size(), header.size() + 640 * 480);
  EXPECT_EQ(pgm.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<std::uint8_t>(pgm[header.size()]), 255);
  EXPECT_EQ(static_cast<std::uint8_t>(pgm[header.size() + 1]), 0);
}

TEST(Vga, FramebufferMustFitInSram) {
  RamDevice sram(0x100000);
  VgaDevice vga(&sram, kSramBase);
  vga.set_fb_base(kSramBase + 0x100000 - 100);
  EXPECT_THROW(vga.frame(), ConfigError);
  vga.set_fb_base(0x1000);
  EXPECT_THROW(vga.frame(), ConfigError);
}

TEST(Vga, RegistersAndDump) {
  RamDevice sram(0x100000);
  VgaDevice vga(&sram, kSramBase);
  EXPECT_EQ(run(vga, wr(VgaDevice::kFbBase, kSramBase)).status, Status::ok);
  EXPECT_EQ(run(vga, wr(VgaDevice::kCtrl, 1)).status, Status::ok);
  EXPECT_TRUE(vga.enabled());
  EXPECT_EQ(run(vga, rd(VgaDevice::kFbBase)).value(), kSramBase);
  const auto dir = std::filesystem::temp_directory_path() / "mpsoc_vga_dump_test";
  std::filesystem::create_directories(dir);
  const auto path = vga.dump(dir, 1234);
  EXPECT_EQ(path.filename(), "frame_1234.pgm");
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), vga.pgm());
  std::filesystem::remove_all(dir);
}
