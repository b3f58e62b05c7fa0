#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "assembly/assembler.hpp"
#include "dev/devices.hpp"
#include "engine/engine.hpp"
#include "engine/platform.hpp"
#include "harness/harness.hpp"
#include "workload/workloads.hpp"

using namespace mpsoc;
using namespace mpsoc::engine;
namespace wl = mpsoc::workload;

namespace {

PlatformConfig config(unsigned cpus) {
  PlatformConfig c;
  c.cpu_count = cpus;
  c.arbiter = bus::ArbiterConfig::fixed(cpus);
  return c;
}

struct Outcome {
  std::unique_ptr<Platform> platform;
  RunReport report;
};

Outcome run_source(const PlatformConfig& cfg, std::string_view src, Mode mode, const RunOptions& opt = {}) {
  Outcome o{std::make_unique<Platform>(cfg), {}};
  const auto img = assembly::assemble(src);
  for (unsigned i = 0; i < cfg.cpu_count; ++i) o.platform->load_image(i, wl::specialise(img, i, cfg.cpu_count));
  o.report = run(*o.platform, mode, opt);
  return o;
}

Outcome run_spec(const PlatformConfig& cfg, const std::string& spec, Mode mode, const RunOptions& opt = {}) {
  Outcome o{std::make_unique<Platform>(cfg), {}};
  const auto tasks = wl::prepare(*o.platform, WorkloadSpec::parse(spec), mode);
  o.report = run(*o.platform, mode, opt, tasks);
  return o;
}

constexpr Mode kGuestModes[] = {Mode::caba, Mode::iss, Mode::pvt};

// A BRAM-only loop with arithmetic, calls and branches.
constexpr const char* kBramOnly = R"(
        LI r1, 25
        ADDI r2, r0, 0
loop:   BRLID r15, body
        ADDI r1, r1, -1
        BNEI r1, loop
        SWI r2, r0, result
        LWI r3, r0, result
        HALT
body:   MUL r4, r1, r1
        ADD r2, r2, r4
        RTSD r15, 4
result: .word 0
)";

}  // namespace

TEST(Engine, HaltAtEntryCostsOneInstruction) {
  for (auto m : kGuestModes) {
    const auto o = run_source(config(1), "HALT\n", m);
    EXPECT_EQ(o.report.sim_cycles, 1u) << to_string(m);
    EXPECT_EQ(o.report.instr_count[0], 1u);
    EXPECT_TRUE(o.report.completed);
    EXPECT_EQ(o.report.sim_ns, o.report.sim_cycles * 10);
  }
}

TEST(Engine, CabaCyclesMatchTraceSum) {
  // Independent oracle: table cycles of each retired instruction plus, for
  // every shared-bus access, one transfer cycle and the slave's access cycles.
  auto cfg = config(1);
  cfg.access_cycles["SRAM"] = 3;
  const auto& timing = cfg.timing;
  std::uint64_t oracle = 0;
  RunOptions opt;
  opt.on_retire = [&](const RetireRecord& r) {
    oracle += timing.cost(r.result.executed.mnemonic) + (r.result.branch_taken ? timing.taken_branch_extra : 0);
    for (const auto& t : r.result.transactions()) {
      if (t.address >= 0x2000) oracle += 1 + 3;
    }
  };
  const auto o = run_spec(cfg, "adder n=30", Mode::caba, opt);
  EXPECT_EQ(wl::read_adder_result(*o.platform), 465u);
  EXPECT_EQ(o.report.sim_cycles, oracle);
  EXPECT_EQ(o.report.bus_transactions, 2u);
}

TEST(Engine, BramOnlyProgramIdenticalAcrossGuestEngines) {
  std::vector<std::vector<std::pair<std::uint32_t, isa::CpuState>>> traces;
  std::vector<std::uint64_t> cycles;
  for (auto m : kGuestModes) {
    std::vector<std::pair<std::uint32_t, isa::CpuState>> trace;
    RunOptions opt;
    opt.on_retire = [&](const RetireRecord& r) { trace.emplace_back(r.pc, r.state); };
    const auto o = run_source(config(1), kBramOnly, m, opt);
    EXPECT_EQ(o.report.bus_transactions, 0u);
    traces.push_back(trace);
    cycles.push_back(o.report.sim_cycles);
  }
  EXPECT_EQ(traces[0], traces[1]);
  EXPECT_EQ(traces[0], traces[2]);
  EXPECT_EQ(cycles[0], cycles[1]);
  EXPECT_EQ(cycles[0], cycles[2]);
  std::uint32_t sum = 0;
  for (std::uint32_t i = 1; i <= 25; ++i) sum += i * i;
  EXPECT_EQ(traces[0].back().second.reg(3), sum);
}

TEST(Engine, AlternatingSramWritesContendUnderCaba) {
  const auto o = run_source(config(2), R"(
        LWI r1, r0, cpu_id
        BSLLI r1, r1, 2
        LI r24, 0x20100000
        ADD r24, r24, r1
        ADDI r3, r0, 50
loop:   SWI r3, r24, 0
        ADDI r3, r3, -1
        BNEI r3, loop
        HALT
cpu_id:    .word 0
cpu_count: .word 1
)",
                            Mode::caba);
  EXPECT_GT(o.report.contention_stall_cycles, 0u);
  EXPECT_EQ(o.platform->peek(0x20100000), 1u);
  EXPECT_EQ(o.platform->peek(0x20100004), 1u);
}

TEST(Engine, PvtEqualsCabaForOneCpu) {
  for (const char* spec : {"adder n=100", "stress iterations=50", "life generations=3"}) {
    const auto caba = run_spec(config(1), spec, Mode::caba);
    const auto pvt = run_spec(config(1), spec, Mode::pvt);
    EXPECT_EQ(pvt.report.sim_cycles, caba.report.sim_cycles) << spec;
    EXPECT_EQ(caba.report.contention_stall_cycles, 0u);
  }
}

TEST(Engine, PvtEqualsCabaWithMatchedSlowMemory) {
  // transfer + access cycles = transaction delay.
  auto cfg = config(1);
  cfg.access_cycles["SRAM"] = 4;
  cfg.timing.transaction_delay_cycles = 5;
  EXPECT_EQ(run_spec(cfg, "stress iterations=20", Mode::pvt).report.sim_cycles,
            run_spec(cfg, "stress iterations=20", Mode::caba).report.sim_cycles);
}

TEST(Engine, RefinementMonotonicity) {
  for (const char* spec : {"life generations=4", "stress iterations=100", "adder n=50"}) {
    const auto iss = run_spec(config(2), spec, Mode::iss).report;
    const auto pvt = run_spec(config(2), spec, Mode::pvt).report;
    const auto caba = run_spec(config(2), spec, Mode::caba).report;
    EXPECT_LE(iss.sim_cycles, pvt.sim_cycles) << spec;
    EXPECT_LE(pvt.sim_cycles, caba.sim_cycles) << spec;
    if (caba.contention_stall_cycles > 0) EXPECT_LT(pvt.sim_cycles, caba.sim_cycles) << spec;
  }
  // SRAM-heavy: strictly cheaper without transfer cycles.
  EXPECT_LT(run_spec(config(2), "stress iterations=100", Mode::iss).report.sim_cycles,
            run_spec(config(2), "stress iterations=100", Mode::caba).report.sim_cycles);
}

TEST(Engine, ZeroDelayPvtCollapsesToIssForOneCpu) {
  auto cfg = config(1);
  cfg.timing.transaction_delay_cycles = 0;
  EXPECT_EQ(run_spec(cfg, "stress iterations=30", Mode::pvt).report.sim_cycles,
            run_spec(cfg, "stress iterations=30", Mode::iss).report.sim_cycles);
}

TEST(Engine, OutputsIdenticalAcrossAllEngines) {
  for (const char* text : {"life generations=5", "adder n=77", "stress iterations=40"}) {
    const auto spec = WorkloadSpec::parse(text);
    std::vector<std::uint8_t> first;
    for (auto m : kAllModes) {
      const auto o = run_spec(config(2), text, m);
      const auto out = wl::output_region(*o.platform, spec);
      if (first.empty()) {
        first = out;
      } else {
        EXPECT_EQ(out, first) << text << " " << to_string(m);
      }
    }
  }
}

TEST(Engine, NativeAdderCostsOneTransaction) {
  const auto o = run_spec(config(2), "adder n=10", Mode::native);
  EXPECT_EQ(wl::read_adder_result(*o.platform), 55u);
  EXPECT_EQ(o.report.sim_cycles, config(2).timing.transaction_delay_cycles);
  EXPECT_EQ(o.report.total_instructions(), 0u);
}

TEST(Engine, ReportsAreDeterministic) {
  for (auto m : kAllModes) {
    const auto a = run_spec(config(2), "life generations=3", m).report;
    const auto b = run_spec(config(2), "life generations=3", m).report;
    EXPECT_EQ(a.sim_cycles, b.sim_cycles);
    EXPECT_EQ(a.instr_count, b.instr_count);
    EXPECT_EQ(a.bus_transactions, b.bus_transactions);
    EXPECT_EQ(a.contention_stall_cycles, b.contention_stall_cycles);
    EXPECT_EQ(a.trace_hash, b.trace_hash);
    EXPECT_EQ(a.dispatches, b.dispatches);
  }
}

TEST(Engine, WallSharesSumToAtMostOne) {
  for (auto m : kAllModes) {
    const auto r = run_spec(config(2), "life generations=2", m).report;
    double total = 0;
    for (const auto& [k, v] : r.component_wall_share) {
      EXPECT_GE(v, 0.0);
      total += v;
    }
    EXPECT_LE(total, 1.0 + 1e-9);
  }
}

TEST(Engine, IllegalInstructionAbortsWithLocation) {
  for (auto m : kGuestModes) {
    try {
      run_source(config(1), "NOP\n.word 0xFFFFFFFF\n", m);
      FAIL();
    } catch (const RunFault& f) {
      EXPECT_EQ(f.cpu(), 0u);
      EXPECT_EQ(f.pc(), 4u);
      EXPECT_EQ(f.word(), 0xFFFFFFFFu);
      EXPECT_EQ(f.mode(), m);
    }
  }
}

TEST(Engine, UnmappedDataAccessAborts) {
  for (auto m : kGuestModes) {
    try {
      run_source(config(1), "LI r1, 0x50000000\nLWI r2, r1, 0\nHALT\n", m);
      FAIL() << to_string(m);
    } catch (const RunFault& f) {
      EXPECT_EQ(f.pc(), 8u);
      const std::string what = f.what();
      EXPECT_NE(what.find(m == Mode::caba ? "timeout" : "bus_error"), std::string::npos) << what;
    }
  }
}

TEST(Engine, UnmappedReadTimesOutAfterSixteenCyclesInCaba) {
  std::uint64_t faulted_at = 0;
  auto cfg = config(1);
  Platform p(cfg);
  p.load_image(0, assembly::assemble("LI r1, 0x50000000\nLWI r2, r1, 0\nHALT\n"));
  std::ostringstream trace;
  RunOptions opt;
  opt.trace = &trace;
  EXPECT_THROW(run(p, Mode::caba, opt), RunFault);
  // LI = 2 cycles, then the read starts on the edge at 20 ns and gives up 16
  // cycles later; the last cpu0 dispatch is the one that observes the timeout.
  std::istringstream lines(trace.str());
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find("\tcpu0\t") != std::string::npos) faulted_at = std::stoull(line);
  }
  EXPECT_EQ(faulted_at, 20u + 16u * 10u);
}

TEST(Engine, FetchPastBramEndAborts) {
  try {
    run_source(config(1), "BRI 0x1FFC\n.org 0x1FFC\nNOP\n", Mode::iss);
    FAIL();
  } catch (const RunFault& f) {
    EXPECT_EQ(f.pc(), 0x2000u);
  }
}

TEST(Engine, BramIsNotReachableOverTheSharedBus) {
  // Each CPU sees only its own BRAM; the shared-bus BRAM window has no slave.
  const auto o = run_source(config(2), R"(
        LWI r1, r0, cpu_id
        ADDI r1, r1, 100
        SWI r1, r0, scratch
        LWI r2, r0, scratch
        LI r24, 0x20100000
        LWI r3, r0, cpu_id
        BSLLI r3, r3, 2
        ADD r24, r24, r3
        SWI r2, r24, 0
        HALT
cpu_id:    .word 0
cpu_count: .word 1
scratch:   .word 0
)",
                            Mode::iss);
  EXPECT_EQ(o.platform->peek(0x20100000), 100u);
  EXPECT_EQ(o.platform->peek(0x20100004), 101u);
  EXPECT_EQ(o.report.bus_transactions, 2u);
}

TEST(Engine, NativeUnmappedAccessFails) {
  Platform p(config(1));
  std::vector<NativeTask> tasks{[](NativeIo& io) { io.read32(0x50000000); }};
  EXPECT_THROW(run(p, Mode::native, {}, tasks), RunFault);
}

TEST(Engine, NativeNeedsOneTaskPerCpu) {
  Platform p(config(2));
  EXPECT_THROW(run(p, Mode::native, {}, {}), ConfigError);
}

TEST(Engine, PlatformRunsOnce) {
  Platform p(config(1));
  p.load_image(0, assembly::assemble("HALT\n"));
  run(p, Mode::iss);
  EXPECT_THROW(run(p, Mode::iss), ConfigError);
}

TEST(Engine, CycleLimit) {
  const auto o = run_source(config(1), "loop: BRI loop\n", Mode::caba, RunOptions{100, nullptr, {}, {}});
  EXPECT_TRUE(o.report.limit_reached);
  EXPECT_FALSE(o.report.completed);
  EXPECT_LE(o.report.sim_cycles, 100u);
}

TEST(Engine, TimerInterruptsReachTheGuest) {
  for (auto m : kGuestModes) {
    const auto o = run_spec(config(1), "timer_irq period=150 ticks=4", m);
    EXPECT_EQ(o.platform->peek(0x20108200), 4u) << to_string(m);
    EXPECT_TRUE(o.report.completed);
    // Four expiries of 150 cycles each have to fit in the run.
    EXPECT_GE(o.report.sim_cycles, 4u * 150u);
  }
}

TEST(Engine, DispatchTraceFormat) {
  std::ostringstream trace;
  RunOptions opt;
  opt.trace = &trace;
  run_source(config(1), "NOP\nHALT\n", Mode::iss, opt);
  EXPECT_EQ(trace.str().substr(0, 15), "0\tcpu0\tstart\n0\t");
  EXPECT_NE(trace.str().find("10\tcpu0\ttimeout\n"), std::string::npos);
}

TEST(Engine, VgaFramesAtSixtyHertz) {
  // Slow clock so a short program spans several frames.
  auto cfg = config(1);
  cfg.timing.clock_period_ns = 1000;
  const auto dir = std::filesystem::temp_directory_path() / "mpsoc_vga_cadence";
  std::filesystem::remove_all(dir);
  for (auto m : kGuestModes) {
    Platform p(cfg);
    p.load_image(0, assembly::assemble("LI r1, 30000\nloop: ADDI r1, r1, -1\nBNEI r1, loop\nHALT\n"));
    p.vga().set_fb_base(0x20110000);
    p.vga().set_ctrl(1);
    RunOptions opt;
    opt.vga_dump_dir = dir / to_string(m);
    const auto r = run(p, m, opt);
    ASSERT_GE(r.frames.size(), 4u) << to_string(m);
    // All but the end-of-run frame sit at k/60 s, within one clock period.
    for (std::size_t k = 0; k + 1 < r.frames.size(); ++k) {
      const auto stem = r.frames[k].stem().string();
      const double t_ns = std::stod(stem.substr(stem.find('_') + 1));
      const double due = (k + 1) * 1e9 / 60.0;
      EXPECT_LE(std::abs(t_ns - due), 1000.0) << stem;
    }
    EXPECT_EQ(r.frames.back().stem().string(), "frame_" + std::to_string(r.sim_ns));
  }
  std::filesystem::remove_all(dir);
}
