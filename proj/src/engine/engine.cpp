#include "engine/engine.hpp"

#include <fmt/format.h>

#include <chrono>
#include <memory>

#include "bus/bus.hpp"

namespace mpsoc::engine {

RunFault::RunFault(Mode mode, unsigned cpu, std::uint32_t pc, std::optional<std::uint32_t> word,
                   const std::string& detail)
    : GuestFault(word ? fmt::format("{} cpu{} fault at pc 0x{:08x} (word 0x{:08x}): {}", to_string(mode), cpu, pc, *word,
                                    detail)
                      : fmt::format("{} cpu{} fault at pc 0x{:08x}: {}", to_string(mode), cpu, pc, detail),
                 pc),
      mode_(mode),
      cpu_(cpu),
      word_(word) {}

std::uint64_t RunReport::total_instructions() const {
  std::uint64_t n = 0;
  for (auto c : instr_count) n += c;
  return n;
}

std::string RunReport::summary() const {
  std::string s;
  s += fmt::format("mode                     {}\n", to_string(mode));
  s += fmt::format("completed                {}\n", completed ? "yes" : (limit_reached ? "no (cycle limit)" : "no"));
  s += fmt::format("wall_seconds             {:.6f}\n", wall_seconds);
  s += fmt::format("sim_cycles               {}\n", sim_cycles);
  s += fmt::format("sim_ns                   {}\n", sim_ns);
  for (std::size_t i = 0; i < instr_count.size(); ++i) s += fmt::format("instr_count[cpu{}]        {}\n", i, instr_count[i]);
  s += fmt::format("bus_transactions         {}\n", bus_transactions);
  s += fmt::format("contention_stall_cycles  {}\n", contention_stall_cycles);
  for (const auto& [k, v] : component_wall_share) s += fmt::format("wall_share[{}]{:<{}}{:.3f}\n", k, "", 13 - k.size(), v);
  if (!frames.empty()) s += fmt::format("frames_dumped            {}\n", frames.size());
  return s;
}

namespace {

class BramFetch : public isa::FetchPort {
 public:
  BramFetch(const dev::RamDevice& bram, const bus::RegionSpec& region) : bram_(bram), region_(region) {}
  std::optional<std::uint32_t> fetch_word(std::uint32_t a) override {
    if (!region_.contains(a) || std::uint64_t{a} + 4 > region_.end()) return std::nullopt;
    return bram_.peek(a - region_.base);
  }

 private:
  const dev::RamDevice& bram_;
  const bus::RegionSpec& region_;
};

struct Fault {
  unsigned cpu = 0;
  std::uint32_t pc = 0;
  std::optional<std::uint32_t> word;
  std::string detail;
};

class Run;

/// Data side of one CPU: private BRAM over the local bus, everything else
/// over the shared bus binding of the engine.
class CpuDataPort : public isa::DataPort {
 public:
  CpuDataPort(Run& run, unsigned cpu) : run_(run), cpu_(cpu) {}
  void access(bus::Transaction& txn) override;
  sim::SimTime take_delay() { return std::exchange(delay_, 0); }

 private:
  Run& run_;
  unsigned cpu_;
  sim::SimTime delay_ = 0;
};

class Run {
 public:
  Run(Platform& p, Mode mode, const RunOptions& opt)
      : p_(p), mode_(mode), opt_(opt), period_(p.config().timing.clock_period_ns), timing_(p.config().timing) {
    if (mode == Mode::caba) {
      cycle_bus_ = std::make_unique<bus::CycleBus>(kernel_, p.map(), p.config().arbiter, period_);
    } else {
      tlm_bus_ = std::make_unique<bus::TlmBus>(kernel_, p.map(), p.config().arbiter, period_);
    }
    instr_.assign(p.cpu_count(), 0);
  }

  RunReport execute(const std::vector<NativeTask>& tasks);

  void bus_access(bus::Transaction& txn, sim::SimTime& delay) {
    if (cycle_bus_) {
      cycle_bus_->transport(txn);
      return;
    }
    tlm_bus_->transport(txn);
    if (mode_ != Mode::iss) {
      txn.annotated_delay = sim::SimTime{timing_.transaction_delay_cycles} * period_;
      delay += txn.annotated_delay;
    }
  }

  Platform& platform() { return p_; }
  sim::Kernel& kernel() { return kernel_; }
  sim::SimTime period() const { return period_; }

 private:
  void cpu_body(unsigned id);
  void native_body(unsigned id, const NativeTask& task);
  void vga_body();
  void cpu_done() {
    if (++finished_ == p_.cpu_count()) kernel_.request_stop();
  }

  friend class NativeIoImpl;

  Platform& p_;
  Mode mode_;
  const RunOptions& opt_;
  sim::SimTime period_;
  const isa::TimingTable& timing_;
  std::unique_ptr<bus::CycleBus> cycle_bus_;
  std::unique_ptr<bus::TlmBus> tlm_bus_;
  std::vector<std::uint64_t> instr_;
  unsigned finished_ = 0;
  std::optional<Fault> fault_;
  std::vector<std::filesystem::path> frames_;
  // Last, so suspended processes unwind while everything above is alive.
  sim::Kernel kernel_;
};

void CpuDataPort::access(bus::Transaction& txn) {
  auto& p = run_.platform();
  const auto& lmb = p.bram_region();
  if (lmb.contains(txn.address)) {
    if (std::uint64_t{txn.address} + txn.width > lmb.end() || !bus::well_formed(txn)) {
      txn.status = bus::Status::bus_error;
      return;
    }
    p.bram(cpu_).access(txn, txn.address - lmb.base);
    return;
  }
  run_.bus_access(txn, delay_);
}

void Run::cpu_body(unsigned id) {
  auto& cpu = p_.cpu(id);
  BramFetch iport(p_.bram(id), p_.bram_region());
  CpuDataPort dport(*this, id);
  auto& intc = p_.intc();
  try {
    for (;;) {
      const std::uint32_t pc = cpu.pc;
      const auto r = isa::step(cpu, iport, dport, &timing_, intc.line(id));
      ++instr_[id];
      if (opt_.on_retire) opt_.on_retire(RetireRecord{id, pc, r, cpu});
      switch (mode_) {
        case Mode::caba:
          for (std::uint32_t c = 0; c < r.cycles; ++c) kernel_.wait(period_);
          break;
        case Mode::iss:
          kernel_.wait(sim::SimTime{r.cycles} * period_);
          break;
        case Mode::pvt:
          kernel_.wait(sim::SimTime{r.cycles} * period_ + dport.take_delay());
          break;
        case Mode::native:
          break;
      }
      if (r.halted) break;
    }
  } catch (const isa::IllegalInstruction& e) {
    fault_ = Fault{id, e.pc(), e.word(), e.what()};
    throw;
  } catch (const GuestFault& e) {
    std::optional<std::uint32_t> word;
    if (auto w = iport.fetch_word(e.pc())) word = w;
    fault_ = Fault{id, e.pc(), word, e.what()};
    throw;
  }
  cpu_done();
}

class NativeIoImpl : public NativeIo {
 public:
  NativeIoImpl(Run& run, unsigned id) : run_(run), id_(id) {}

  std::uint32_t read32(std::uint32_t a) override { return transfer(bus::Transaction::read(id_, a, 4)).value(); }
  std::uint8_t read8(std::uint32_t a) override {
    return static_cast<std::uint8_t>(transfer(bus::Transaction::read(id_, a, 1)).value());
  }
  void write32(std::uint32_t a, std::uint32_t v) override { transfer(bus::Transaction::write(id_, a, 4, v)); }
  void write8(std::uint32_t a, std::uint8_t v) override { transfer(bus::Transaction::write(id_, a, 1, v)); }
  unsigned cpu_id() const override { return id_; }
  unsigned cpu_count() const override { return run_.p_.cpu_count(); }

 private:
  bus::Transaction transfer(bus::Transaction txn) {
    sim::SimTime delay = 0;
    run_.tlm_bus_->transport(txn);
    delay = sim::SimTime{run_.timing_.transaction_delay_cycles} * run_.period_;
    txn.annotated_delay = delay;
    run_.kernel_.wait(delay);  // also yields when the delay is zero
    if (txn.status != bus::Status::ok) throw NativeBusError(txn.address, "native access failed: " + bus::describe(txn));
    return txn;
  }

  Run& run_;
  unsigned id_;
};

void Run::native_body(unsigned id, const NativeTask& task) {
  NativeIoImpl io(*this, id);
  try {
    task(io);
  } catch (const NativeBusError& e) {
    fault_ = Fault{id, 0, std::nullopt, e.what()};
    throw;
  }
  cpu_done();
}

void Run::vga_body() {
  kernel_.set_region(sim::Region::device);
  for (std::uint64_t k = 1;; ++k) {
    // Frame k is due at k/60 s, rounded up to the next clock edge.
    const sim::SimTime due_ns = (k * 1'000'000'000ull + 59) / 60;
    const sim::SimTime due = (due_ns + period_ - 1) / period_ * period_;
    kernel_.wait(due - kernel_.now());
    if (p_.vga().enabled()) frames_.push_back(p_.vga().dump(*opt_.vga_dump_dir, kernel_.now()));
  }
}

RunReport Run::execute(const std::vector<NativeTask>& tasks) {
  if (mode_ == Mode::native && tasks.size() != p_.cpu_count()) {
    throw ConfigError(fmt::format("native run needs {} tasks, got {}", p_.cpu_count(), tasks.size()));
  }
  if (opt_.vga_dump_dir) std::filesystem::create_directories(*opt_.vga_dump_dir);
  kernel_.set_trace(opt_.trace);
  for (unsigned i = 0; i < p_.cpu_count(); ++i) {
    if (mode_ == Mode::native) {
      kernel_.register_process(fmt::format("cpu{}", i), [this, i, &tasks] { native_body(i, tasks[i]); });
    } else {
      kernel_.register_process(fmt::format("cpu{}", i), [this, i] { cpu_body(i); });
    }
  }
  p_.timer().attach(kernel_, period_);
  if (opt_.vga_dump_dir) kernel_.register_process("vga", [this] { vga_body(); });

  const sim::SimTime limit = opt_.max_cycles == 0 ? sim::kForever : opt_.max_cycles * period_;
  const auto t0 = std::chrono::steady_clock::now();
  sim::RunResult rr;
  try {
    rr = kernel_.run_until(limit);
  } catch (const sim::ProcessFault& e) {
    if (fault_) throw RunFault(mode_, fault_->cpu, fault_->pc, fault_->word, fault_->detail);
    std::rethrow_exception(e.cause());
  }
  const auto t1 = std::chrono::steady_clock::now();

  RunReport rep;
  rep.mode = mode_;
  rep.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  rep.sim_ns = rr.time;
  rep.sim_cycles = rr.time / period_;
  rep.instr_count = instr_;
  const bus::BusStats& stats = cycle_bus_ ? cycle_bus_->stats() : tlm_bus_->stats();
  rep.bus_transactions = stats.transactions;
  rep.contention_stall_cycles = stats.stall_cycles;
  rep.component_wall_share = kernel_.profiler().shares();
  rep.completed = finished_ == p_.cpu_count();
  rep.limit_reached = rr.limit_reached;
  rep.trace_hash = kernel_.trace_hash();
  rep.dispatches = kernel_.dispatch_count();
  if (opt_.vga_dump_dir && p_.vga().enabled() && rep.completed) {
    if (frames_.empty() || frames_.back().filename() != fmt::format("frame_{}.pgm", rr.time)) {
      frames_.push_back(p_.vga().dump(*opt_.vga_dump_dir, rr.time));
    }
  }
  rep.frames = frames_;
  return rep;
}

}  // namespace

RunReport run(Platform& platform, Mode mode, const RunOptions& options, const std::vector<NativeTask>& tasks) {
  if (platform.consumed()) throw ConfigError("platform already ran; build a fresh one per run");
  platform.mark_consumed();
  Run r(platform, mode, options);
  return r.execute(tasks);
}

}  // namespace mpsoc::engine
