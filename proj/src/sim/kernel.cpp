#include "sim/kernel.hpp"

#include <boost/context/fiber.hpp>
#include <boost/context/protected_fixedsize_stack.hpp>

#include <algorithm>
#include <utility>

namespace ctx = boost::context;

namespace mpsoc::sim {

const char* to_string(ProcessState s) {
  switch (s) {
    case ProcessState::runnable: return "runnable";
    case ProcessState::waiting: return "waiting";
    case ProcessState::blocked: return "blocked";
    case ProcessState::finished: return "finished";
  }
  return "?";
}

const char* to_string(Region r) {
  switch (r) {
    case Region::kernel: return "kernel";
    case Region::cpu: return "cpu";
    case Region::bus: return "bus";
    case Region::device: return "device";
  }
  return "?";
}

ProcessFault::ProcessFault(std::string process, const std::string& detail, std::exception_ptr cause)
    : std::runtime_error("process '" + process + "' faulted: " + detail),
      process_(std::move(process)),
      cause_(std::move(cause)) {}

// ---------------------------------------------------------------------------
// Profiler

void Profiler::start() {
  active_ = true;
  last_ = clock::now();
}

void Profiler::stop() {
  if (!active_) return;
  flush();
  active_ = false;
}

void Profiler::flush() {
  const auto t = clock::now();
  spent_[static_cast<std::size_t>(current_)] += t - last_;
  last_ = t;
}

double Profiler::seconds(Region r) const {
  return std::chrono::duration<double>(spent_[static_cast<std::size_t>(r)]).count();
}

double Profiler::total_seconds() const {
  double total = 0;
  for (std::size_t i = 0; i < kRegionCount; ++i) total += seconds(static_cast<Region>(i));
  return total;
}

std::map<std::string, double> Profiler::shares() const {
  std::map<std::string, double> out;
  const double total = total_seconds();
  for (std::size_t i = 0; i < kRegionCount; ++i) {
    const auto r = static_cast<Region>(i);
    out[to_string(r)] = total > 0 ? seconds(r) / total : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel

struct Kernel::Process {
  std::string name;
  std::uint32_t index = 0;
  ProcessState state = ProcessState::runnable;
  Region region = Region::cpu;
  Resume resume = Resume::start;
  std::uint64_t seq = 0;  // matches the one live queue entry, if any
  std::function<void()> body;
  ctx::fiber fiber;
  ctx::fiber scheduler;
  std::exception_ptr error;
};

Kernel::Kernel(std::size_t stack_bytes) : stack_bytes_(stack_bytes) {}

Kernel::~Kernel() {
  // Unwinds suspended fibers while every kernel member is still alive.
  current_ = nullptr;
  procs_.clear();
}

ProcessHandle Kernel::register_process(std::string name, std::function<void()> body) {
  if (phase_ == Phase::finished) throw UsageError("kernel finished: cannot register '" + name + "'");
  if (!body) throw UsageError("process '" + name + "' has no body");
  for (const auto& p : procs_) {
    if (p->name == name) throw UsageError("duplicate process name '" + name + "'");
  }
  auto proc = std::make_unique<Process>();
  Process& p = *proc;
  p.name = std::move(name);
  p.index = static_cast<std::uint32_t>(procs_.size());
  p.body = std::move(body);
  p.fiber = ctx::fiber(std::allocator_arg, ctx::protected_fixedsize_stack(stack_bytes_),
                       [&p](ctx::fiber&& sched) {
                         p.scheduler = std::move(sched);
                         try {
                           p.body();
                         } catch (const ctx::detail::forced_unwind&) {
                           throw;
                         } catch (...) {
                           p.error = std::current_exception();
                         }
                         p.state = ProcessState::finished;
                         return std::move(p.scheduler);
                       });
  procs_.push_back(std::move(proc));
  schedule(p, now_, round_, Resume::start);
  return {p.index, p.index};
}

Kernel::Process& Kernel::require_current(const char* what) {
  if (current_ == nullptr) throw UsageError(std::string(what) + "() called outside a process");
  return *current_;
}

void Kernel::schedule(Process& p, SimTime time, std::uint32_t round, Resume why) {
  ++p.seq;
  p.resume = why;
  queue_.push(Event{time, round, p.index, p.seq});
}

void Kernel::suspend(Process& p) {
  p.scheduler = std::move(p.scheduler).resume();
}

void Kernel::wait(SimTime delay) {
  Process& p = require_current("wait");
  if (delay == 0) {
    schedule(p, now_, round_ + 1, Resume::delta);
    p.state = ProcessState::runnable;
  } else {
    if (delay > kForever - now_) throw UsageError("wait() past the end of simulated time");
    schedule(p, now_ + delay, 0, Resume::timeout);
    p.state = ProcessState::waiting;
  }
  suspend(p);
}

void Kernel::block() {
  Process& p = require_current("block");
  ++p.seq;  // drops any stale queue entry
  p.state = ProcessState::blocked;
  suspend(p);
}

void Kernel::wake(ProcessHandle h) {
  if (h.id >= procs_.size()) throw UsageError("wake(): unknown process");
  Process& p = *procs_[h.id];
  if (&p == current_) return;
  if (p.state == ProcessState::blocked || p.state == ProcessState::waiting) {
    schedule(p, now_, round_ + 1, Resume::wake);
    p.state = ProcessState::runnable;
  }
}

void Kernel::dispatch(Process& p) {
  static constexpr const char* kKinds[] = {"start", "timeout", "delta", "wake"};
  const char* kind = kKinds[static_cast<int>(p.resume)];

  // FNV-1a style, one 64-bit word per step.
  auto mix = [this](std::uint64_t v) {
    trace_hash_ ^= v;
    trace_hash_ *= 0x100000001b3ull;
  };
  mix(now_);
  mix(std::uint64_t{p.index} << 8 | static_cast<std::uint64_t>(p.resume));
  ++dispatches_;
  if (trace_ != nullptr) *trace_ << now_ << '\t' << p.name << '\t' << kind << '\n';

  p.state = ProcessState::runnable;
  current_ = &p;
  profiler_.switch_to(p.region);
  p.fiber = std::move(p.fiber).resume();
  current_ = nullptr;
}

bool Kernel::has_live_events() {
  while (!queue_.empty()) {
    const Event& e = queue_.top();
    if (e.seq == procs_[e.index]->seq && procs_[e.index]->state != ProcessState::finished) return true;
    queue_.pop();
  }
  return false;
}

RunResult Kernel::run_until(SimTime limit) {
  if (current_ != nullptr) throw UsageError("run_until() called from inside a process");
  if (phase_ == Phase::running) throw UsageError("kernel already running");

  RunResult result;
  if (phase_ == Phase::finished) {
    result.time = now_;
    return result;
  }
  phase_ = Phase::running;
  stop_requested_ = false;
  profiler_.start();

  for (;;) {
    if (stop_requested_) {
      result.stopped = true;
      break;
    }
    if (!has_live_events()) break;
    const Event e = queue_.top();
    if (e.time > limit) {
      result.limit_reached = true;
      break;
    }
    queue_.pop();
    now_ = e.time;
    round_ = e.round;
    Process& p = *procs_[e.index];
    dispatch(p);
    if (p.error) {
      profiler_.switch_to(Region::kernel);
      profiler_.stop();
      phase_ = Phase::finished;
      std::string detail = "unknown exception";
      try {
        std::rethrow_exception(p.error);
      } catch (const std::exception& ex) {
        detail = ex.what();
      } catch (...) {
      }
      throw ProcessFault(p.name, detail, p.error);
    }
  }

  profiler_.switch_to(Region::kernel);
  profiler_.stop();
  result.time = now_;
  result.blocked_processes_remain = std::any_of(
      procs_.begin(), procs_.end(), [](const auto& p) { return p->state == ProcessState::blocked; });
  phase_ = result.limit_reached ? Phase::paused : Phase::finished;
  return result;
}

std::optional<ProcessHandle> Kernel::current() const {
  if (current_ == nullptr) return std::nullopt;
  return ProcessHandle{current_->index, current_->index};
}

ProcessState Kernel::state(ProcessHandle h) const {
  if (h.id >= procs_.size()) throw UsageError("state(): unknown process");
  return procs_[h.id]->state;
}

const std::string& Kernel::name(ProcessHandle h) const {
  if (h.id >= procs_.size()) throw UsageError("name(): unknown process");
  return procs_[h.id]->name;
}

ProcessCounts Kernel::counts() const {
  ProcessCounts c;
  for (const auto& p : procs_) {
    switch (p->state) {
      case ProcessState::runnable: ++c.runnable; break;
      case ProcessState::waiting: ++c.waiting; break;
      case ProcessState::blocked: ++c.blocked; break;
      case ProcessState::finished: ++c.finished; break;
    }
  }
  return c;
}

Region Kernel::region() const noexcept {
  return current_ != nullptr ? current_->region : Region::kernel;
}

void Kernel::set_region(Region r) noexcept {
  if (current_ == nullptr) return;
  current_->region = r;
  profiler_.switch_to(r);
}

}  // namespace mpsoc::sim
