#pragma once

// Deterministic discrete-event kernel with cooperative processes.
//
// Each process runs on its own fiber and gives control back to the kernel
// only through wait(), block(), or by returning. Exactly one process executes
// at a time. Events are ordered by (time, round, registration index): round
// is bumped by zero-delay waits and wake-ups so they queue behind everything
// already pending at the current instant.

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpsoc::sim {

/// Simulated time in nanoseconds.
using SimTime = std::uint64_t;

inline constexpr SimTime kForever = std::numeric_limits<SimTime>::max();

enum class ProcessState : std::uint8_t { runnable, waiting, blocked, finished };

const char* to_string(ProcessState s);

struct ProcessHandle {
  std::uint32_t id = 0;
  std::uint32_t registration_index = 0;

  friend bool operator==(const ProcessHandle&, const ProcessHandle&) = default;
};

/// Misuse of the kernel API (wait outside a process, registering on a
/// finished kernel, duplicate names).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A process body threw. The original exception is kept in cause().
class ProcessFault : public std::runtime_error {
 public:
  ProcessFault(std::string process, const std::string& detail, std::exception_ptr cause);

  const std::string& process() const noexcept { return process_; }
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  std::string process_;
  std::exception_ptr cause_;
};

/// Host wall-time accounting by simulated component.
enum class Region : std::uint8_t { kernel, cpu, bus, device };
inline constexpr std::size_t kRegionCount = 4;
const char* to_string(Region r);

class Profiler {
 public:
  using clock = std::chrono::steady_clock;

  void start();
  void stop();
  void switch_to(Region r) {
    if (r == current_) return;
    if (active_) flush();
    current_ = r;
  }

  double seconds(Region r) const;
  double total_seconds() const;
  /// Fraction of accounted wall time per region name; sums to 1 when any
  /// time was recorded.
  std::map<std::string, double> shares() const;

 private:
  void flush();

  bool active_ = false;
  Region current_ = Region::kernel;
  clock::time_point last_{};
  std::array<clock::duration, kRegionCount> spent_{};
};

struct RunResult {
  SimTime time = 0;
  bool blocked_processes_remain = false;
  bool limit_reached = false;
  bool stopped = false;
};

struct ProcessCounts {
  std::size_t runnable = 0;
  std::size_t waiting = 0;
  std::size_t blocked = 0;
  std::size_t finished = 0;

  std::size_t total() const { return runnable + waiting + blocked + finished; }
};

class Kernel {
 public:
  static constexpr std::size_t kDefaultStackBytes = 256 * 1024;

  explicit Kernel(std::size_t stack_bytes = kDefaultStackBytes);
  ~Kernel();
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  /// Enqueues a new process at the current time. Names must be unique.
  ProcessHandle register_process(std::string name, std::function<void()> body);

  /// Suspends the calling process for `delay` ns. wait(0) yields to every
  /// process already pending at this instant.
  void wait(SimTime delay);

  /// Suspends the calling process until another process calls wake().
  void block();

  /// Makes a blocked or waiting process runnable at the current instant,
  /// behind everything already pending. No-op for runnable/finished ones.
  void wake(ProcessHandle h);

  SimTime now() const noexcept { return now_; }

  /// Dispatches events until the queue drains, the next event lies beyond
  /// `limit`, or request_stop() is called. May be called again after a
  /// limit stop. Rethrows process exceptions as ProcessFault.
  RunResult run_until(SimTime limit);
  RunResult run() { return run_until(kForever); }

  /// Ends the current run after the dispatching process yields.
  void request_stop() noexcept { stop_requested_ = true; }

  bool in_process() const noexcept { return current_ != nullptr; }
  std::optional<ProcessHandle> current() const;
  ProcessState state(ProcessHandle h) const;
  const std::string& name(ProcessHandle h) const;
  ProcessCounts counts() const;
  std::size_t process_count() const noexcept { return procs_.size(); }

  /// One line per dispatch: time_ns, process name, event kind (TAB separated).
  void set_trace(std::ostream* out) noexcept { trace_ = out; }
  /// FNV-style digest over every dispatch (time, process, kind).
  std::uint64_t trace_hash() const noexcept { return trace_hash_; }
  std::uint64_t dispatch_count() const noexcept { return dispatches_; }

  Profiler& profiler() noexcept { return profiler_; }
  const Profiler& profiler() const noexcept { return profiler_; }
  Region region() const noexcept;
  void set_region(Region r) noexcept;

 private:
  struct Process;
  enum class Phase : std::uint8_t { idle, running, paused, finished };
  enum class Resume : std::uint8_t { start, timeout, delta, wake };

  struct Event {
    SimTime time;
    std::uint32_t round;
    std::uint32_t index;
    std::uint64_t seq;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      if (a.round != b.round) return a.round > b.round;
      return a.index > b.index;
    }
  };

  Process& require_current(const char* what);
  void schedule(Process& p, SimTime time, std::uint32_t round, Resume why);
  void suspend(Process& p);
  void dispatch(Process& p);
  bool has_live_events();

  std::size_t stack_bytes_;
  std::vector<std::unique_ptr<Process>> procs_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  Process* current_ = nullptr;
  SimTime now_ = 0;
  std::uint32_t round_ = 0;
  Phase phase_ = Phase::idle;
  bool stop_requested_ = false;
  std::ostream* trace_ = nullptr;
  std::uint64_t trace_hash_ = 0xcbf29ce484222325ull;
  std::uint64_t dispatches_ = 0;
  Profiler profiler_;
};

/// Attributes host time to `r` for the current process until destruction.
class RegionScope {
 public:
  RegionScope(Kernel& k, Region r) : kernel_(k), previous_(k.region()) { kernel_.set_region(r); }
  ~RegionScope() { kernel_.set_region(previous_); }
  RegionScope(const RegionScope&) = delete;
  RegionScope& operator=(const RegionScope&) = delete;

 private:
  Kernel& kernel_;
  Region previous_;
};

}  // namespace mpsoc::sim
