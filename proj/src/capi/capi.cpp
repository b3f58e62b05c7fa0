#include "mpsoc/mpsoc.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "assembly/assembler.hpp"
#include "assembly/image.hpp"
#include "common/error.hpp"
#include "common/text.hpp"
#include "engine/engine.hpp"
#include "harness/harness.hpp"
#include "sim/kernel.hpp"
#include "workload/workloads.hpp"

using namespace mpsoc;

struct mpsoc_session {
  engine::PlatformConfig cfg;
  std::vector<std::optional<assembly::Image>> images;
  std::optional<engine::WorkloadSpec> workload;
  std::optional<std::string> trace_path;
  std::optional<std::string> vga_dir;
  std::unique_ptr<engine::Platform> last;
  std::optional<engine::RunReport> last_report;
};

namespace {

thread_local std::string g_error;

mpsoc_status fail(mpsoc_status s, const std::string& msg) {
  g_error = msg;
  return s;
}

template <class F>
mpsoc_status guarded(F&& f) {
  g_error.clear();
  try {
    f();
    return MPSOC_OK;
  } catch (const GuestFault& e) {
    return fail(MPSOC_ERR_GUEST_FAULT, e.what());
  } catch (const MeasurementError& e) {
    return fail(MPSOC_ERR_MEASUREMENT, e.what());
  } catch (const ConfigError& e) {
    return fail(MPSOC_ERR_CONFIG, e.what());
  } catch (const sim::ProcessFault& e) {
    return fail(MPSOC_ERR_INTERNAL, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MPSOC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(MPSOC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MPSOC_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void fill(const engine::RunReport& r, mpsoc_run_report* out) {
  std::memset(out, 0, sizeof(*out));
  std::strncpy(out->mode, engine::to_string(r.mode), sizeof(out->mode) - 1);
  out->wall_seconds = r.wall_seconds;
  out->sim_cycles = r.sim_cycles;
  out->sim_ns = r.sim_ns;
  out->cpu_count = static_cast<uint32_t>(r.instr_count.size());
  for (std::size_t i = 0; i < r.instr_count.size() && i < MPSOC_MAX_CPUS; ++i) out->instr_count[i] = r.instr_count[i];
  out->bus_transactions = r.bus_transactions;
  out->contention_stall_cycles = r.contention_stall_cycles;
  auto share = [&](const char* k) {
    auto it = r.component_wall_share.find(k);
    return it == r.component_wall_share.end() ? 0.0 : it->second;
  };
  out->share_kernel = share("kernel");
  out->share_cpu = share("cpu");
  out->share_bus = share("bus");
  out->share_device = share("device");
  out->completed = r.completed ? 1 : 0;
  out->trace_hash = r.trace_hash;
  out->frames_dumped = static_cast<uint32_t>(r.frames.size());
}

}  // namespace

extern "C" {

const char* mpsoc_last_error(void) { return g_error.c_str(); }

const char* mpsoc_version(void) { return "1.0.0"; }

void mpsoc_string_free(char* s) { std::free(s); }

mpsoc_status mpsoc_assemble_file(const char* source_path, const char* image_path) {
  if (source_path == nullptr || image_path == nullptr) return fail(MPSOC_ERR_CONFIG, "null path");
  return guarded([&] { assembly::write_image(image_path, assembly::assemble_file(source_path)); });
}

mpsoc_status mpsoc_disassemble_file(const char* image_path, char** text_out) {
  if (image_path == nullptr || text_out == nullptr) return fail(MPSOC_ERR_CONFIG, "null argument");
  return guarded([&] { *text_out = dup(assembly::disassemble(assembly::read_image(image_path))); });
}

mpsoc_status mpsoc_session_create(const char* config_path, const char* timing_path, mpsoc_session** out) {
  if (out == nullptr) return fail(MPSOC_ERR_CONFIG, "null output handle");
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<mpsoc_session>();
    if (config_path != nullptr) s->cfg = engine::PlatformConfig::load(config_path);
    if (timing_path != nullptr) {
      s->cfg.timing = isa::TimingTable::load(timing_path);
      s->cfg.timing_path = timing_path;
    }
    s->cfg.validate();
    s->images.resize(s->cfg.cpu_count);
    *out = s.release();
  });
}

void mpsoc_session_destroy(mpsoc_session* s) { delete s; }

mpsoc_status mpsoc_session_load_image(mpsoc_session* s, int cpu, const char* image_path) {
  if (s == nullptr || image_path == nullptr) return fail(MPSOC_ERR_CONFIG, "null argument");
  return guarded([&] {
    if (cpu >= static_cast<int>(s->cfg.cpu_count)) throw ConfigError("no CPU " + std::to_string(cpu));
    auto img = assembly::read_image(image_path);
    s->workload.reset();
    if (cpu < 0) {
      for (unsigned i = 0; i < s->cfg.cpu_count; ++i) s->images[i] = workload::specialise(img, i, s->cfg.cpu_count);
    } else {
      s->images[static_cast<unsigned>(cpu)] = workload::specialise(img, static_cast<unsigned>(cpu), s->cfg.cpu_count);
    }
  });
}

mpsoc_status mpsoc_session_load_workload(mpsoc_session* s, const char* spec) {
  if (s == nullptr || spec == nullptr) return fail(MPSOC_ERR_CONFIG, "null argument");
  return guarded([&] {
    auto w = engine::WorkloadSpec::parse(spec);
    workload::program_source(w.name);
    s->workload = w;
    for (auto& i : s->images) i.reset();
  });
}

mpsoc_status mpsoc_session_set_trace(mpsoc_session* s, const char* path) {
  if (s == nullptr) return fail(MPSOC_ERR_CONFIG, "null session");
  if (path == nullptr) {
    s->trace_path.reset();
  } else {
    s->trace_path = path;
  }
  return MPSOC_OK;
}

mpsoc_status mpsoc_session_set_vga_dump(mpsoc_session* s, const char* dir) {
  if (s == nullptr) return fail(MPSOC_ERR_CONFIG, "null session");
  if (dir == nullptr) {
    s->vga_dir.reset();
  } else {
    s->vga_dir = dir;
  }
  return MPSOC_OK;
}

mpsoc_status mpsoc_session_run(mpsoc_session* s, const char* engine_name, uint64_t max_cycles,
                               mpsoc_run_report* report) {
  if (s == nullptr || engine_name == nullptr) return fail(MPSOC_ERR_CONFIG, "null argument");
  return guarded([&] {
    const auto mode = engine::parse_mode(engine_name);
    if (!mode) throw ConfigError(std::string("unknown engine '") + engine_name + "'");
    s->last.reset();
    s->last_report.reset();
    auto p = std::make_unique<engine::Platform>(s->cfg);
    std::vector<engine::NativeTask> tasks;
    if (s->workload) {
      tasks = workload::prepare(*p, *s->workload, *mode);
    } else {
      if (*mode == engine::Mode::native) throw ConfigError("the native engine runs built-in workloads only");
      bool any = false;
      for (unsigned i = 0; i < s->cfg.cpu_count; ++i) {
        if (!s->images[i]) continue;
        p->load_image(i, *s->images[i]);
        any = true;
      }
      if (!any) throw ConfigError("nothing to run: load an image or a workload first");
      // CPUs without an image halt at once.
      assembly::Image halt;
      halt.sections.push_back({0, {0xFC, 0x00, 0x00, 0x00}});
      for (unsigned i = 0; i < s->cfg.cpu_count; ++i) {
        if (!s->images[i]) p->load_image(i, halt);
      }
    }
    engine::RunOptions opt;
    opt.max_cycles = max_cycles;
    std::ofstream trace;
    if (s->trace_path) {
      trace.open(*s->trace_path, std::ios::binary | std::ios::trunc);
      if (!trace) throw ConfigError("cannot write trace '" + *s->trace_path + "'");
      opt.trace = &trace;
    }
    if (s->vga_dir) opt.vga_dump_dir = *s->vga_dir;
    auto rep = engine::run(*p, *mode, opt, tasks);
    s->last = std::move(p);
    s->last_report = rep;
    if (report != nullptr) fill(rep, report);
  });
}

mpsoc_status mpsoc_session_report_text(mpsoc_session* s, char** text_out) {
  if (s == nullptr || text_out == nullptr) return fail(MPSOC_ERR_CONFIG, "null argument");
  if (!s->last_report) return fail(MPSOC_ERR_CONFIG, "no completed run");
  return guarded([&] { *text_out = dup(s->last_report->summary()); });
}

mpsoc_status mpsoc_session_read_memory(mpsoc_session* s, uint32_t address, void* buffer, size_t length) {
  if (s == nullptr || (buffer == nullptr && length > 0)) return fail(MPSOC_ERR_CONFIG, "null argument");
  if (!s->last) return fail(MPSOC_ERR_CONFIG, "no completed run");
  return guarded([&] {
    const auto bytes = s->last->read_bytes(address, length);
    if (length > 0) std::memcpy(buffer, bytes.data(), length);
  });
}

mpsoc_status mpsoc_bench(const char* config_path, const char* csv_path, unsigned repeat, char** table_out) {
  if (config_path == nullptr) return fail(MPSOC_ERR_CONFIG, "null config path");
  return guarded([&] {
    harness::ExperimentOptions opt;
    opt.repeat = repeat == 0 ? 1 : repeat;
    const auto res = harness::run_experiment(std::filesystem::path(config_path), opt);
    if (csv_path != nullptr) text::write_file(csv_path, res.csv());
    if (table_out != nullptr) *table_out = dup(res.table());
  });
}

}  // extern "C"
