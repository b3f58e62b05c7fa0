/* C interface to the MPSoC virtual platform. */
#ifndef MPSOC_MPSOC_H
#define MPSOC_MPSOC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MPSOC_API __declspec(dllexport)
#else
#define MPSOC_API __attribute__((visibility("default")))
#endif

typedef enum mpsoc_status {
  MPSOC_OK = 0,
  MPSOC_ERR_CONFIG = 1,      /* bad config, timing, image, workload or argument */
  MPSOC_ERR_GUEST_FAULT = 2, /* illegal instruction, unmapped fetch, bus error */
  MPSOC_ERR_MEASUREMENT = 3, /* unusable timings for speed-up/precision */
  MPSOC_ERR_IO = 4,
  MPSOC_ERR_INTERNAL = 5
} mpsoc_status;

#define MPSOC_MAX_CPUS 16

typedef struct mpsoc_session mpsoc_session;

typedef struct mpsoc_run_report {
  char mode[8];
  double wall_seconds;
  uint64_t sim_cycles;
  uint64_t sim_ns;
  uint32_t cpu_count;
  uint64_t instr_count[MPSOC_MAX_CPUS];
  uint64_t bus_transactions;
  uint64_t contention_stall_cycles;
  double share_kernel;
  double share_cpu;
  double share_bus;
  double share_device;
  int completed;
  uint64_t trace_hash;
  uint32_t frames_dumped;
} mpsoc_run_report;

/* Message for the last failing call on this thread ("" if none). */
MPSOC_API const char* mpsoc_last_error(void);
MPSOC_API const char* mpsoc_version(void);
MPSOC_API void mpsoc_string_free(char* s);

MPSOC_API mpsoc_status mpsoc_assemble_file(const char* source_path, const char* image_path);
/* *text_out must be released with mpsoc_string_free. */
MPSOC_API mpsoc_status mpsoc_disassemble_file(const char* image_path, char** text_out);

/* Either path may be NULL for the built-in defaults. A timing path given
 * here overrides the one named in the config. */
MPSOC_API mpsoc_status mpsoc_session_create(const char* config_path, const char* timing_path, mpsoc_session** out);
MPSOC_API void mpsoc_session_destroy(mpsoc_session* s);

/* cpu < 0 loads the image on every CPU. */
MPSOC_API mpsoc_status mpsoc_session_load_image(mpsoc_session* s, int cpu, const char* image_path);
/* e.g. "life generations=10" or "adder n=100"; replaces loaded images. */
MPSOC_API mpsoc_status mpsoc_session_load_workload(mpsoc_session* s, const char* spec);
/* NULL disables. */
MPSOC_API mpsoc_status mpsoc_session_set_trace(mpsoc_session* s, const char* path);
MPSOC_API mpsoc_status mpsoc_session_set_vga_dump(mpsoc_session* s, const char* dir);

/* engine: "caba", "iss", "pvt" or "native". max_cycles 0 = no limit.
 * Every run starts from a fresh platform. */
MPSOC_API mpsoc_status mpsoc_session_run(mpsoc_session* s, const char* engine, uint64_t max_cycles,
                                         mpsoc_run_report* report);
/* Multi-line summary of the last run; release with mpsoc_string_free. */
MPSOC_API mpsoc_status mpsoc_session_report_text(mpsoc_session* s, char** text_out);
/* SRAM contents after the last run. */
MPSOC_API mpsoc_status mpsoc_session_read_memory(mpsoc_session* s, uint32_t address, void* buffer, size_t length);

/* Full experiment; writes the CSV when csv_path is non-NULL and returns the
 * rendered table in *table_out (may be NULL). */
MPSOC_API mpsoc_status mpsoc_bench(const char* config_path, const char* csv_path, unsigned repeat, char** table_out);

#ifdef __cplusplus
}
#endif

#endif
