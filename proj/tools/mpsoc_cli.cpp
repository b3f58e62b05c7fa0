// mpsoc: command-line front end over the C interface.
//
//   mpsoc run --engine pvt --image adder.img
//   mpsoc run --engine caba --workload "life generations=10" --dump-vga frames
//   mpsoc bench --config configs/bench.cfg --out-csv results.csv
//   mpsoc asm programs/life.s -o life.img
//   mpsoc disasm life.img
//
// Exit status: 0 success, 1 guest fault, 2 configuration or usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "mpsoc/mpsoc.h"

namespace {

int exit_code(mpsoc_status s) {
  switch (s) {
    case MPSOC_OK: return 0;
    case MPSOC_ERR_GUEST_FAULT: return 1;
    default: return 2;
  }
}

int report_failure(mpsoc_status s) {
  std::fprintf(stderr, "mpsoc: %s\n", mpsoc_last_error());
  return exit_code(s);
}

struct RunArgs {
  std::string engine = "iss";
  std::string config;
  std::string timing;
  std::vector<std::string> images;
  std::string workload;
  std::uint64_t max_cycles = 0;
  std::string trace;
  std::string dump_vga;
};

int cmd_run(const RunArgs& a) {
  mpsoc_session* s = nullptr;
  auto st = mpsoc_session_create(a.config.empty() ? nullptr : a.config.c_str(),
                                 a.timing.empty() ? nullptr : a.timing.c_str(), &s);
  if (st != MPSOC_OK) return report_failure(st);

  auto finish = [&](mpsoc_status status) {
    const int rc = status == MPSOC_OK ? 0 : report_failure(status);
    mpsoc_session_destroy(s);
    return rc;
  };

  if (!a.workload.empty() && !a.images.empty()) {
    std::fprintf(stderr, "mpsoc: --image and --workload are mutually exclusive\n");
    mpsoc_session_destroy(s);
    return 2;
  }
  if (!a.workload.empty()) {
    if ((st = mpsoc_session_load_workload(s, a.workload.c_str())) != MPSOC_OK) return finish(st);
  } else if (a.images.size() == 1) {
    if ((st = mpsoc_session_load_image(s, -1, a.images[0].c_str())) != MPSOC_OK) return finish(st);
  } else {
    for (std::size_t i = 0; i < a.images.size(); ++i) {
      if ((st = mpsoc_session_load_image(s, static_cast<int>(i), a.images[i].c_str())) != MPSOC_OK) return finish(st);
    }
  }
  if (!a.trace.empty() && (st = mpsoc_session_set_trace(s, a.trace.c_str())) != MPSOC_OK) return finish(st);
  if (!a.dump_vga.empty() && (st = mpsoc_session_set_vga_dump(s, a.dump_vga.c_str())) != MPSOC_OK) return finish(st);

  mpsoc_run_report rep;
  if ((st = mpsoc_session_run(s, a.engine.c_str(), a.max_cycles, &rep)) != MPSOC_OK) return finish(st);
  char* text = nullptr;
  if ((st = mpsoc_session_report_text(s, &text)) != MPSOC_OK) return finish(st);
  std::fputs(text, stdout);
  mpsoc_string_free(text);
  return finish(MPSOC_OK);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-level MPSoC virtual platform"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one workload or image under one engine");
  run_cmd->add_option("--engine", run.engine, "caba, iss, pvt or native")->capture_default_str();
  run_cmd->add_option("--config", run.config, "Platform config file");
  run_cmd->add_option("--timing", run.timing, "Timing table file");
  run_cmd->add_option("--image", run.images, "Image file; one for all CPUs or one per CPU in order");
  run_cmd->add_option("--workload", run.workload, "Built-in workload, e.g. \"life generations=10\"");
  run_cmd->add_option("--max-cycles", run.max_cycles, "Stop after this many clock cycles (0 = no limit)");
  run_cmd->add_option("--trace", run.trace, "Write the kernel dispatch trace here");
  run_cmd->add_option("--dump-vga", run.dump_vga, "Directory for PGM frame dumps");

  std::string bench_config;
  std::string bench_csv;
  unsigned bench_repeat = 1;
  auto* bench_cmd = app.add_subcommand("bench", "Run every workload under every engine");
  bench_cmd->add_option("--config", bench_config, "Platform config file")->required();
  bench_cmd->add_option("--out-csv", bench_csv, "Write results as CSV");
  bench_cmd->add_option("--repeat", bench_repeat, "Runs per engine; the fastest wall time is kept")
      ->check(CLI::PositiveNumber);

  std::string asm_in;
  std::string asm_out;
  auto* asm_cmd = app.add_subcommand("asm", "Assemble a source file into an image file");
  asm_cmd->add_option("source", asm_in, "Assembly source")->required();
  asm_cmd->add_option("-o,--output", asm_out, "Image file")->required();

  std::string disasm_in;
  auto* disasm_cmd = app.add_subcommand("disasm", "Print a reassemblable listing of an image file");
  disasm_cmd->add_option("image", disasm_in, "Image file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*run_cmd) return cmd_run(run);

  if (*bench_cmd) {
    char* table = nullptr;
    const auto st = mpsoc_bench(bench_config.c_str(), bench_csv.empty() ? nullptr : bench_csv.c_str(), bench_repeat, &table);
    if (st != MPSOC_OK) return report_failure(st);
    std::fputs(table, stdout);
    mpsoc_string_free(table);
    return 0;
  }

  if (*asm_cmd) {
    const auto st = mpsoc_assemble_file(asm_in.c_str(), asm_out.c_str());
    return st == MPSOC_OK ? 0 : report_failure(st);
  }

  if (*disasm_cmd) {
    char* text = nullptr;
    const auto st = mpsoc_disassemble_file(disasm_in.c_str(), &text);
    if (st != MPSOC_OK) return report_failure(st);
    std::fputs(text, stdout);
    mpsoc_string_free(text);
    return 0;
  }
  return 2;
}
