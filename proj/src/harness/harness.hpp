#pragma once

// Experiment driver: every configured workload under every engine, caba
// first as the reference, reported as speed-up and precision error.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "engine/config.hpp"
#include "engine/engine.hpp"

namespace mpsoc::harness {

/// wall_ref / wall_x. Throws MeasurementError unless both are > 0.
double speedup(double wall_ref, double wall_x);
/// |sim_x - sim_ref| / sim_ref * 100. Throws MeasurementError for sim_ref = 0.
double precision_error(std::uint64_t sim_x, std::uint64_t sim_ref);
/// Share of host time spent in bus code. Throws MeasurementError when the
/// report has no "bus" entry.
double bus_wall_share(const engine::RunReport& report);

/// One engine run of one workload on a fresh platform.
struct WorkloadRun {
  engine::RunReport report;
  std::vector<std::uint8_t> output;  // workload output region after the run
};

WorkloadRun run_workload(const engine::PlatformConfig& cfg, const engine::WorkloadSpec& spec, engine::Mode mode,
                         const engine::RunOptions& options = {});

struct ResultRow {
  std::string workload;
  engine::Mode mode = engine::Mode::caba;
  double speedup = 0;
  double precision_pct = 0;
  double wall_s = 0;
  std::uint64_t sim_ns = 0;
  bool failed = false;
  std::string error;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<engine::RunReport> reports;  // parallel to rows (empty for failed rows)

  std::string table() const;
  std::string csv() const;
  static ExperimentResult parse_csv(std::string_view text);
};

inline constexpr std::string_view kCsvHeader = "workload,mode,speedup,precision_pct,wall_s,sim_ns";

struct ExperimentOptions {
  /// Runs per engine; the minimum wall time is kept.
  unsigned repeat = 1;
};

ExperimentResult run_experiment(const engine::PlatformConfig& cfg, const ExperimentOptions& opt = {});
ExperimentResult run_experiment(const std::filesystem::path& config_path, const ExperimentOptions& opt = {});

}  // namespace mpsoc::harness
