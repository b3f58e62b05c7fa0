#include "harness/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "common/error.hpp"
#include "common/text.hpp"
#include "workload/workloads.hpp"

namespace mpsoc::harness {

double speedup(double wall_ref, double wall_x) {
  if (!(wall_ref > 0) || !(wall_x > 0)) {
    throw MeasurementError(fmt::format("speed-up needs positive wall times (ref {}, x {})", wall_ref, wall_x));
  }
  return wall_ref / wall_x;
}

double precision_error(std::uint64_t sim_x, std::uint64_t sim_ref) {
  if (sim_ref == 0) throw MeasurementError("precision error needs a non-zero reference time");
  const double diff = sim_x > sim_ref ? static_cast<double>(sim_x - sim_ref) : static_cast<double>(sim_ref - sim_x);
  return diff / static_cast<double>(sim_ref) * 100.0;
}

double bus_wall_share(const engine::RunReport& report) {
  auto it = report.component_wall_share.find("bus");
  if (it == report.component_wall_share.end()) throw MeasurementError("report has no bus wall-time share");
  return it->second;
}

WorkloadRun run_workload(const engine::PlatformConfig& cfg, const engine::WorkloadSpec& spec, engine::Mode mode,
                         const engine::RunOptions& options) {
  engine::Platform p(cfg);
  auto tasks = workload::prepare(p, spec, mode);
  WorkloadRun out;
  out.report = engine::run(p, mode, options, tasks);
  out.output = workload::output_region(p, spec);
  return out;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return std::isnan(v) ? "nan" : fmt::format("{:.6g}", v); }

double parse_num(std::string_view s) {
  if (s == "nan") return kNaN;
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("CSV: bad number '{}'", s));
  }
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto k = line.find(',', start);
    out.push_back(line.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

}  // namespace

std::string ExperimentResult::csv() const {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    if (r.failed) {
      out += fmt::format("{},{},nan,nan,nan,nan\n", r.workload, engine::to_string(r.mode));
    } else {
      out += fmt::format("{},{},{},{},{},{}\n", r.workload, engine::to_string(r.mode), num(r.speedup),
                         num(r.precision_pct), num(r.wall_s), r.sim_ns);
    }
  }
  return out;
}

ExperimentResult ExperimentResult::parse_csv(std::string_view text) {
  const auto lines = text::split_lines(text);
  if (lines.empty() || text::trim(lines[0]) != kCsvHeader) throw ConfigError("CSV: missing header");
  ExperimentResult res;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() != 6) throw ConfigError(fmt::format("CSV line {}: expected 6 fields", i + 1));
    ResultRow r;
    r.workload = std::string(f[0]);
    const auto m = engine::parse_mode(f[1]);
    if (!m) throw ConfigError(fmt::format("CSV line {}: unknown mode '{}'", i + 1, f[1]));
    r.mode = *m;
    if (f[5] == "nan") {
      r.failed = true;
      r.speedup = r.precision_pct = r.wall_s = kNaN;
    } else {
      r.speedup = parse_num(f[2]);
      r.precision_pct = parse_num(f[3]);
      r.wall_s = parse_num(f[4]);
      const auto ns = text::parse_int(f[5]);
      if (!ns || *ns < 0) throw ConfigError(fmt::format("CSV line {}: bad sim_ns", i + 1));
      r.sim_ns = static_cast<std::uint64_t>(*ns);
    }
    res.rows.push_back(r);
  }
  return res;
}

std::string ExperimentResult::table() const {
  std::string out = fmt::format("{:<10} {:<7} {:>10} {:>12} {:>12} {:>14}\n", "workload", "mode", "speedup",
                                "precision_%", "wall_s", "sim_ns");
  for (const auto& r : rows) {
    if (r.failed) {
      out += fmt::format("{:<10} {:<7} FAILED: {}\n", r.workload, engine::to_string(r.mode), r.error);
      continue;
    }
    out += fmt::format("{:<10} {:<7} {:>10} {:>12} {:>12} {:>14}\n", r.workload, engine::to_string(r.mode),
                       num(r.speedup), num(r.precision_pct), num(r.wall_s), r.sim_ns);
  }
  return out;
}

ExperimentResult run_experiment(const engine::PlatformConfig& cfg, const ExperimentOptions& opt) {
  cfg.validate();
  if (cfg.workloads.empty()) throw ConfigError("no workloads configured");
  for (const auto& w : cfg.workloads) workload::program_source(w.name);  // unknown names fail before any run
  if (opt.repeat < 1) throw ConfigError("repeat must be >= 1");

  // The reference engine runs first for every workload.
  std::vector<engine::Mode> order{engine::Mode::caba};
  for (auto m : cfg.engines) {
    if (m != engine::Mode::caba && std::find(order.begin(), order.end(), m) == order.end()) order.push_back(m);
  }
  const bool caba_requested = std::find(cfg.engines.begin(), cfg.engines.end(), engine::Mode::caba) != cfg.engines.end();

  ExperimentResult res;
  for (const auto& spec : cfg.workloads) {
    std::optional<engine::RunReport> ref;
    for (auto mode : order) {
      ResultRow row;
      row.workload = spec.name;
      row.mode = mode;
      engine::RunReport best;
      try {
        for (unsigned k = 0; k < opt.repeat; ++k) {
          auto r = run_workload(cfg, spec, mode).report;
          if (k == 0) {
            best = std::move(r);
          } else {
            best.wall_seconds = std::min(best.wall_seconds, r.wall_seconds);
          }
        }
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
        row.speedup = row.precision_pct = row.wall_s = kNaN;
        if (mode != engine::Mode::caba || caba_requested) {
          res.rows.push_back(row);
          res.reports.emplace_back();
        }
        continue;
      }
      if (mode == engine::Mode::caba) ref = best;
      row.wall_s = best.wall_seconds;
      row.sim_ns = best.sim_ns;
      row.speedup = kNaN;
      row.precision_pct = kNaN;
      if (ref) {
        if (mode == engine::Mode::caba) {
          row.speedup = 1.0;
          row.precision_pct = 0.0;
        } else {
          try {
            row.speedup = speedup(ref->wall_seconds, best.wall_seconds);
          } catch (const MeasurementError&) {
          }
          try {
            row.precision_pct = precision_error(best.sim_ns, ref->sim_ns);
          } catch (const MeasurementError&) {
          }
        }
      }
      if (mode != engine::Mode::caba || caba_requested) {
        res.rows.push_back(row);
        res.reports.push_back(best);
      }
    }
  }
  return res;
}

ExperimentResult run_experiment(const std::filesystem::path& config_path, const ExperimentOptions& opt) {
  return run_experiment(engine::PlatformConfig::load(config_path), opt);
}

}  // namespace mpsoc::harness
