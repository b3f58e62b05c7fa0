#pragma once

// Guest programs, their native counterparts, host oracles and the fixed
// SRAM layout they share.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "assembly/image.hpp"
#include "engine/config.hpp"
#include "engine/engine.hpp"
#include "engine/platform.hpp"

namespace mpsoc::workload {

/// Offsets from the SRAM base.
namespace layout {
inline constexpr std::uint32_t kGridA = 0x0000;
inline constexpr std::uint32_t kGridB = 0x4000;
inline constexpr std::uint32_t kBarrier = 0x8000;  // one word per CPU
inline constexpr std::uint32_t kAdderResult = 0x8100;
inline constexpr std::uint32_t kParam = 0x8104;  // generations or n
inline constexpr std::uint32_t kRenderFlag = 0x8108;
inline constexpr std::uint32_t kIrqOut = 0x8200;  // timer demo: ticks, loop count
inline constexpr std::uint32_t kFramebuffer = 0x10000;
inline constexpr unsigned kGridSize = 16;
inline constexpr unsigned kCellPixels = 24;

/// Guest address of cell (row, col) in buffer A or B.
std::uint32_t cell_address(std::uint32_t sram_base, bool buffer_b, unsigned row, unsigned col);
}  // namespace layout

struct LifeGrid {
  unsigned width = 0;
  unsigned height = 0;
  std::vector<std::uint8_t> cells;  // row-major, 0 or 1

  LifeGrid() = default;
  LifeGrid(unsigned w, unsigned h);

  bool at(unsigned row, unsigned col) const { return cells[std::size_t{row} * width + col] != 0; }
  void set(unsigned row, unsigned col, bool alive) { cells[std::size_t{row} * width + col] = alive ? 1 : 0; }
  std::size_t population() const;

  /// Rows of `.` (dead) and `#` (alive); all rows the same length, >= 3x3.
  static LifeGrid parse(std::string_view text);
  std::string to_text() const;
  static LifeGrid random(unsigned w, unsigned h, std::uint64_t seed, double density = 0.35);

  friend bool operator==(const LifeGrid&, const LifeGrid&) = default;
};

/// Conway rules on a torus, all cells updated together.
LifeGrid life_step(const LifeGrid& g);
LifeGrid life_oracle(const LifeGrid& g, unsigned generations);

/// Sum of 1..n; throws std::overflow_error when it does not fit 32 bits.
std::uint32_t adder_oracle(std::uint64_t n);

/// 640x480 raster that the guest renderer produces for `g`.
std::vector<std::uint8_t> render_frame(const LifeGrid& g);

/// Embedded program sources: "adder", "life", "stress", "timer_irq".
std::string_view program_source(std::string_view name);
const assembly::Image& program_image(std::string_view name);
std::vector<std::string> program_names();
/// The default Game of Life seed grid.
const LifeGrid& default_seed();

/// Rows [begin, end) of `cpu` when `rows` are split over `cpus`.
std::pair<unsigned, unsigned> row_split(unsigned rows, unsigned cpus, unsigned cpu);

/// Copy of `img` with the per-CPU words (cpu_id, cpu_count, row_begin,
/// row_end) patched where the image defines them.
assembly::Image specialise(const assembly::Image& img, unsigned cpu, unsigned cpu_count);

/// Loads images and inputs for `spec` into a fresh platform; in native mode
/// returns the host tasks instead (images are still loaded).
std::vector<engine::NativeTask> prepare(engine::Platform& p, const engine::WorkloadSpec& spec, engine::Mode mode);

/// Seed grid selected by `spec` (`seed=N` for a random grid).
LifeGrid life_seed(const engine::WorkloadSpec& spec);
LifeGrid read_life_result(const engine::Platform& p, unsigned generations);
std::uint32_t read_adder_result(const engine::Platform& p);

/// Bytes of the workload's output region, for cross-engine comparison.
std::vector<std::uint8_t> output_region(const engine::Platform& p, const engine::WorkloadSpec& spec);

}  // namespace mpsoc::workload
