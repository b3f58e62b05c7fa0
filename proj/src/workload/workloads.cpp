#include "workload/workloads.hpp"

#include <fmt/format.h>

#include <array>
#include <map>
#include <mutex>
#include <stdexcept>

#include "assembly/assembler.hpp"
#include "common/error.hpp"
#include "common/text.hpp"
#include "dev/devices.hpp"

namespace mpsoc::workload {

namespace detail {
// Generated from programs/ at configure time.
extern const std::string_view kAdderSource;
extern const std::string_view kLifeSource;
extern const std::string_view kStressSource;
extern const std::string_view kTimerIrqSource;
extern const std::string_view kLifeSeed;
}  // namespace detail

std::uint32_t layout::cell_address(std::uint32_t sram_base, bool buffer_b, unsigned row, unsigned col) {
  return sram_base + (buffer_b ? kGridB : kGridA) + row * kGridSize + col;
}

// ---------------------------------------------------------------------------
// Game of Life

LifeGrid::LifeGrid(unsigned w, unsigned h) : width(w), height(h), cells(std::size_t{w} * h, 0) {}

std::size_t LifeGrid::population() const {
  std::size_t n = 0;
  for (auto c : cells) n += c;
  return n;
}

LifeGrid LifeGrid::parse(std::string_view text) {
  std::vector<std::string_view> rows;
  for (auto l : text::split_lines(text)) {
    l = text::trim(l);
    if (!l.empty()) rows.push_back(l);
  }
  if (rows.size() < 3) throw ConfigError("life grid needs at least 3 rows");
  LifeGrid g(static_cast<unsigned>(rows[0].size()), static_cast<unsigned>(rows.size()));
  if (g.width < 3) throw ConfigError("life grid needs at least 3 columns");
  for (unsigned r = 0; r < g.height; ++r) {
    if (rows[r].size() != g.width) throw ConfigError(fmt::format("life grid row {} has the wrong length", r + 1));
    for (unsigned c = 0; c < g.width; ++c) {
      const char ch = rows[r][c];
      if (ch != '.' && ch != '#') throw ConfigError(fmt::format("life grid row {}: unexpected '{}'", r + 1, ch));
      g.set(r, c, ch == '#');
    }
  }
  return g;
}

std::string LifeGrid::to_text() const {
  std::string s;
  for (unsigned r = 0; r < height; ++r) {
    for (unsigned c = 0; c < width; ++c) s += at(r, c) ? '#' : '.';
    s += '\n';
  }
  return s;
}

LifeGrid LifeGrid::random(unsigned w, unsigned h, std::uint64_t seed, double density) {
  LifeGrid g(w, h);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution alive(density);
  for (auto& c : g.cells) c = alive(rng) ? 1 : 0;
  return g;
}

LifeGrid life_step(const LifeGrid& g) {
  LifeGrid next(g.width, g.height);
  for (unsigned r = 0; r < g.height; ++r) {
    for (unsigned c = 0; c < g.width; ++c) {
      int n = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const unsigned rr = static_cast<unsigned>(static_cast<int>(r + g.height) + dr) % g.height;
          const unsigned cc = static_cast<unsigned>(static_cast<int>(c + g.width) + dc) % g.width;
          n += g.at(rr, cc) ? 1 : 0;
        }
      }
      next.set(r, c, n == 3 || (n == 2 && g.at(r, c)));
    }
  }
  return next;
}

LifeGrid life_oracle(const LifeGrid& g, unsigned generations) {
  LifeGrid cur = g;
  for (unsigned i = 0; i < generations; ++i) cur = life_step(cur);
  return cur;
}

std::uint32_t adder_oracle(std::uint64_t n) {
  if (n > 0xFFFFFFFFull) throw std::overflow_error("adder: n too large");
  const std::uint64_t s = n * (n + 1) / 2;
  if (s > 0xFFFFFFFFull) throw std::overflow_error(fmt::format("adder: sum 1..{} does not fit 32 bits", n));
  return static_cast<std::uint32_t>(s);
}

std::vector<std::uint8_t> render_frame(const LifeGrid& g) {
  std::vector<std::uint8_t> px(dev::VgaDevice::kFrameBytes, 0);
  for (unsigned r = 0; r < g.height; ++r) {
    for (unsigned c = 0; c < g.width; ++c) {
      if (!g.at(r, c)) continue;
      for (unsigned y = 0; y < layout::kCellPixels; ++y) {
        for (unsigned x = 0; x < layout::kCellPixels; ++x) {
          const unsigned row = r * layout::kCellPixels + y;
          const unsigned col = c * layout::kCellPixels + x;
          if (row < dev::VgaDevice::kHeight && col < dev::VgaDevice::kWidth) {
            px[std::size_t{row} * dev::VgaDevice::kWidth + col] = 255;
          }
        }
      }
    }
  }
  return px;
}

// ---------------------------------------------------------------------------
// Programs

std::string_view program_source(std::string_view name) {
  if (name == "adder") return detail::kAdderSource;
  if (name == "life") return detail::kLifeSource;
  if (name == "stress") return detail::kStressSource;
  if (name == "timer_irq") return detail::kTimerIrqSource;
  throw ConfigError(fmt::format("unknown workload '{}'", name));
}

std::vector<std::string> program_names() { return {"adder", "life", "stress", "timer_irq"}; }

const assembly::Image& program_image(std::string_view name) {
  static std::mutex mu;
  static std::map<std::string, assembly::Image, std::less<>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(std::string(name), assembly::assemble(program_source(name))).first;
  return it->second;
}

const LifeGrid& default_seed() {
  static const LifeGrid g = LifeGrid::parse(detail::kLifeSeed);
  return g;
}

std::pair<unsigned, unsigned> row_split(unsigned rows, unsigned cpus, unsigned cpu) {
  return {rows * cpu / cpus, rows * (cpu + 1) / cpus};
}

assembly::Image specialise(const assembly::Image& img, unsigned cpu, unsigned cpu_count) {
  assembly::Image out = img;
  const auto [begin, end] = row_split(layout::kGridSize, cpu_count, cpu);
  const std::pair<const char*, std::uint32_t> words[] = {
      {"cpu_id", cpu}, {"cpu_count", cpu_count}, {"row_begin", begin}, {"row_end", end}};
  for (const auto& [name, value] : words) {
    if (auto a = out.symbol(name)) out.set_word(*a, value);
  }
  return out;
}

LifeGrid life_seed(const engine::WorkloadSpec& spec) {
  const auto seed = spec.param("seed", -1);
  if (seed < 0) return default_seed();
  return LifeGrid::random(layout::kGridSize, layout::kGridSize, static_cast<std::uint64_t>(seed));
}

namespace {

std::uint32_t param_u32(const engine::WorkloadSpec& spec, const char* key, std::int64_t fallback) {
  const auto v = spec.param(key, fallback);
  if (v < 0 || v > 0xFFFFFFFFll) throw ConfigError(fmt::format("workload {}: {} out of range", spec.name, key));
  return static_cast<std::uint32_t>(v);
}

void patch(assembly::Image& img, const char* symbol, std::uint32_t value) {
  const auto a = img.symbol(symbol);
  if (!a) throw ConfigError(fmt::format("program lacks symbol '{}'", symbol));
  img.set_word(*a, value);
}

engine::NativeTask native_adder(std::uint32_t sram, std::uint32_t n) {
  return [sram, n](engine::NativeIo& io) {
    if (io.cpu_id() != 0) return;
    std::uint32_t sum = 0;
    for (std::uint32_t i = n; i > 0; --i) sum += i;
    io.write32(sram + layout::kAdderResult, sum);
  };
}

/// Host version of life.s: same rule and barrier, but rows are copied into a
/// sliding three-row window so each source row crosses the bus once per pass.
engine::NativeTask native_life(std::uint32_t sram, std::uint32_t generations) {
  return [sram, generations](engine::NativeIo& io) {
    constexpr unsigned n = layout::kGridSize;
    using Row = std::array<std::uint8_t, n>;
    const unsigned id = io.cpu_id();
    const unsigned cpus = io.cpu_count();
    const auto [begin, end] = row_split(n, cpus, id);
    std::uint32_t src = sram + layout::kGridA;
    std::uint32_t dst = sram + layout::kGridB;
    const std::uint32_t flags = sram + layout::kBarrier;
    auto load = [&](Row& row, unsigned r) {
      for (unsigned c = 0; c < n; ++c) row[c] = io.read8(src + (r % n) * n + c);
    };
    for (std::uint32_t gen = 0; gen < generations; ++gen) {
      if (begin < end) {
        Row up{}, mid{}, down{};
        load(up, begin + n - 1);
        load(mid, begin);
        for (unsigned r = begin; r < end; ++r) {
          load(down, r + 1);
          for (unsigned c = 0; c < n; ++c) {
            const unsigned cl = (c + n - 1) % n;
            const unsigned cr = (c + 1) % n;
            const unsigned sum =
                up[cl] + up[c] + up[cr] + mid[cl] + mid[cr] + down[cl] + down[c] + down[cr];
            io.write8(dst + r * n + c, (sum | mid[c]) == 3 ? 1 : 0);
          }
          up = mid;
          mid = down;
        }
      }
      std::swap(src, dst);
      io.write32(flags + 4 * id, gen + 1);
      for (unsigned j = 0; j < cpus; ++j) {
        while (static_cast<std::int32_t>(io.read32(flags + 4 * j) - (gen + 1)) < 0) {
        }
      }
    }
  };
}

engine::NativeTask native_stress(std::uint32_t sram, std::uint32_t iterations) {
  return [sram, iterations](engine::NativeIo& io) {
    const std::uint32_t base = sram + (io.cpu_id() << 8);
    for (std::uint32_t i = 0; i < iterations; ++i) {
      for (std::uint32_t k = 0; k < 56; k += 8) io.write32(base + k + 4, io.read32(base + k));
      io.write32(base + 56, io.read32(base + 56) + 1);
    }
  };
}

}  // namespace

std::vector<engine::NativeTask> prepare(engine::Platform& p, const engine::WorkloadSpec& spec, engine::Mode mode) {
  const std::uint32_t sram = p.sram_region().base;
  const unsigned cpus = p.cpu_count();
  const assembly::Image& base = program_image(spec.name);
  std::vector<engine::NativeTask> tasks;

  std::vector<assembly::Image> images;
  for (unsigned i = 0; i < cpus; ++i) images.push_back(specialise(base, i, cpus));

  if (spec.name == "life") {
    const auto gens = param_u32(spec, "generations", 10);
    const LifeGrid seed = life_seed(spec);
    if (seed.width != layout::kGridSize || seed.height != layout::kGridSize) {
      throw ConfigError(fmt::format("guest Game of Life is {0}x{0}", layout::kGridSize));
    }
    for (unsigned r = 0; r < seed.height; ++r) {
      for (unsigned c = 0; c < seed.width; ++c) p.poke(layout::cell_address(sram, false, r, c), seed.at(r, c), 1);
    }
    p.poke(sram + layout::kParam, gens);
    p.poke(sram + layout::kRenderFlag, param_u32(spec, "render", 0));
    if (mode == engine::Mode::native) tasks.assign(cpus, native_life(sram, gens));
  } else if (spec.name == "adder") {
    const auto n = param_u32(spec, "n", 100);
    p.poke(sram + layout::kParam, n);
    if (mode == engine::Mode::native) tasks.assign(cpus, native_adder(sram, n));
  } else if (spec.name == "stress") {
    const auto iterations = param_u32(spec, "iterations", 1000);
    if (iterations == 0) throw ConfigError("stress: iterations must be >= 1");
    for (auto& img : images) patch(img, "iterations", iterations);
    if (mode == engine::Mode::native) tasks.assign(cpus, native_stress(sram, iterations));
  } else if (spec.name == "timer_irq") {
    if (mode == engine::Mode::native) throw ConfigError("timer_irq has no native version");
    for (auto& img : images) {
      patch(img, "period", param_u32(spec, "period", 200));
      patch(img, "ticks", param_u32(spec, "ticks", 5));
    }
  } else {
    throw ConfigError(fmt::format("unknown workload '{}'", spec.name));
  }

  for (unsigned i = 0; i < cpus; ++i) p.load_image(i, images[i]);
  return tasks;
}

LifeGrid read_life_result(const engine::Platform& p, unsigned generations) {
  const std::uint32_t sram = p.sram_region().base;
  LifeGrid g(layout::kGridSize, layout::kGridSize);
  const bool in_b = generations % 2 == 1;
  for (unsigned r = 0; r < g.height; ++r) {
    for (unsigned c = 0; c < g.width; ++c) g.set(r, c, p.peek(layout::cell_address(sram, in_b, r, c), 1) != 0);
  }
  return g;
}

std::uint32_t read_adder_result(const engine::Platform& p) {
  return p.peek(p.sram_region().base + layout::kAdderResult);
}

std::vector<std::uint8_t> output_region(const engine::Platform& p, const engine::WorkloadSpec& spec) {
  const std::uint32_t sram = p.sram_region().base;
  if (spec.name == "life") {
    const auto gens = spec.param("generations", 10);
    return p.read_bytes(sram + (gens % 2 == 1 ? layout::kGridB : layout::kGridA), layout::kGridSize * layout::kGridSize);
  }
  if (spec.name == "adder") return p.read_bytes(sram + layout::kAdderResult, 4);
  if (spec.name == "stress") return p.read_bytes(sram, 256 * p.cpu_count());
  if (spec.name == "timer_irq") return p.read_bytes(sram + layout::kIrqOut, 4);
  throw ConfigError(fmt::format("unknown workload '{}'", spec.name));
}

}  // namespace mpsoc::workload
