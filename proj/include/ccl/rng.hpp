#pragma once

#include <cstdint>
#include <random>

namespace ccl {

using Engine = std::mt19937_64;

/// Identifies one independent random stream. Every (seed, scenario, n,
/// batch) tuple seeds its own engine, so results never depend on which
/// worker runs a batch.
struct SeedStream {
  std::uint64_t seed = 0;
  std::uint64_t scenario = 0;
  std::uint64_t n = 0;
  std::uint64_t batch = 0;

  SeedStream with_batch(std::uint64_t b) const { return {seed, scenario, n, b}; }
  SeedStream with_n(std::uint64_t m) const { return {seed, scenario, m, batch}; }

  Engine engine() const {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(scenario), hi(scenario),
                      lo(n),    hi(n),    lo(batch),    hi(batch)};
    return Engine(seq);
  }
};

/// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(Engine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

}  // namespace ccl
