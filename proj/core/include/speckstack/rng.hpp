#pragma once

#include <cstdint>
#include <random>

namespace speckstack {

/// Seeded random source with distribution code owned by this library, so
/// streams are identical across standard-library implementations (the
/// std:: distributions are implementation-defined; the engine is not).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform();

    /// Standard normal (Marsaglia polar method).
    double normal();

    /// Gamma(shape, scale = 1), Marsaglia-Tsang squeeze method.
    double gamma(double shape);

  private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Seed of replication `index` under `master`:
/// mix_seed(master + (index + 1) * 0x9E3779B97F4A7C15).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace speckstack
