#include "speckstack/rng.hpp"

#include <cmath>

#include "speckstack/error.hpp"

namespace speckstack {

double Rng::uniform()
{
    // 53 random mantissa bits, shifted by half an ulp so 0 is never produced.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

double Rng::gamma(double shape)
{
    if (!(shape > 0.0))
        throw DomainError("gamma shape must be positive");
    if (shape < 1.0) {
        // Boost to shape + 1 and rescale by U^(1/shape).
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z, v;
        do {
            z = normal();
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double z2 = z * z;
        if (u < 1.0 - 0.0331 * z2 * z2)
            return d * v;
        if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v)))
            return d * v;
    }
}

std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix_seed(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace speckstack
