#pragma once

#include <cstdint>
#include <vector>

#include "speckstack/image.hpp"
#include "speckstack/rng.hpp"

namespace speckstack {

enum class PhantomKind { TwoRegionVertical, StripsAndPoints };

/// One region of a phantom; its G0 scale is mean * gamma_star(alpha, looks).
struct PhantomRegion {
    double alpha = -10.0;
    double looks = 1.0;
    double mean = 1.0;
};

/// Two-region: region 0 is the left half (columns < width / 2), region 1
/// the right half. Strips-and-points: region 0 is the background, region 1
/// the strips and points.
struct PhantomSpec {
    PhantomKind kind = PhantomKind::TwoRegionVertical;
    int width = 128;
    int height = 128;
    std::vector<PhantomRegion> regions;
    std::uint64_t seed = 0;
};

struct Phantom {
    FloatImage noisy;
    FloatImage ideal;
    LabelMap labels;
};

/// Fixed strips-and-points mask (1 = strip or point, 0 = background).
///
/// Vertical strips of widths 1, 2, 3, 5, 7 and 9 px, separated by 16 px of
/// background and starting at column 16, span rows [16, height - 16). A 5x5
/// grid of single-pixel points sits at columns 144 + 20 i and rows
/// height / 2 + 24 (j - 2). Requires width >= 240 and height >= 112.
LabelMap strips_and_points_mask(int width, int height);

/// Column range [first, last) of each strip, left to right.
std::vector<std::pair<int, int>> strip_columns();

Phantom make_phantom(const PhantomSpec& spec);
Phantom make_phantom(const PhantomSpec& spec, Rng& rng);

}  // namespace speckstack
