#pragma once

#include "speckstack/image.hpp"

namespace speckstack {

/// Local-statistics speckle filter parameters. The noise coefficient of
/// variation is Cu = 1 / sqrt(looks).
struct SpeckleFilterParams {
    int window = 7;
    double looks = 1.0;
    double damping = 1.0;

    void validate() const;
};

/// Lee: m + W (z - m), W = max(0, 1 - Cu^2 / Cz^2), with m and Cz the
/// window mean and coefficient of variation. Replicate-edge borders.
FloatImage lee_filter(const FloatImage& img, const SpeckleFilterParams& params);

/// Frost: window average weighted by exp(-K Cz^2 d), d the Euclidean
/// distance to the center, weights normalized to sum 1.
FloatImage frost_filter(const FloatImage& img, const SpeckleFilterParams& params);

/// Plain window average, used as a smoothing yardstick.
FloatImage boxcar_filter(const FloatImage& img, int window);

}  // namespace speckstack
