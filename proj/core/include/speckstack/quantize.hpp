#pragma once

#include <optional>
#include <string>

#include "speckstack/image.hpp"

namespace speckstack {

/// Linear map from intensities to {0..levels}: v -> round(levels *
/// clamp((v - lo) / (hi - lo), 0, 1)) with lo = 0 and hi the clip
/// percentile of the image, unless bounds were already recorded.
struct QuantizerSpec {
    int levels = 255;
    double clip_percentile = 99.0;
    std::optional<double> lo;
    std::optional<double> hi;

    void validate() const;
    bool has_bounds() const noexcept { return lo.has_value() && hi.has_value(); }
};

struct Quantized {
    QuantizedImage image;
    QuantizerSpec spec;  // with recorded bounds
    std::optional<std::string> warning;
};

/// A constant image, or one whose bounds collapse, maps to all zeros with a
/// warning.
Quantized quantize(const FloatImage& img, const QuantizerSpec& spec);

/// level -> lo + (level / levels)(hi - lo). Throws DomainError without bounds.
FloatImage dequantize(const QuantizedImage& img, const QuantizerSpec& spec);

/// Linear-interpolation percentile (0..100) of the pixel values.
double percentile(const FloatImage& img, double pct);

}  // namespace speckstack
