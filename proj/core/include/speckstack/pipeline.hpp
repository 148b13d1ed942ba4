#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "speckstack/image.hpp"
#include "speckstack/metrics.hpp"
#include "speckstack/quantize.hpp"

namespace speckstack {

/// An input image in both domains: the continuous intensities and the
/// quantized levels the stack filter works on.
struct Observed {
    FloatImage original;
    Quantized quantized;
};

/// PGM input is already quantized and is used as is (bounds 0..maxval).
/// F64 input is quantized with `spec`.
Observed load_observed(std::string_view bytes, const QuantizerSpec& spec);

/// Maps a continuous image onto the levels of `reference` (same bounds).
QuantizedImage quantize_like(const FloatImage& img, const QuantizerSpec& reference);

/// Q and beta of `filtered` against `reference`, both read as gray levels.
/// An undefined index (flat Laplacian, all blocks degenerate) is left empty.
MetricsReport compare_quality(const QuantizedImage& filtered, const QuantizedImage& reference);

}  // namespace speckstack
