#include "speckstack/pipeline.hpp"

#include <algorithm>

#include "speckstack/error.hpp"
#include "speckstack/io.hpp"

namespace speckstack {

Observed load_observed(std::string_view bytes, const QuantizerSpec& spec)
{
    auto loaded = decode_image(bytes);
    Observed out;
    if (auto* q = std::get_if<QuantizedImage>(&loaded)) {
        out.original = to_float(*q);
        out.quantized.spec.levels = q->levels();
        out.quantized.spec.clip_percentile = 100.0;
        out.quantized.spec.lo = 0.0;
        out.quantized.spec.hi = static_cast<double>(q->levels());
        out.quantized.image = std::move(*q);
        return out;
    }
    out.original = std::move(std::get<FloatImage>(loaded));
    out.quantized = quantize(out.original, spec);
    return out;
}

QuantizedImage quantize_like(const FloatImage& img, const QuantizerSpec& reference)
{
    if (!reference.has_bounds())
        throw DomainError("reference quantizer has no recorded bounds");
    return quantize(img, reference).image;
}

MetricsReport compare_quality(const QuantizedImage& filtered, const QuantizedImage& reference)
{
    if (!filtered.same_shape(reference))
        throw DomainError("images differ in shape");
    const FloatImage x = to_float(filtered);
    const FloatImage y = to_float(reference);
    MetricsReport report;
    try {
        const QIndex q = q_index(x, y);
        report.q_index = q.value;
        report.q_degenerate_blocks = q.degenerate_blocks;
    } catch (const UndefinedMetricError&) {
        constexpr int block = 8;
        report.q_degenerate_blocks =
            static_cast<std::size_t>(std::max(0, x.width() - block + 1))
            * static_cast<std::size_t>(std::max(0, x.height() - block + 1));
    }
    try {
        report.beta_index = beta_index(x, y);
    } catch (const UndefinedMetricError&) {
    }
    return report;
}

}  // namespace speckstack
