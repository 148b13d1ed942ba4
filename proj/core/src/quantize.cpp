#include "speckstack/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "speckstack/roi.hpp"

namespace speckstack {

void QuantizerSpec::validate() const
{
    if (levels < 1 || levels > 65535)
        throw DomainError("quantizer levels must be in [1, 65535]");
    if (!(clip_percentile > 50.0 && clip_percentile <= 100.0))
        throw DomainError("clip percentile must be in (50, 100]");
    if (lo.has_value() != hi.has_value())
        throw DomainError("quantizer bounds must be given together");
}

double percentile(const FloatImage& img, double pct)
{
    std::vector<double> values(img.pixels().begin(), img.pixels().end());
    return quantile(std::move(values), pct / 100.0);
}

Quantized quantize(const FloatImage& img, const QuantizerSpec& spec)
{
    spec.validate();
    if (img.empty())
        throw DomainError("cannot quantize an empty image");
    Quantized out;
    out.spec = spec;
    if (!spec.has_bounds()) {
        out.spec.lo = 0.0;
        out.spec.hi = percentile(img, spec.clip_percentile);
    }
    const double lo = *out.spec.lo;
    const double hi = *out.spec.hi;
    const auto [min_it, max_it] = std::minmax_element(img.pixels().begin(), img.pixels().end());
    const bool constant = !spec.has_bounds() && *min_it == *max_it;
    Image<std::uint16_t> levels(img.width(), img.height(), 0);
    if (!(hi > lo) || constant) {
        out.warning = "image has no dynamic range between quantizer bounds; all pixels map to 0";
        out.image = QuantizedImage(std::move(levels), spec.levels);
        return out;
    }
    const double scale = static_cast<double>(spec.levels) / (hi - lo);
    auto dst = levels.pixels();
    auto src = img.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double t = std::clamp((src[i] - lo) * scale, 0.0, static_cast<double>(spec.levels));
        dst[i] = static_cast<std::uint16_t>(std::lround(t));
    }
    out.image = QuantizedImage(std::move(levels), spec.levels);
    return out;
}

FloatImage dequantize(const QuantizedImage& img, const QuantizerSpec& spec)
{
    if (!spec.has_bounds())
        throw DomainError("dequantize needs recorded quantizer bounds");
    if (img.levels() != spec.levels)
        throw DomainError("image levels do not match the quantizer");
    const double lo = *spec.lo;
    const double step = (*spec.hi - lo) / spec.levels;
    FloatImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = lo + src[i] * step;
    return out;
}

}  // namespace speckstack
