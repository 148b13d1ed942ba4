#include "speckstack/image.hpp"

#include <string>

namespace speckstack {

namespace {

void check_levels(int levels)
{
    if (levels < 1 || levels > 65535)
        throw DomainError("levels must be in [1, 65535], got " + std::to_string(levels));
}

}  // namespace

QuantizedImage::QuantizedImage(int width, int height, int levels, std::uint16_t fill)
    : data_(width, height, fill), levels_(levels)
{
    check_levels(levels);
    if (fill > levels)
        throw DomainError("fill value exceeds levels");
}

QuantizedImage::QuantizedImage(Image<std::uint16_t> data, int levels)
    : data_(std::move(data)), levels_(levels)
{
    check_levels(levels);
    for (auto v : data_.pixels()) {
        if (v > levels)
            throw DomainError("pixel value " + std::to_string(v) + " exceeds levels "
                              + std::to_string(levels));
    }
}

void QuantizedImage::set(int x, int y, int value)
{
    if (value < 0 || value > levels_)
        throw DomainError("gray level out of range: " + std::to_string(value));
    data_(x, y) = static_cast<std::uint16_t>(value);
}

FloatImage to_float(const QuantizedImage& img)
{
    FloatImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    std::copy(src.begin(), src.end(), dst.begin());
    return out;
}

}  // namespace speckstack
