#include "speckstack/phantom.hpp"

#include <array>
#include <string>

#include "speckstack/g0.hpp"

namespace speckstack {

namespace {

constexpr std::array kStripWidths{1, 2, 3, 5, 7, 9};
constexpr int kStripGap = 16;
constexpr int kMargin = 16;
constexpr int kPointColumn0 = 144;
constexpr int kPointSpacingX = 20;
constexpr int kPointSpacingY = 24;

}  // namespace

std::vector<std::pair<int, int>> strip_columns()
{
    std::vector<std::pair<int, int>> cols;
    int x = kMargin;
    for (int w : kStripWidths) {
        cols.emplace_back(x, x + w);
        x += w + kStripGap;
    }
    return cols;
}

LabelMap strips_and_points_mask(int width, int height)
{
    if (width < 240 || height < 112)
        throw DomainError("strips-and-points phantom needs at least 240x112 pixels");
    LabelMap mask(width, height, 0);
    for (auto [x0, x1] : strip_columns()) {
        for (int y = kMargin; y < height - kMargin; ++y) {
            for (int x = x0; x < x1; ++x)
                mask(x, y) = 1;
        }
    }
    for (int j = 0; j < 5; ++j) {
        for (int i = 0; i < 5; ++i)
            mask(kPointColumn0 + kPointSpacingX * i, height / 2 + kPointSpacingY * (j - 2)) = 1;
    }
    return mask;
}

Phantom make_phantom(const PhantomSpec& spec)
{
    Rng rng(spec.seed);
    return make_phantom(spec, rng);
}

Phantom make_phantom(const PhantomSpec& spec, Rng& rng)
{
    if (spec.regions.size() != 2)
        throw DomainError("phantom needs exactly 2 regions, got "
                          + std::to_string(spec.regions.size()));
    if (spec.width < 2 || spec.height < 1)
        throw DomainError("phantom too small");

    std::vector<G0Params> laws;
    for (const auto& r : spec.regions)
        laws.push_back(g0_with_mean(r.alpha, r.looks, r.mean));

    Phantom out;
    if (spec.kind == PhantomKind::TwoRegionVertical) {
        out.labels = LabelMap(spec.width, spec.height, 0);
        for (int y = 0; y < spec.height; ++y) {
            for (int x = spec.width / 2; x < spec.width; ++x)
                out.labels(x, y) = 1;
        }
    } else {
        out.labels = strips_and_points_mask(spec.width, spec.height);
    }

    out.noisy = FloatImage(spec.width, spec.height);
    out.ideal = FloatImage(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            const int region = out.labels(x, y);
            out.ideal(x, y) = spec.regions[region].mean;
            out.noisy(x, y) = sample_g0(laws[region], rng);
        }
    }
    return out;
}

}  // namespace speckstack
