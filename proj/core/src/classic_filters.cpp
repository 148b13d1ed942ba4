#include "speckstack/classic_filters.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace speckstack {

void SpeckleFilterParams::validate() const
{
    if (window < 1 || window % 2 == 0)
        throw DomainError("filter window must be odd and positive");
    if (!(looks >= 1.0))
        throw DomainError("looks must be >= 1");
    if (!(damping > 0.0))
        throw DomainError("Frost damping must be positive");
}

namespace {

struct LocalMoments {
    double mean;
    double variance;
    double min;
    double max;
};

// Population mean and variance over the window, replicate-edge borders.
LocalMoments local_moments(const FloatImage& img, int x, int y, int half)
{
    double sum = 0.0;
    double sum_sq = 0.0;
    double lo = img.clamped(x, y);
    double hi = lo;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
            const double v = img.clamped(x + dx, y + dy);
            sum += v;
            sum_sq += v * v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (lo == hi)
        return {lo, 0.0, lo, hi};
    const double count = static_cast<double>((2 * half + 1) * (2 * half + 1));
    const double mean = sum / count;
    const double variance = std::max(0.0, sum_sq / count - mean * mean);
    // Rounding can push the mean a few ulps past the window extremes.
    return {std::clamp(mean, lo, hi), variance, lo, hi};
}

}  // namespace

FloatImage lee_filter(const FloatImage& img, const SpeckleFilterParams& params)
{
    params.validate();
    const int half = params.window / 2;
    const double cu2 = 1.0 / params.looks;
    FloatImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const auto m = local_moments(img, x, y, half);
            if (m.variance <= 0.0 || m.mean <= 0.0) {
                out(x, y) = m.mean;
                continue;
            }
            const double cz2 = m.variance / (m.mean * m.mean);
            const double weight = std::max(0.0, 1.0 - cu2 / cz2);
            out(x, y) = std::clamp(m.mean + weight * (img(x, y) - m.mean), m.min, m.max);
        }
    }
    return out;
}

FloatImage frost_filter(const FloatImage& img, const SpeckleFilterParams& params)
{
    params.validate();
    const int half = params.window / 2;
    // Group offsets by distance so each pixel needs one exp per distinct distance.
    std::map<int, std::vector<std::pair<int, int>>> rings;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx)
            rings[dx * dx + dy * dy].emplace_back(dx, dy);
    }
    std::vector<double> distance;
    std::vector<std::vector<std::pair<int, int>>> offsets;
    for (auto& [d2, ring] : rings) {
        distance.push_back(std::sqrt(static_cast<double>(d2)));
        offsets.push_back(std::move(ring));
    }

    FloatImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const auto m = local_moments(img, x, y, half);
            if (m.min == m.max) {
                out(x, y) = m.min;
                continue;
            }
            const double cz2 = m.mean > 0.0 ? m.variance / (m.mean * m.mean) : 0.0;
            const double decay = params.damping * cz2;
            double weighted = 0.0;
            double total = 0.0;
            for (std::size_t r = 0; r < offsets.size(); ++r) {
                const double w = distance[r] == 0.0 ? 1.0 : std::exp(-decay * distance[r]);
                if (w == 0.0)
                    continue;
                double ring_sum = 0.0;
                for (auto [dx, dy] : offsets[r])
                    ring_sum += img.clamped(x + dx, y + dy);
                weighted += w * ring_sum;
                total += w * static_cast<double>(offsets[r].size());
            }
            out(x, y) = std::clamp(weighted / total, m.min, m.max);
        }
    }
    return out;
}

FloatImage boxcar_filter(const FloatImage& img, int window)
{
    if (window < 1 || window % 2 == 0)
        throw DomainError("filter window must be odd and positive");
    FloatImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x)
            out(x, y) = local_moments(img, x, y, window / 2).mean;
    }
    return out;
}

}  // namespace speckstack
