#pragma once

// Independent oracles shared by the unit, integration and acceptance tests.
// Nothing here calls the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "speckstack/image.hpp"
#include "speckstack/stack_filter.hpp"
#include "speckstack/training.hpp"

namespace speckstack::testing {

inline QuantizedImage random_quantized(int width, int height, int levels, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> level(0, levels);
    QuantizedImage img(width, height, levels);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x)
            img.set(x, y, level(gen));
    }
    return img;
}

inline FloatImage random_positive(int width, int height, std::uint64_t seed, double lo = 0.5,
                                  double hi = 20.0)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> value(lo, hi);
    FloatImage img(width, height);
    for (auto& v : img.pixels())
        v = value(gen);
    return img;
}

/// Random monotone function given by a random set of terms.
inline PositiveBooleanFunction random_pbf(WindowShape window, std::uint64_t seed,
                                          int max_terms = 12)
{
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> count(0, max_terms);
    std::bernoulli_distribution bit(0.35);
    std::vector<Pattern> terms;
    const int k = count(gen);
    for (int t = 0; t < k; ++t) {
        Pattern p = 0;
        for (int i = 0; i < window.inputs(); ++i) {
            if (bit(gen))
                p |= Pattern{1} << i;
        }
        terms.push_back(p);
    }
    return PositiveBooleanFunction(window, terms);
}

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(j-1) exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda)
{
    if (lambda < 0.2)
        return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-16)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov p-value with the Stephens small-sample
/// correction of lambda.
inline double ks_pvalue(std::vector<double> samples, const std::function<double(double)>& cdf)
{
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double sn = std::sqrt(n);
    return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

/// Every monotone Boolean function on n <= 4 inputs, as truth tables indexed
/// by pattern. Found by brute force over all 2^(2^n) tables.
inline std::vector<std::vector<std::uint8_t>> all_monotone_tables(int n)
{
    const int patterns = 1 << n;
    std::vector<std::vector<std::uint8_t>> out;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << patterns); ++code) {
        bool monotone = true;
        for (int p = 0; p < patterns && monotone; ++p) {
            if (!((code >> p) & 1))
                continue;
            for (int i = 0; i < n; ++i) {
                if (!((code >> (p | (1 << i))) & 1)) {
                    monotone = false;
                    break;
                }
            }
        }
        if (!monotone)
            continue;
        std::vector<std::uint8_t> table(patterns);
        for (int p = 0; p < patterns; ++p)
            table[p] = (code >> p) & 1;
        out.push_back(std::move(table));
    }
    return out;
}

/// MAE cost of a truth table: N1 where the table says 0, N0 where it says 1.
inline std::uint64_t table_cost(const PatternStats& stats, const std::vector<std::uint8_t>& table)
{
    std::uint64_t cost = 0;
    for (const auto& [p, c] : stats.counts())
        cost += table[p] ? c.desired_zero : c.desired_one;
    return cost;
}

/// Sorted window samples around (x, y) with replicate borders.
inline std::vector<int> window_samples(const QuantizedImage& img, const WindowShape& w, int x,
                                       int y)
{
    std::vector<int> v;
    for (int dy = -w.height() / 2; dy <= w.height() / 2; ++dy) {
        for (int dx = -w.width() / 2; dx <= w.width() / 2; ++dx)
            v.push_back(img.clamped(x + dx, y + dy));
    }
    std::sort(v.begin(), v.end());
    return v;
}

/// Sample mean and unbiased variance.
struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

inline Moments moments(const std::vector<double>& v)
{
    Moments m;
    for (double x : v)
        m.mean += x;
    m.mean /= static_cast<double>(v.size());
    for (double x : v)
        m.variance += (x - m.mean) * (x - m.mean);
    m.variance /= static_cast<double>(v.size() - 1);
    return m;
}

}  // namespace speckstack::testing
