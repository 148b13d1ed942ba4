#include <cmath>

#include <gtest/gtest.h>

#include "speckstack/classic_filters.hpp"
#include "speckstack/error.hpp"
#include "test_support.hpp"

namespace {

using namespace speckstack;
using speckstack::testing::random_positive;

double at(const FloatImage& img, int x, int y)
{
    return img(std::clamp(x, 0, img.width() - 1), std::clamp(y, 0, img.height() - 1));
}

// Two-pass window statistics, population variance.
std::pair<double, double> window_stats(const FloatImage& img, int x, int y, int half)
{
    const int n = (2 * half + 1) * (2 * half + 1);
    double mean = 0.0;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx)
            mean += at(img, x + dx, y + dy);
    }
    mean /= n;
    double var = 0.0;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx)
            var += (at(img, x + dx, y + dy) - mean) * (at(img, x + dx, y + dy) - mean);
    }
    return {mean, var / n};
}

double lee_oracle(const FloatImage& img, int x, int y, const SpeckleFilterParams& p)
{
    const auto [m, v] = window_stats(img, x, y, p.window / 2);
    if (v == 0.0)
        return m;
    const double w = std::max(0.0, 1.0 - (1.0 / p.looks) / (v / (m * m)));
    return m + w * (img(x, y) - m);
}

double frost_oracle(const FloatImage& img, int x, int y, const SpeckleFilterParams& p)
{
    const int half = p.window / 2;
    const auto [m, v] = window_stats(img, x, y, half);
    const double k = p.damping * v / (m * m);
    double num = 0.0, den = 0.0;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
            const double w = std::exp(-k * std::hypot(dx, dy));
            num += w * at(img, x + dx, y + dy);
            den += w;
        }
    }
    return num / den;
}

TEST(Lee, MatchesDirectFormula)
{
    const auto img = random_positive(17, 13, 1);
    for (SpeckleFilterParams p : {SpeckleFilterParams{3, 1.0, 1.0}, SpeckleFilterParams{5, 4.0, 1.0},
                                  SpeckleFilterParams{7, 16.0, 1.0}}) {
        const auto out = lee_filter(img, p);
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x)
                ASSERT_NEAR(out(x, y), lee_oracle(img, x, y, p), 1e-9) << x << "," << y;
        }
    }
}

TEST(Frost, MatchesDirectFormula)
{
    const auto img = random_positive(15, 11, 2);
    for (SpeckleFilterParams p : {SpeckleFilterParams{3, 1.0, 1.0}, SpeckleFilterParams{5, 1.0, 2.5},
                                  SpeckleFilterParams{7, 1.0, 0.3}}) {
        const auto out = frost_filter(img, p);
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x)
                ASSERT_NEAR(out(x, y), frost_oracle(img, x, y, p), 1e-9) << x << "," << y;
        }
    }
}

TEST(ClassicFilters, ConstantImageIsFixed)
{
    const FloatImage img(9, 9, 3.25);
    EXPECT_EQ(lee_filter(img, {}), img);
    EXPECT_EQ(frost_filter(img, {}), img);
    EXPECT_EQ(boxcar_filter(img, 5), img);
}

TEST(ClassicFilters, OutputStaysInsideWindowRange)
{
    const auto img = random_positive(20, 20, 3, 0.01, 100.0);
    for (int window : {3, 5}) {
        const SpeckleFilterParams p{window, 1.0, 1.0};
        const auto lee = lee_filter(img, p);
        const auto frost = frost_filter(img, p);
        for (int y = 0; y < 20; ++y) {
            for (int x = 0; x < 20; ++x) {
                double lo = 1e300, hi = -1e300;
                for (int dy = -window / 2; dy <= window / 2; ++dy) {
                    for (int dx = -window / 2; dx <= window / 2; ++dx) {
                        lo = std::min(lo, at(img, x + dx, y + dy));
                        hi = std::max(hi, at(img, x + dx, y + dy));
                    }
                }
                EXPECT_GE(lee(x, y), lo);
                EXPECT_LE(lee(x, y), hi);
                EXPECT_GE(frost(x, y), lo);
                EXPECT_LE(frost(x, y), hi);
            }
        }
    }
}

// With the window variation below the noise level, Lee reduces to the mean.
TEST(Lee, LowVariationGivesBoxcar)
{
    const auto img = random_positive(12, 12, 4, 9.0, 11.0);
    const auto lee = lee_filter(img, {5, 1.0, 1.0});
    const auto box = boxcar_filter(img, 5);
    for (std::size_t i = 0; i < img.size(); ++i)
        EXPECT_NEAR(lee.pixels()[i], box.pixels()[i], 1e-12);
}

TEST(Frost, VanishingDampingApproachesBoxcar)
{
    const auto img = random_positive(12, 12, 5);
    const auto frost = frost_filter(img, {5, 1.0, 1e-9});
    const auto box = boxcar_filter(img, 5);
    for (std::size_t i = 0; i < img.size(); ++i)
        EXPECT_NEAR(frost.pixels()[i], box.pixels()[i], 1e-6);
}

TEST(ClassicFilters, RejectInvalidParameters)
{
    const FloatImage img(4, 4, 1.0);
    EXPECT_THROW(lee_filter(img, {4, 1.0, 1.0}), DomainError);
    EXPECT_THROW(lee_filter(img, {3, 0.5, 1.0}), DomainError);
    EXPECT_THROW(frost_filter(img, {3, 1.0, 0.0}), DomainError);
    EXPECT_THROW(boxcar_filter(img, 0), DomainError);
}

}  // namespace
