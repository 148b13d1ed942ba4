#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "speckstack/error.hpp"
#include "speckstack/io.hpp"
#include "speckstack/phantom.hpp"
#include "test_support.hpp"

namespace {

using namespace speckstack;

PhantomSpec two_region(int size, std::uint64_t seed)
{
    PhantomSpec spec;
    spec.width = spec.height = size;
    spec.regions = {{-1.5, 1.0, 1.0}, {-10.0, 1.0, 10.0}};
    spec.seed = seed;
    return spec;
}

TEST(Phantom, TwoRegionSplitsAtHalfWidth)
{
    const Phantom ph = make_phantom(two_region(65, 3));
    for (int y = 0; y < 65; ++y) {
        for (int x = 0; x < 65; ++x) {
            ASSERT_EQ(ph.labels(x, y), x >= 32 ? 1 : 0);
            ASSERT_EQ(ph.ideal(x, y), x >= 32 ? 10.0 : 1.0);
            ASSERT_GT(ph.noisy(x, y), 0.0);
        }
    }
}

TEST(Phantom, RegionMeansMatchTargets)
{
    PhantomSpec spec = two_region(256, 4);
    spec.regions = {{-6.0, 1.0, 2.0}, {-10.0, 1.0, 10.0}};
    const Phantom ph = make_phantom(spec);
    for (int label : {0, 1}) {
        std::vector<double> v;
        for (int y = 0; y < 256; ++y) {
            for (int x = 0; x < 256; ++x) {
                if (ph.labels(x, y) == label)
                    v.push_back(ph.noisy(x, y));
            }
        }
        const auto m = speckstack::testing::moments(v);
        const double se = std::sqrt(m.variance / v.size());
        EXPECT_NEAR(m.mean, spec.regions[label].mean, 4.0 * se);
    }
}

TEST(Phantom, DeterministicForSeed)
{
    const Phantom a = make_phantom(two_region(32, 9));
    const Phantom b = make_phantom(two_region(32, 9));
    const Phantom c = make_phantom(two_region(32, 10));
    EXPECT_EQ(a.noisy, b.noisy);
    EXPECT_NE(a.noisy, c.noisy);
}

TEST(Phantom, RequiresTwoRegions)
{
    PhantomSpec spec = two_region(16, 1);
    spec.regions.pop_back();
    EXPECT_THROW(make_phantom(spec), DomainError);
}

TEST(StripsPhantom, MaskMatchesCommittedLayout)
{
    const QuantizedImage committed =
        decode_pgm(read_file(std::string(SPECKSTACK_DATA_DIR) + "/strips_mask_256.pgm"));
    const LabelMap mask = strips_and_points_mask(256, 256);
    ASSERT_EQ(committed.width(), 256);
    ASSERT_EQ(committed.height(), 256);
    for (int y = 0; y < 256; ++y) {
        for (int x = 0; x < 256; ++x)
            ASSERT_EQ(committed(x, y), mask(x, y)) << x << "," << y;
    }
}

TEST(StripsPhantom, StripFractionEqualsCommittedMask)
{
    PhantomSpec spec;
    spec.kind = PhantomKind::StripsAndPoints;
    spec.width = spec.height = 256;
    spec.regions = {{-8.0, 1.0, 1.0}, {-3.0, 1.0, 3.0}};
    spec.seed = 2;
    const Phantom ph = make_phantom(spec);

    const QuantizedImage committed =
        decode_pgm(read_file(std::string(SPECKSTACK_DATA_DIR) + "/strips_mask_256.pgm"));
    const auto strip_pixels = [](auto pixels) {
        return std::count_if(pixels.begin(), pixels.end(), [](auto v) { return v == 1; });
    };
    EXPECT_EQ(strip_pixels(ph.labels.pixels()), strip_pixels(committed.pixels()));
    // Widths 1+2+3+5+7+9 over rows 16..239, plus the 25 isolated points.
    EXPECT_EQ(strip_pixels(committed.pixels()), 27 * 224 + 25);
}

TEST(StripsPhantom, StripColumnsFollowLayout)
{
    const auto cols = strip_columns();
    ASSERT_EQ(cols.size(), 6u);
    const int widths[] = {1, 2, 3, 5, 7, 9};
    int x = 16;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        EXPECT_EQ(cols[i].first, x);
        EXPECT_EQ(cols[i].second - cols[i].first, widths[i]);
        x = cols[i].second + 16;
    }
    EXPECT_THROW(strips_and_points_mask(200, 200), DomainError);
}

}  // namespace
