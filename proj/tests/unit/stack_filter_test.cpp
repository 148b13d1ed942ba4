#include <algorithm>

#include <gtest/gtest.h>

#include "speckstack/error.hpp"
#include "speckstack/stack_filter.hpp"
#include "test_support.hpp"

namespace {

using namespace speckstack;
using speckstack::testing::random_pbf;
using speckstack::testing::random_quantized;
using speckstack::testing::window_samples;

QuantizedImage row_image(std::vector<int> values, int levels)
{
    QuantizedImage img(static_cast<int>(values.size()), 1, levels);
    for (std::size_t i = 0; i < values.size(); ++i)
        img.set(static_cast<int>(i), 0, values[i]);
    return img;
}

std::vector<int> row_of(const BinaryImage& b)
{
    return {b.pixels().begin(), b.pixels().end()};
}

TEST(Threshold, WorkedExampleSlices)
{
    const auto x = row_image({2, 1, 3, 2, 3}, 3);
    EXPECT_EQ(row_of(threshold(x, 1)), (std::vector<int>{1, 1, 1, 1, 1}));
    EXPECT_EQ(row_of(threshold(x, 2)), (std::vector<int>{1, 0, 1, 1, 1}));
    EXPECT_EQ(row_of(threshold(x, 3)), (std::vector<int>{0, 0, 1, 0, 1}));
}

TEST(Threshold, RangeAndZeroImage)
{
    const QuantizedImage zero(4, 4, 7);
    EXPECT_EQ(row_of(threshold(zero, 1)), std::vector<int>(16, 0));
    EXPECT_THROW(threshold(zero, 0), DomainError);
    EXPECT_THROW(threshold(zero, 8), DomainError);
}

TEST(Reconstruct, WorkedExampleRoundTrip)
{
    const auto x = row_image({2, 1, 3, 2, 3}, 3);
    const auto slices = threshold_decompose(x);
    ASSERT_EQ(slices.size(), 3u);
    EXPECT_EQ(reconstruct(slices), x);
}

TEST(Reconstruct, ZeroSlicesGiveZeroImage)
{
    std::vector<BinaryImage> slices(5, BinaryImage(3, 2, 0));
    const auto img = reconstruct(slices);
    EXPECT_EQ(img.levels(), 5);
    for (auto v : img.pixels())
        EXPECT_EQ(v, 0);
}

TEST(Reconstruct, RejectsUnstackedSlices)
{
    std::vector<BinaryImage> slices{BinaryImage(2, 1, 0), BinaryImage(2, 1, 1)};
    EXPECT_THROW(reconstruct(slices), DomainError);
}

TEST(Reconstruct, IdentityAndStackingOnRandomImages)
{
    for (int levels : {3, 15, 255}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto img = random_quantized(64, 64, levels, seed * 31 + levels);
            const auto slices = threshold_decompose(img);
            for (std::size_t m = 0; m + 1 < slices.size(); ++m) {
                for (std::size_t i = 0; i < slices[m].size(); ++i)
                    ASSERT_GE(slices[m].pixels()[i], slices[m + 1].pixels()[i]);
            }
            ASSERT_EQ(reconstruct(slices), img);
        }
    }
}

TEST(WindowShapeTest, ParseAndRasterOrder)
{
    const auto w = WindowShape::parse("5x3");
    EXPECT_EQ(w.width(), 5);
    EXPECT_EQ(w.height(), 3);
    EXPECT_EQ(w.inputs(), 15);
    EXPECT_EQ(w.dx(0), -2);
    EXPECT_EQ(w.dy(0), -1);
    EXPECT_EQ(w.dx(w.center()), 0);
    EXPECT_EQ(w.dy(w.center()), 0);
    EXPECT_EQ(w.to_string(), "5x3");
    EXPECT_EQ(WindowShape::parse("3"), WindowShape(3, 3));
    EXPECT_EQ(WindowShape::parse("2x2").center(), 3);
    EXPECT_THROW(WindowShape::parse("0x3"), DomainError);
    EXPECT_THROW(WindowShape::parse("3x3x"), ParseError);
    EXPECT_THROW(WindowShape(7, 5), DomainError);  // 35 inputs
    EXPECT_THROW(WindowShape::parse("abc"), ParseError);
}

TEST(Pbf, NormalizesToAntichain)
{
    const WindowShape w(3, 1);
    const PositiveBooleanFunction f(w, {0b011, 0b001, 0b111, 0b001, 0b110});
    EXPECT_EQ(f.minimal_true_vectors(), (std::vector<Pattern>{0b001, 0b110}));
    for (Pattern a : f.minimal_true_vectors()) {
        for (Pattern b : f.minimal_true_vectors())
            EXPECT_TRUE(a == b || (a & b) != a);
    }
}

TEST(Pbf, MajorityTruthTable)
{
    const WindowShape w(3, 1);
    const PositiveBooleanFunction f(w, {parse_pattern("110"), parse_pattern("101"),
                                        parse_pattern("011")});
    for (Pattern p = 0; p < 8; ++p) {
        const int ones = __builtin_popcount(p);
        EXPECT_EQ(eval_pbf(f, p), ones >= 2) << pattern_string(p, 3);
    }
    EXPECT_FALSE(eval_pbf(f, parse_pattern("100")));
    EXPECT_TRUE(eval_pbf(f, parse_pattern("110")));
    EXPECT_EQ(f, PositiveBooleanFunction::order_statistic(w, 2));
}

TEST(Pbf, IdentityAndAllInputsTerm)
{
    const WindowShape w(3, 3);
    const auto id = PositiveBooleanFunction::identity(w);
    EXPECT_TRUE(id(Pattern{1} << w.center()));
    EXPECT_FALSE(id(w.full_mask() & ~(Pattern{1} << w.center())));
    const PositiveBooleanFunction all(w, {w.full_mask()});
    EXPECT_TRUE(all(w.full_mask()));
    for (int i = 0; i < w.inputs(); ++i)
        EXPECT_FALSE(all(w.full_mask() & ~(Pattern{1} << i)));
}

TEST(Pbf, TruthTableRoundTripAndMonotonicityCheck)
{
    const WindowShape w(3, 1);
    const std::vector<std::uint8_t> majority{0, 0, 0, 1, 0, 1, 1, 1};
    EXPECT_EQ(PositiveBooleanFunction::from_truth_table(w, majority),
              PositiveBooleanFunction::order_statistic(w, 2));
    const std::vector<std::uint8_t> not_monotone{0, 1, 0, 0, 0, 0, 0, 0};
    EXPECT_THROW(PositiveBooleanFunction::from_truth_table(w, not_monotone), DomainError);
}

TEST(Pbf, TextRoundTrip)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto f = random_pbf(WindowShape(3, 3), seed);
        EXPECT_EQ(parse_pbf(to_text(f)), f);
    }
    const PositiveBooleanFunction f(WindowShape(3, 1), {0b001, 0b110});
    EXPECT_EQ(to_text(f), "PBF 3 1 2\n100\n011\n");
    EXPECT_THROW(parse_pbf("PBF 3 1 2\n100\n"), ParseError);
    EXPECT_THROW(parse_pbf("PBF 3 1 1\n1001\n"), ParseError);
    EXPECT_THROW(parse_pbf("XYZ"), ParseError);
}

TEST(StackFilter, IdentityLeavesImage)
{
    const auto img = random_quantized(17, 11, 255, 1);
    const auto id = PositiveBooleanFunction::identity(WindowShape(3, 3));
    EXPECT_EQ(apply_stack_reference(id, img), img);
    EXPECT_EQ(apply_stack_fast(id, img), img);
    EXPECT_EQ(apply_iterated(id, img, 7), img);
}

TEST(StackFilter, AllInputsTermIsWindowMinimum)
{
    const WindowShape w(3, 3);
    const PositiveBooleanFunction f(w, {w.full_mask()});
    const auto img = random_quantized(16, 16, 15, 2);
    const auto out = apply_stack_reference(f, img);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x)
            ASSERT_EQ(out(x, y), window_samples(img, w, x, y).front());
    }
}

TEST(StackFilter, SingletonsOrIsWindowMaximum)
{
    const WindowShape w(5, 3);
    const auto f = PositiveBooleanFunction::order_statistic(w, 1);
    const auto img = random_quantized(16, 16, 255, 3);
    const auto out = apply_stack_fast(f, img);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x)
            ASSERT_EQ(out(x, y), window_samples(img, w, x, y).back());
    }
}

TEST(StackFilter, MajorityIsMedianFilter)
{
    const WindowShape w(3, 3);
    const auto f = PositiveBooleanFunction::order_statistic(w, 5);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto img = random_quantized(16, 16, 15, 1000 + seed);
        const auto out = apply_stack_reference(f, img);
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 16; ++x)
                ASSERT_EQ(out(x, y), window_samples(img, w, x, y)[4]) << "seed " << seed;
        }
    }
}

TEST(StackFilter, FastEqualsReferenceOnRandomCases)
{
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const WindowShape w = seed % 3 == 0 ? WindowShape(5, 5) : WindowShape(3, 3);
        const auto f = random_pbf(w, seed);
        const auto img = random_quantized(16, 16, 15, seed + 7);
        ASSERT_EQ(apply_stack_fast(f, img), apply_stack_reference(f, img)) << "seed " << seed;
    }
}

TEST(StackFilter, ConstantFunctionsAndWorkers)
{
    const WindowShape w(3, 3);
    const auto img = random_quantized(33, 20, 63, 4);
    const auto zero = apply_stack_fast(PositiveBooleanFunction::constant(w, false), img);
    const auto one = apply_stack_fast(PositiveBooleanFunction::constant(w, true), img);
    EXPECT_EQ(zero, apply_stack_reference(PositiveBooleanFunction::constant(w, false), img));
    EXPECT_EQ(one, apply_stack_reference(PositiveBooleanFunction::constant(w, true), img));
    for (auto v : one.pixels())
        EXPECT_EQ(v, 63);
    const auto f = random_pbf(w, 99);
    EXPECT_EQ(apply_stack_fast(f, img, 1), apply_stack_fast(f, img, 4));
}

TEST(StackFilter, MonotoneInInput)
{
    const WindowShape w(3, 3);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto f = random_pbf(w, seed + 500);
        const auto a = random_quantized(12, 12, 31, seed);
        QuantizedImage b(12, 12, 31);
        const auto bump = random_quantized(12, 12, 31, seed + 1);
        for (int y = 0; y < 12; ++y) {
            for (int x = 0; x < 12; ++x)
                b.set(x, y, std::max(a(x, y), bump(x, y)));
        }
        const auto fa = apply_stack_fast(f, a);
        const auto fb = apply_stack_fast(f, b);
        for (std::size_t i = 0; i < fa.size(); ++i)
            ASSERT_LE(fa.pixels()[i], fb.pixels()[i]);
    }
}

TEST(StackFilter, OutputIsAWindowSample)
{
    const WindowShape w(3, 3);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto f = random_pbf(w, seed + 900);
        if (f.term_count() == 0 || f.minimal_true_vectors().front() == 0)
            continue;  // constants are not selections
        const auto img = random_quantized(10, 10, 255, seed);
        const auto out = apply_stack_fast(f, img);
        for (int y = 0; y < 10; ++y) {
            for (int x = 0; x < 10; ++x) {
                const auto s = window_samples(img, w, x, y);
                ASSERT_TRUE(std::binary_search(s.begin(), s.end(), out(x, y)));
            }
        }
    }
}

TEST(StackFilter, MedianFixesConstantImage)
{
    const QuantizedImage img(9, 9, 20, 13);
    const auto median = PositiveBooleanFunction::order_statistic(WindowShape(3, 3), 5);
    EXPECT_EQ(apply_iterated(median, img, 10), img);
    const auto noisy = random_quantized(9, 9, 20, 5);
    EXPECT_EQ(apply_iterated(median, noisy, 1), apply_stack_fast(median, noisy));
    EXPECT_THROW(apply_iterated(median, noisy, 0), DomainError);
}

}  // namespace
