#include <cmath>
#include <set>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "speckstack/rng.hpp"
#include "test_support.hpp"

namespace {

using namespace speckstack;
using speckstack::testing::ks_pvalue;

TEST(Rng, SameSeedSameStream)
{
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(a.uniform(), b.uniform());
        ASSERT_EQ(a.normal(), b.normal());
        ASSERT_EQ(a.gamma(0.7), b.gamma(0.7));
    }
}

TEST(Rng, UniformIsOpenUnitInterval)
{
    Rng rng(9);
    std::vector<double> u(50000);
    for (auto& v : u) {
        v = rng.uniform();
        ASSERT_GT(v, 0.0);
        ASSERT_LT(v, 1.0);
    }
    EXPECT_GT(ks_pvalue(u, [](double x) { return x; }), 0.001);
}

TEST(Rng, NormalMatchesGaussianCdf)
{
    Rng rng(10);
    std::vector<double> z(50000);
    for (auto& v : z)
        v = rng.normal();
    const double p = ks_pvalue(z, [](double x) { return 0.5 * boost::math::erfc(-x / std::sqrt(2.0)); });
    EXPECT_GT(p, 0.001);
}

TEST(Rng, GammaMatchesRegularizedIncompleteGamma)
{
    for (double shape : {0.3, 1.0, 1.5, 10.0}) {
        Rng rng(11);
        std::vector<double> g(30000);
        for (auto& v : g)
            v = rng.gamma(shape);
        const double p = ks_pvalue(g, [&](double x) { return boost::math::gamma_p(shape, x); });
        EXPECT_GT(p, 0.001) << "shape " << shape;
    }
}

TEST(Rng, DerivedSeedsAreDistinctAndStable)
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i)
        seen.insert(derive_seed(42, i));
    EXPECT_EQ(seen.size(), 10000u);
    EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
    EXPECT_NE(derive_seed(42, 3), derive_seed(43, 3));
}

// mix_seed(x) is one SplitMix64 step from state x.
TEST(Rng, MixSeedIsSplitMixStep)
{
    auto reference = [](std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    for (std::uint64_t x : {0ULL, 1ULL, 0x9E3779B97F4A7C15ULL, 123456789ULL})
        EXPECT_EQ(mix_seed(x), reference(x));
    EXPECT_EQ(mix_seed(0), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(derive_seed(7, 0), reference(7 + 0x9E3779B97F4A7C15ULL));
}

}  // namespace
