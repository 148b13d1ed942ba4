#include <random>

#include <gtest/gtest.h>

#include "speckstack/maxflow.hpp"

namespace {

using speckstack::MaxFlow;

TEST(MaxFlow, ClassicTextbookNetwork)
{
    // CLRS figure 26.1: maximum flow 23.
    MaxFlow g(6);
    g.add_edge(0, 1, 16);
    g.add_edge(0, 2, 13);
    g.add_edge(1, 3, 12);
    g.add_edge(2, 1, 4);
    g.add_edge(2, 4, 14);
    g.add_edge(3, 2, 9);
    g.add_edge(3, 5, 20);
    g.add_edge(4, 3, 7);
    g.add_edge(4, 5, 4);
    EXPECT_EQ(g.solve(0, 5), 23);
}

TEST(MaxFlow, DisconnectedSinkHasZeroFlow)
{
    MaxFlow g(3);
    g.add_edge(0, 1, 5);
    EXPECT_EQ(g.solve(0, 2), 0);
    const auto side = g.source_side(0);
    EXPECT_TRUE(side[0]);
    EXPECT_TRUE(side[1]);
    EXPECT_FALSE(side[2]);
}

TEST(MaxFlow, SourceSideIsMinimalAmongMinCuts)
{
    // Two equal cuts: {s} and {s, a}. The residual one is {s}.
    MaxFlow g(3);
    g.add_edge(0, 1, 4);
    g.add_edge(1, 2, 4);
    EXPECT_EQ(g.solve(0, 2), 4);
    const auto side = g.source_side(0);
    EXPECT_TRUE(side[0]);
    EXPECT_FALSE(side[1]);
}

// Brute-force minimum cut over every source-side subset.
TEST(MaxFlow, EqualsMinimumCutOnRandomGraphs)
{
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(gen() % 7);
        std::vector<std::vector<std::int64_t>> cap(n, std::vector<std::int64_t>(n, 0));
        MaxFlow g(n);
        for (int e = 0; e < 3 * n; ++e) {
            const int a = static_cast<int>(gen() % n);
            const int b = static_cast<int>(gen() % n);
            if (a == b)
                continue;
            const auto c = static_cast<std::int64_t>(gen() % 20);
            cap[a][b] += c;
            g.add_edge(a, b, c);
        }
        std::int64_t best = -1;
        for (int mask = 0; mask < (1 << n); ++mask) {
            if (!(mask & 1) || (mask >> (n - 1)) & 1)
                continue;
            std::int64_t cut = 0;
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    if (((mask >> a) & 1) && !((mask >> b) & 1))
                        cut += cap[a][b];
                }
            }
            if (best < 0 || cut < best)
                best = cut;
        }
        const auto flow = g.solve(0, n - 1);
        ASSERT_EQ(flow, best) << "trial " << trial;

        // The residual source side is itself a cut of that capacity.
        const auto side = g.source_side(0);
        std::int64_t cut = 0;
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (side[a] && !side[b])
                    cut += cap[a][b];
            }
        }
        ASSERT_EQ(cut, best);
        ASSERT_FALSE(side[n - 1]);
    }
}

TEST(MaxFlow, InfiniteEdgesAreNeverCut)
{
    MaxFlow g(4);
    g.add_edge(0, 1, 3);
    g.add_edge(1, 2, MaxFlow::kInfinite);
    g.add_edge(2, 3, 5);
    g.add_edge(0, 2, 1);
    EXPECT_EQ(g.solve(0, 3), 4);
}

}  // namespace
