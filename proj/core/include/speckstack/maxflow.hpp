#pragma once

#include <cstdint>
#include <vector>

namespace speckstack {

/// Dinic's blocking-flow max-flow on integer capacities.
class MaxFlow {
  public:
    using Capacity = std::int64_t;
    static constexpr Capacity kInfinite = Capacity{1} << 60;

    explicit MaxFlow(int nodes);

    void add_edge(int from, int to, Capacity capacity);

    /// Runs to completion; may be called once.
    Capacity solve(int source, int sink);

    /// Nodes reachable from `source` in the residual graph after solve():
    /// the source side of the minimum cut with the fewest nodes.
    std::vector<bool> source_side(int source) const;

  private:
    struct Edge {
        int to;
        int rev;
        Capacity cap;
    };

    bool build_levels(int source, int sink);
    Capacity push(int node, int sink, Capacity limit);

    std::vector<std::vector<Edge>> graph_;
    std::vector<int> level_;
    std::vector<std::size_t> next_edge_;
};

}  // namespace speckstack
