#include "speckstack/maxflow.hpp"

#include <algorithm>
#include <queue>

#include "speckstack/error.hpp"

namespace speckstack {

MaxFlow::MaxFlow(int nodes) : graph_(static_cast<std::size_t>(nodes)) {}

void MaxFlow::add_edge(int from, int to, Capacity capacity)
{
    if (capacity < 0)
        throw DomainError("negative edge capacity");
    const int fwd = static_cast<int>(graph_[from].size());
    const int bwd = static_cast<int>(graph_[to].size()) + (from == to ? 1 : 0);
    graph_[from].push_back({to, bwd, capacity});
    graph_[to].push_back({from, fwd, 0});
}

bool MaxFlow::build_levels(int source, int sink)
{
    level_.assign(graph_.size(), -1);
    std::queue<int> queue;
    level_[source] = 0;
    queue.push(source);
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop();
        for (const auto& e : graph_[u]) {
            if (e.cap > 0 && level_[e.to] < 0) {
                level_[e.to] = level_[u] + 1;
                queue.push(e.to);
            }
        }
    }
    return level_[sink] >= 0;
}

MaxFlow::Capacity MaxFlow::push(int node, int sink, Capacity limit)
{
    if (node == sink)
        return limit;
    for (auto& i = next_edge_[node]; i < graph_[node].size(); ++i) {
        auto& e = graph_[node][i];
        if (e.cap <= 0 || level_[e.to] != level_[node] + 1)
            continue;
        const Capacity pushed = push(e.to, sink, std::min(limit, e.cap));
        if (pushed > 0) {
            e.cap -= pushed;
            graph_[e.to][e.rev].cap += pushed;
            return pushed;
        }
    }
    return 0;
}

MaxFlow::Capacity MaxFlow::solve(int source, int sink)
{
    Capacity total = 0;
    while (build_levels(source, sink)) {
        next_edge_.assign(graph_.size(), 0);
        while (Capacity f = push(source, sink, kInfinite))
            total += f;
    }
    return total;
}

std::vector<bool> MaxFlow::source_side(int source) const
{
    std::vector<bool> seen(graph_.size(), false);
    std::queue<int> queue;
    seen[source] = true;
    queue.push(source);
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop();
        for (const auto& e : graph_[u]) {
            if (e.cap > 0 && !seen[e.to]) {
                seen[e.to] = true;
                queue.push(e.to);
            }
        }
    }
    return seen;
}

}  // namespace speckstack
