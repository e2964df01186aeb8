#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dkws/graph.hpp"

namespace dkws {

// Union of forward shortest-path trees for one keyword. Ids are whatever the
// caller uses for vertices (fragment keys inside the kernel).
class BacktrackGraph {
public:
    // Set semantics on (parent, child); a repeated pair keeps the smaller weight.
    void add_edge(VertexId parent, VertexId child, double w);

    const std::vector<Arc>& parents(VertexId child) const;
    bool has_edge(VertexId parent, VertexId child) const;
    std::size_t edge_count() const { return edges_; }
    std::size_t vertex_count() const;
    std::vector<std::pair<VertexId, VertexId>> edges() const;
    void clear();

private:
    std::unordered_map<VertexId, std::vector<Arc>> parents_;
    std::size_t edges_ = 0;
};

struct TreeEdge {
    VertexId parent;
    VertexId child;
    double w;
};

void record_backtrack(BacktrackGraph& bt, const std::vector<TreeEdge>& settled);

using DistList = std::vector<std::pair<VertexId, double>>;  // sorted by vertex

struct Reached {
    VertexId vertex;
    double dist;
    VertexId origin;  // refined vertex the distance was measured to
};
using ReachList = std::vector<Reached>;  // sorted by vertex

// One reverse Dijkstra over the tree union from every refined vertex at once.
// Result: for each reached vertex, min over refined p of dist(x, p) + value(p),
// limited to values <= limit.
ReachList propagate_update_batch(const BacktrackGraph& bt, const DistList& refined, double limit);

// Reference: one reverse Dijkstra per refined vertex, merged by minimum.
ReachList propagate_update_naive(const BacktrackGraph& bt, const DistList& refined, double limit);

// Descending partial score, ties by ascending id.
std::vector<VertexId> order_frontier(std::vector<std::pair<VertexId, double>> roots);

}  // namespace dkws
