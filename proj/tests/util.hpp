#pragma once

#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dkws/bench.hpp"
#include "dkws/graph.hpp"
#include "dkws/oracle.hpp"

namespace testutil {

using namespace dkws;

inline Graph parse(const std::string& edges, const std::string& labels = "") {
    std::istringstream e(edges), l(labels);
    return load_graph(e, l);
}

inline Graph random_graph(std::size_t n, std::uint64_t seed, bool pa = false) {
    GenParams p;
    p.n = n;
    p.seed = seed;
    p.model = pa ? GraphModel::PrefAttach : GraphModel::ErdosRenyi;
    return generate_graph(p);
}

// Plain O(n^2) Dijkstra, no heap. Used where the oracle module is the thing under test.
inline std::vector<double> dense_dijkstra(const Graph& g, VertexId s, bool reverse = false) {
    const std::size_t n = g.vertex_count;
    std::vector<double> d(n, g.inf());
    std::vector<char> done(n, 0);
    d[s] = 0.0;
    for (std::size_t it = 0; it < n; ++it) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v)
            if (!done[v] && d[v] < g.inf() && (u == n || d[v] < d[u])) u = v;
        if (u == n) break;
        done[u] = 1;
        const auto& adj = reverse ? g.in_adj[u] : g.out_adj[u];
        for (const auto& a : adj)
            if (d[u] + a.w < d[a.v]) d[a.v] = d[u] + a.w;
    }
    return d;
}

// Small graph rebuilt around the two-keyword walkthrough: v1..v9 are ids 1..9,
// w1 = 10, y1 = 11, y2 = 12, x1 = 13. Only the quoted numbers are pinned.
inline Graph walkthrough_graph() {
    return parse(
        "2 4 2\n2 5 2\n3 5 1\n1 6 3\n1 7 5\n10 8 4\n11 7 2\n12 7 4\n13 9 5\n13 7 5\n",
        "4 a\n6 a\n8 a\n9 a\n5 b\n7 b\n");
}

// Top-k score list straight from the oracle.
inline std::vector<double> oracle_scores(const Graph& g, const Query& q) {
    std::vector<double> s;
    for (const auto& x : oracle::brute_top_k(g, q)) s.push_back(x.score);
    return s;
}

}  // namespace testutil
