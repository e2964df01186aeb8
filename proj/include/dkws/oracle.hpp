#pragma once

#include <vector>

#include "dkws/graph.hpp"

namespace dkws::oracle {

inline constexpr std::size_t kMaxVertices = 5000;

struct Scored {
    VertexId root;
    double score;
};

// dist(u, q) for every u, truncated at tau; unreached entries hold g.inf().
std::vector<double> exact_keyword_dists(const Graph& g, KeywordId q, double tau);

// Top-k by ascending score, ties by root id.
std::vector<Scored> brute_top_k(const Graph& g, const Query& query);

double exact_dist(const Graph& g, VertexId u, VertexId v);

// Full single-source distances from u (forward), g.inf() when unreachable.
std::vector<double> distances_from(const Graph& g, VertexId u);

}  // namespace dkws::oracle
